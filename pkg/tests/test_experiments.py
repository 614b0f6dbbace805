"""Plan parsing, sweep execution semantics, and output rendering."""

import math

import pytest

from commoninfo.errors import ConfigError
from commoninfo.experiments import (RateSpec, parse_plan, render_summary,
                                    run_plan, to_csv, to_json)

TINY_PLAN = """
[plan]
name = tiny
seed = 5

[ci]
sources = product
restarts = 2

[simulate]
couplings = product
s = 1.0
rates = 0.0
n = 3 4
seeds = 0
measure = renyi
eps = none
eps_prime = none
samples = 64
"""


def test_rate_spec():
    assert RateSpec("0.25").resolve(1.0) == 0.25
    assert not RateSpec("0.25").needs_ci
    assert RateSpec("0.5C").needs_ci
    assert RateSpec("0.5C").resolve(0.6) == pytest.approx(0.3)
    assert RateSpec("1.2c").resolve(0.5) == pytest.approx(0.6)


def test_parse_plan_structure():
    plan = parse_plan(TINY_PLAN)
    assert plan.name == "tiny" and plan.seed == 5
    assert "product" in plan.sources and "product" in plan.couplings
    assert len(plan.ci_cells) == 1
    assert len(plan.simulate_cells) == 2
    cell = plan.simulate_cells[0]
    assert cell["eps"] is None and cell["eps_prime"] is None
    assert cell["measure"] == "renyi" and cell["samples"] == 64


def test_parse_plan_overrides():
    plan = parse_plan(TINY_PLAN, seed_override=99, out_override="elsewhere")
    assert plan.seed == 99 and plan.out == "elsewhere"


def test_parse_plan_inline_source():
    text = ("[plan]\nname = x\n[source.half]\npi =\n  0.25 0.25\n"
            "  0.25 0.25\n[ci]\nsources = half\nrestarts = 2\n")
    plan = parse_plan(text)
    assert plan.sources["half"].dims == (2, 2)


def test_parse_plan_errors():
    with pytest.raises(ConfigError):
        parse_plan("[ci]\nsources = product\n")        # no [plan]
    with pytest.raises(ConfigError):
        parse_plan("[plan]\nname = x\n[simulate]\ncouplings = product\n"
                   "rates = 0.1\nn = 3\nmeasure = wat\n")
    with pytest.raises(ConfigError):
        parse_plan("[plan]\nname = x\n[ci]\nsources = no_such_fixture\n")


def test_run_plan_values_and_rows():
    result = run_plan(parse_plan(TINY_PLAN))
    assert result.n_errors == 0
    assert len(result.rows) == 3
    ci_row = result.rows[0]
    assert ci_row["kind"] == "ci"
    assert abs(ci_row["value"]) < 1e-6          # product source: zero CI
    for row in result.rows[1:]:
        # rate 0 with one untruncated codeword: P = pi^n exactly
        assert row["kind"] == "simulate"
        assert row["method"] == "exact"
        assert abs(row["value"]) < 1e-9


def test_run_plan_fail_soft():
    text = ("[plan]\nname = x\n[simulate]\ncouplings = product\n"
            "s = 1.0\nrates = 5.0\nn = 10\nmeasure = renyi\n"
            "eps = none\neps_prime = none\n")
    result = run_plan(parse_plan(text))
    assert result.n_errors == 1
    row = result.rows[0]
    assert "ResourceBudgetError" in row["error"]
    assert row["value"] == ""
    # the failure is still reported in the summary
    assert "FAILED" in render_summary(result)


def test_csv_and_json_deterministic():
    a = run_plan(parse_plan(TINY_PLAN))
    b = run_plan(parse_plan(TINY_PLAN))
    assert to_csv(a) == to_csv(b)
    assert to_json(a) == to_json(b)
    header = to_csv(a).splitlines()[0]
    assert header.startswith("cell_id,kind,source")


def test_threaded_run_matches_serial():
    serial = run_plan(parse_plan(TINY_PLAN), threads=1)
    threaded = run_plan(parse_plan(TINY_PLAN), threads=4)
    assert to_csv(serial) == to_csv(threaded)


def test_render_summary_slope():
    text = ("[plan]\nname = decay\nseed = 3\n[simulate]\n"
            "couplings = dsbs01\ns = 1.0\nrates = 1.2C\nn = 4 6\nseeds = 0\n"
            "measure = renyi\neps = none\neps_prime = 0.5\n")
    result = run_plan(parse_plan(text))
    assert result.n_errors == 0
    summary = render_summary(result)
    assert "fitted slope" in summary
