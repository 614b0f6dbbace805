"""Probability primitives: construction, marginals, information quantities,
sequence types, and text serialization."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commoninfo.errors import ConfigError
from commoninfo.probability import (FinitePmf, JointPmf, MarkovCoupling,
                                    SequenceType, copy_coupling, dump_text,
                                    induced_joint, load_joint_text,
                                    load_pmf_text, log_product_mass,
                                    mutual_information)
from commoninfo import fixtures


def random_joint(rng, nx, ny):
    m = rng.dirichlet(np.ones(nx * ny)).reshape(nx, ny)
    return JointPmf(m / m.sum())


# ---------------------------------------------------------------------------
# construction and validation
# ---------------------------------------------------------------------------

def test_pmf_rejects_bad_mass():
    with pytest.raises(ConfigError):
        FinitePmf([0.5, 0.6])                      # not normalized
    with pytest.raises(ConfigError):
        FinitePmf([1.2, -0.2])                     # negative
    with pytest.raises(ConfigError):
        FinitePmf([np.nan, 1.0])                   # non-finite
    with pytest.raises(ConfigError):
        JointPmf(np.ones((2, 2)))                  # sums to 4


def test_pmf_is_immutable():
    p = FinitePmf([0.25, 0.75])
    with pytest.raises(ValueError):
        p.mass[0] = 1.0


def test_point_mass_and_uniform():
    p = FinitePmf.point_mass(1, 3)
    assert p(1) == 1.0 and p(0) == 0.0
    assert p.entropy() == 0.0
    u = FinitePmf.uniform(4)
    assert u.entropy() == pytest.approx(math.log(4), abs=1e-14)
    assert list(p.support()) == [1]


# ---------------------------------------------------------------------------
# marginals and conditionals
# ---------------------------------------------------------------------------

def test_marginal_round_trip():
    rng = np.random.default_rng(0)
    j = random_joint(rng, 3, 4)
    px = j.marginal(0)
    cond = j.conditional(target_axis=1, given_axis=0)   # (x, y) rows
    rebuilt = px.mass[:, None] * cond
    assert np.allclose(rebuilt, j.mass, atol=1e-14)


def test_marginal_axis_order_preserved():
    rng = np.random.default_rng(1)
    m = rng.dirichlet(np.ones(24)).reshape(2, 3, 4)
    j = JointPmf(m)
    kept = j.marginal((0, 2))
    assert kept.dims == (2, 4)
    assert np.allclose(kept.mass, m.sum(axis=1))
    # a reversed request transposes the result accordingly
    rev = j.marginal((2, 0))
    assert rev.dims == (4, 2)
    assert np.allclose(rev.mass, kept.mass.T)


def test_conditional_zero_row_uniform():
    j = JointPmf(np.array([[0.5, 0.5], [0.0, 0.0]]))
    cond = j.conditional(target_axis=1, given_axis=0)
    assert np.allclose(cond[1], [0.5, 0.5])
    assert np.allclose(cond.sum(axis=1), 1.0)


# ---------------------------------------------------------------------------
# information quantities
# ---------------------------------------------------------------------------

def test_mutual_information_entropy_decomposition():
    # oracle: I(X;Y) = H(X) + H(Y) - H(XY)
    rng = np.random.default_rng(2)
    for _ in range(20):
        j = random_joint(rng, 3, 3)
        oracle = (j.marginal(0).entropy() + j.marginal(1).entropy()
                  - j.entropy())
        assert mutual_information(j) == pytest.approx(oracle, abs=1e-12)


def test_mutual_information_product_is_zero():
    p = np.outer([0.3, 0.7], [0.6, 0.4])
    assert mutual_information(JointPmf(p)) == pytest.approx(0.0, abs=1e-15)


def test_copy_coupling_mi_equals_joint_entropy(dsbs_pi):
    c = copy_coupling(dsbs_pi)
    joint = induced_joint(c)
    assert np.allclose(joint.marginal((1, 2)).mass, dsbs_pi.mass, atol=1e-14)
    w_xy = joint.mass.reshape(c.nw, c.nx * c.ny)
    assert mutual_information(JointPmf(w_xy)) == pytest.approx(
        dsbs_pi.entropy(), abs=1e-12)


def test_induced_joint_matches_manual_product():
    c = fixtures.dsbs_optimal_coupling(0.1)
    j = induced_joint(c)
    manual = np.einsum("w,wx,wy->wxy", c.q_w.mass, c.q_x_given_w,
                       c.q_y_given_w)
    assert np.allclose(j.mass, manual / manual.sum(), atol=1e-15)
    # and the coupling really reproduces the DSBS source
    assert np.allclose(c.xy_marginal().mass, fixtures.dsbs(0.1).mass,
                       atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 10.0), min_size=4, max_size=4))
def test_mutual_information_nonnegative(weights):
    m = np.array(weights).reshape(2, 2)
    j = JointPmf(m / m.sum())
    mi = mutual_information(j)
    assert 0.0 <= mi <= min(j.marginal(0).entropy(), j.marginal(1).entropy()) + 1e-12


def test_log_product_mass():
    p = FinitePmf([0.25, 0.75])
    seq = [0, 1, 1, 0]
    assert log_product_mass(p, seq) == pytest.approx(
        2 * math.log(0.25) + 2 * math.log(0.75), abs=1e-14)
    assert log_product_mass(p, []) == 0.0
    assert log_product_mass(FinitePmf([1.0, 0.0]), [0, 1]) == -math.inf
    with pytest.raises(ConfigError):
        log_product_mass(p, [0, 2])


# ---------------------------------------------------------------------------
# sequence types
# ---------------------------------------------------------------------------

def test_sequence_type_of_sequence():
    t = SequenceType.of_sequence([0, 1, 1, 2, 1], 4)
    assert t.n == 5
    assert list(t.counts) == [1, 3, 1, 0]
    assert np.allclose(t.empirical().mass, [0.2, 0.6, 0.2, 0.0])


def test_sequence_type_rejects_bad_counts():
    with pytest.raises(ConfigError):
        SequenceType(3, [1, 1, 2])
    with pytest.raises(ConfigError):
        SequenceType(2, [3, -1])


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_pmf_text_round_trip():
    p = FinitePmf([0.125, 0.375, 0.5])
    assert np.allclose(load_pmf_text(dump_text(p)).mass, p.mass, atol=0)


def test_joint_text_round_trip(dsbs_pi):
    again = load_joint_text(dump_text(dsbs_pi))
    assert np.allclose(again.mass, dsbs_pi.mass, atol=0)


def test_load_ignores_comments_and_blank_lines():
    text = "# a joint\n\n0.4 0.1\n# middle\n0.1 0.4\n"
    j = load_joint_text(text)
    assert j.dims == (2, 2)
    assert j.mass[1, 1] == 0.4


def test_load_rejects_ragged_and_unnormalized():
    with pytest.raises(ConfigError):
        load_joint_text("0.5 0.5\n0.3\n")
    with pytest.raises(ConfigError):
        load_pmf_text("0.5 0.6\n")


def test_markov_coupling_validates_rows():
    q_w = FinitePmf([0.5, 0.5])
    good = np.array([[0.9, 0.1], [0.1, 0.9]])
    bad = np.array([[0.9, 0.2], [0.1, 0.9]])
    MarkovCoupling(q_w, good, good)
    with pytest.raises(ConfigError):
        MarkovCoupling(q_w, bad, good)
