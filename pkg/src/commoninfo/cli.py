"""Command-line entry point.

Subcommands: ``ci`` (common information of a source), ``exponent`` (F(R) for
one or more rates), ``simulate`` (synthesis-code estimates on a coupling),
``verify`` (the acceptance suite), and ``sweep`` (run a plan file).

Exit codes: 0 on success, 2 for configuration errors, 3 when some cells
failed (fail-soft sweeps) or acceptance checks did not pass.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import CommonInfoError, ConfigError
from .probability import load_joint_text
from . import experiments
from . import fixtures

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CELL_FAILURES = 3


def _source_section(label: str) -> str:
    """Plan snippet resolving ``label`` as a named fixture or a pmf text file."""
    if label in fixtures.NAMED_SOURCES:
        return f"[source.{label}]\nfixture = {label}\n"
    if os.path.exists(label):
        with open(label) as fh:
            text = fh.read()
        body = "\n".join("  " + line for line in text.strip().splitlines())
        load_joint_text(text)            # validate early
        name = os.path.splitext(os.path.basename(label))[0]
        return f"[source.{name}]\npi =\n{body}\n"
    raise ConfigError(f"unknown source {label!r}: not a fixture "
                      f"({sorted(fixtures.NAMED_SOURCES)}) or a readable file")


def _source_name(label: str) -> str:
    if label in fixtures.NAMED_SOURCES:
        return label
    return os.path.splitext(os.path.basename(label))[0]


def _emit(result, out: str | None):
    text = experiments.render_summary(result)
    sys.stdout.write(text)
    if out:
        os.makedirs(out, exist_ok=True)
        base = os.path.join(out, result.plan_name)
        with open(base + ".csv", "w") as fh:
            fh.write(experiments.to_csv(result))
        with open(base + ".json", "w") as fh:
            fh.write(experiments.to_json(result))
        with open(base + ".txt", "w") as fh:
            fh.write(text)
        sys.stdout.write(f"wrote {base}.csv / .json / .txt\n")
    return EXIT_CELL_FAILURES if result.n_errors else EXIT_OK


def _cmd_ci(args) -> int:
    plan_text = (f"[plan]\nname = ci\nseed = {args.seed}\n"
                 + _source_section(args.source)
                 + f"[ci]\nsources = {_source_name(args.source)}\n"
                 + f"restarts = {args.restarts}\n")
    plan = experiments.parse_plan(plan_text)
    return _emit(experiments.run_plan(plan, threads=args.threads), args.out)


def _cmd_exponent(args) -> int:
    rates = " ".join(args.rate)
    plan_text = (f"[plan]\nname = exponent\nseed = {args.seed}\n"
                 + _source_section(args.source)
                 + f"[exponent]\nsources = {_source_name(args.source)}\n"
                 + f"rates = {rates}\n")
    plan = experiments.parse_plan(plan_text)
    return _emit(experiments.run_plan(plan, threads=args.threads), args.out)


def _cmd_simulate(args) -> int:
    if args.coupling not in fixtures.NAMED_COUPLINGS:
        raise ConfigError(f"unknown coupling {args.coupling!r}; known: "
                          f"{sorted(fixtures.NAMED_COUPLINGS)}")
    plan_text = (f"[plan]\nname = simulate\nseed = {args.seed}\n"
                 f"[coupling.{args.coupling}]\nfixture = {args.coupling}\n"
                 f"[simulate]\ncouplings = {args.coupling}\n"
                 f"s = {args.s}\nrates = {' '.join(args.rate)}\n"
                 f"n = {' '.join(str(n) for n in args.n)}\n"
                 f"seeds = {' '.join(str(s) for s in args.seeds)}\n"
                 f"measure = {' '.join(args.measure)}\n"
                 f"eps = {args.eps}\neps_prime = {args.eps_prime}\n"
                 f"samples = {args.samples}\n")
    plan = experiments.parse_plan(plan_text)
    return _emit(experiments.run_plan(plan, threads=args.threads), args.out)


def _cmd_verify(args) -> int:
    from . import acceptance
    reports = acceptance.run_all(only=args.only)
    for rep in reports:
        sys.stdout.write(rep.line() + "\n")
    failed = [r for r in reports if not r.passed]
    sys.stdout.write(f"{len(reports) - len(failed)}/{len(reports)} "
                     f"criteria passed\n")
    return EXIT_CELL_FAILURES if failed else EXIT_OK


def _cmd_sweep(args) -> int:
    plan = experiments.load_plan(args.plan, seed_override=args.seed,
                                 out_override=args.out)
    result = experiments.run_plan(plan, threads=args.threads)
    return _emit(result, plan.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commoninfo",
        description="Finite-alphabet common information workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", default=None,
                       help="directory for CSV/JSON/summary output")

    p = sub.add_parser("ci", help="Wyner common information of a source")
    p.add_argument("source", help="fixture name or pmf text file")
    p.add_argument("--restarts", type=int, default=16)
    common(p)
    p.set_defaults(func=_cmd_ci)

    p = sub.add_parser("exponent", help="strong-converse exponent F(R)")
    p.add_argument("source")
    p.add_argument("--rate", nargs="+", required=True,
                   help="absolute nats or multiples like 0.5C")
    common(p)
    p.set_defaults(func=_cmd_exponent)

    p = sub.add_parser("simulate", help="synthesis-code estimates")
    p.add_argument("coupling", help="named coupling fixture")
    p.add_argument("--rate", nargs="+", required=True)
    p.add_argument("--n", nargs="+", type=int, required=True)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--seeds", nargs="+", type=int, default=[0])
    p.add_argument("--measure", nargs="+", default=["tv"],
                   choices=["tv", "renyi"])
    p.add_argument("--eps", default="1.0", help="eps or 'none'")
    p.add_argument("--eps-prime", dest="eps_prime", default="0.5")
    p.add_argument("--samples", type=int, default=4096)
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--only", nargs="+", type=int, default=None,
                   help="criterion numbers to run (default: all)")
    common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sweep", help="run a plan file")
    p.add_argument("plan")
    common(p)
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except CommonInfoError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CELL_FAILURES


if __name__ == "__main__":
    sys.exit(main())
