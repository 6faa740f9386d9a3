"""``sskit`` command line.

Exit status: 0 when every check passes, 1 when a check fails, 2 on bad
input (unknown suite, unreadable file, malformed descriptor).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .bits import parse_literal
from .dist import DistributionFormatError, load_distribution
from .equivalence import decide, derive_params, z_encoding
from .equivalence.problem import dyadic_k
from .harness import SUITES, SWEEP_AXES, ConfigError, ExperimentConfig, run_suite, sweep
from .kolmo import KBudget, k_bounded
from .machine import ExecBudget


def _budget_args(p: argparse.ArgumentParser, lmax: int = 24) -> None:
    p.add_argument("--lmax", type=int, default=lmax, help="max program length in bits")
    p.add_argument("--steps", type=int, default=4096, help="step budget T")
    p.add_argument("--cells", type=int, default=256, help="space budget S")
    p.add_argument("--output-bits", type=int, default=1024, help="output cap")


def _instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=None, help="failure target 2^-k")
    p.add_argument("--delta", type=Fraction, default=None,
                   help="failure target, rounded down to a power of two")


def _suite_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dist", help="distribution file (default: uniform of --width)")
    p.add_argument("--width", type=int, default=2)
    _instance_args(p)
    p.add_argument("--exponent", default="2.1", help="N = ceil(m * 2^(exponent*k))")
    p.add_argument("--eps", type=Fraction, default=None,
                   help="target sampling accuracy; sets k = ceil(log2(2/eps))")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=42)
    _budget_args(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--searcher", help="host:<plugin> or machine:bits:<len>:0x<hex>,rho=<int>")
    p.add_argument("--sampler", default="exact", help="exact or point:<bits>")
    p.add_argument("--program", action="append", default=[],
                   help="program for exclusion (bits literal or assembly); repeatable")
    p.add_argument("--c", default="0,1,2,3,4", help="deficiency thresholds, comma separated")
    p.add_argument("--accept", default="parity:1", help="all | parity:<0|1> | set:<y,y,...>")
    p.add_argument("--instances", type=int, default=200, help="random instances for pinsker/rao")
    p.add_argument("--out", help="report path (JSON); printed to stdout when omitted")


def _k_of(args) -> int:
    if args.k is not None and args.delta is not None:
        raise ConfigError("give --k or --delta, not both")
    if args.delta is not None:
        return dyadic_k(args.delta)
    return 1 if args.k is None else args.k


def _config(suite: str, args) -> ExperimentConfig:
    return ExperimentConfig(
        suite=suite, dist=args.dist, width=args.width, k=_k_of(args), exponent=args.exponent,
        trials=args.trials, seed=args.seed, lmax=args.lmax, steps=args.steps, cells=args.cells,
        output_bits=args.output_bits, jobs=args.jobs, searcher=args.searcher, sampler=args.sampler,
        programs=tuple(args.program), c_values=tuple(int(c) for c in args.c.split(",") if c),
        accept=args.accept, eps=args.eps, instances=args.instances)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sskit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for suite in SUITES:
        _suite_args(sub.add_parser(suite, help=f"run the {suite} suite"))

    sw = sub.add_parser("sweep", help="run one suite over a list of parameter values")
    sw.add_argument("--suite", required=True, choices=SUITES)
    sw.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sw.add_argument("--values", required=True, help="comma separated")
    sw.add_argument("--csv", help="summary CSV path (default: <out>.csv or stdout)")
    _suite_args(sw)

    kp = sub.add_parser("k", help="bounded conditional complexity of one string")
    kp.add_argument("--target", required=True, help="bits:<len>:0x<hex> or a 0/1 string")
    kp.add_argument("--cond", help="distribution file, conditioned on as z(D, k)")
    _instance_args(kp)
    _budget_args(kp)
    kp.add_argument("--jobs", type=int, default=1)

    mp = sub.add_parser("member", help="decide membership of one tuple")
    mp.add_argument("--tuple", required=True, help="file with the N strings, whitespace separated")
    mp.add_argument("--dist", required=True)
    mp.add_argument("--exponent", default="2.1")
    _instance_args(mp)
    _budget_args(mp)
    return parser


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _kbudget(args) -> KBudget:
    return KBudget(args.lmax, ExecBudget(args.steps, args.cells, args.output_bits))


def _report_failures(reports) -> int:
    bad = [(r, c) for r in reports for c in r.failing]
    for r, c in bad:
        print(f"{r.config.suite}: {c}", file=sys.stderr)
    return 1 if bad else 0


def _cmd_suite(args) -> int:
    report = run_suite(_config(args.command, args))
    _emit(report.dumps(), args.out)
    return _report_failures([report])


def _cmd_sweep(args) -> int:
    reports, table = sweep(_config(args.suite, args), args.axis, args.values.split(","))
    body = json.dumps([r.to_json() for r in reports], indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(body)
        csv_path = args.csv or str(Path(args.out).with_suffix(".csv"))
        Path(csv_path).write_text(table)
    else:
        sys.stdout.write(body)
        if args.csv:
            Path(args.csv).write_text(table)
        else:
            sys.stderr.write(table)
    return _report_failures(reports)


def _cmd_k(args) -> int:
    y = parse_literal(args.target)
    z = ""
    if args.cond:
        z = z_encoding(load_distribution(args.cond), _k_of(args))
    budget = _kbudget(args)
    res = k_bounded(y, z, budget, args.jobs)
    print(json.dumps(res.to_json(y, budget), sort_keys=True))
    return 0


def _cmd_member(args) -> int:
    D = load_distribution(args.dist)
    Y = tuple(Path(args.tuple).read_text().split())
    params = derive_params(D.width, _k_of(args), args.exponent)
    result = decide(Y, D, params, _kbudget(args))
    print(json.dumps({"params": params.to_json(), **result.to_json()}, sort_keys=True))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"sweep": _cmd_sweep, "k": _cmd_k, "member": _cmd_member}.get(args.command, _cmd_suite)
    try:
        return handler(args)
    except (ConfigError, DistributionFormatError, OSError, ValueError) as exc:
        print(f"sskit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
