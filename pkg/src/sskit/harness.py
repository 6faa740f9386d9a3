"""Experiment configuration, verification suites, reports and sweeps."""

from __future__ import annotations

import csv
import io
import json
import random
import time
from collections.abc import Callable, Iterable
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from . import __version__
from .bits import BitString, parse_literal
from .checks import SLACK, Check, format_value
from .dist import (FiniteDistribution, TupleDistribution, load_distribution, pinsker_check,
                   rao_check, rao_exact_relation)
from .equivalence import (DEFAULT_EXPONENT, ExactSampler, FixedSampler, MachineSearcher,
                          build_otherdir, derive_params, k_for_accuracy, parse_searcher,
                          short_program_exclusion, uniform_searcher, verify_end_to_end,
                          verify_otherdir, verify_rtos_chain, verify_stor, z_encoding)
from .equivalence.problem import as_exponent
from .kolmo import KBudget, code_length, deficiency_check, kraft_sum, literal_ops, shannon_fano
from .machine import ISA_HASH, ExecBudget, Program, kernel

SUITES = ("kraft", "deficiency", "shannon-fano", "pinsker", "rao", "lemma-stor", "lemma-rtos",
          "exclusion", "otherdir", "end-to-end")
SWEEP_AXES = ("k", "m", "L_max", "T", "trials", "exponent")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    suite: str
    dist: str | None = None
    width: int = 2
    k: int = 1
    exponent: Fraction = DEFAULT_EXPONENT
    trials: int = 10_000
    seed: int = 42
    lmax: int = 24
    steps: int = 4096
    cells: int = 256
    output_bits: int = 1024
    jobs: int = 1
    searcher: str | None = None
    sampler: str = "exact"
    programs: tuple[str, ...] = ()
    c_values: tuple[int, ...] = (0, 1, 2, 3, 4)
    accept: str = "parity:1"
    eps: Fraction | None = None
    instances: int = 200

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        for name in ("trials", "lmax", "steps", "cells", "output_bits", "jobs", "instances"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.k < 0 or self.width < 0:
            raise ConfigError("k and width must be non-negative")
        object.__setattr__(self, "exponent", as_exponent(self.exponent))
        if self.eps is not None:
            object.__setattr__(self, "eps", Fraction(self.eps))

    @property
    def exec_budget(self) -> ExecBudget:
        return ExecBudget(self.steps, self.cells, self.output_bits)

    @property
    def kbudget(self) -> KBudget:
        return KBudget(self.lmax, self.exec_budget)

    def distribution(self) -> FiniteDistribution:
        if self.dist is None:
            return FiniteDistribution.uniform(self.width)
        return load_distribution(self.dist)

    def to_json(self) -> dict:
        """Config echo.  ``jobs`` is left out: it must not change any result."""
        d = asdict(self)
        del d["jobs"]
        return format_value(d)


@dataclass
class Report:
    config: ExperimentConfig
    records: list[Check]
    summary: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def failing(self) -> list[Check]:
        return [r for r in self.records if not r.passed]

    def to_json(self, timing: bool = True) -> dict:
        out = {
            "suite": self.config.suite,
            "config": self.config.to_json(),
            "isa_hash": ISA_HASH,
            "version": __version__,
            "records": [r.to_json() for r in self.records],
            "summary": format_value(self.summary),
            "pass": self.passed,
        }
        if timing:
            out["timing"] = {"seconds": round(self.seconds, 3), "jobs": self.config.jobs,
                             "kernel": kernel.IMPLEMENTATION}
        return out

    def dumps(self, timing: bool = True) -> str:
        return json.dumps(self.to_json(timing), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- predicates and corpora


def parse_predicate(text: str) -> Callable[[BitString], bool]:
    """``all``, ``parity:0``/``parity:1`` or ``set:01,10``."""
    kind, _, arg = text.partition(":")
    if kind == "all":
        return lambda y: True
    if kind == "parity" and arg in ("0", "1"):
        want = int(arg)
        return lambda y: y.count("1") % 2 == want
    if kind == "set":
        members = frozenset(arg.split(",")) if arg else frozenset()
        return lambda y: y in members
    raise ConfigError(f"bad predicate {text!r}")


def parse_program(text: str) -> Program:
    """A bits literal, a raw 0/1 string, or assembly such as ``OUT FLIP OUT``."""
    if text.startswith("bits:") or set(text) <= {"0", "1"}:
        return Program.from_literal(text)
    return Program.from_asm(text)


def zeros_emitter(n_bits: int) -> Program:
    return Program(bytes([5] * n_bits))


def period2_emitter(n_bits: int) -> Program:
    """Prints ``0101...`` of length ``n_bits``."""
    return Program(literal_ops(("01" * n_bits)[:n_bits]))


def random_distribution(rng: random.Random, width: int, full_support: bool = False,
                        max_weight: int = 12) -> FiniteDistribution:
    ys = [format(i, f"0{width}b") if width else "" for i in range(2**width)]
    lo = 1 if full_support else 0
    while True:
        w = {y: rng.randint(lo, max_weight) for y in ys}
        if sum(w.values()):
            return FiniteDistribution.from_weights(width, w)


def random_tuple_distribution(rng: random.Random, arity: int, width: int,
                              max_support: int = 12) -> TupleDistribution:
    ys = [format(i, f"0{width}b") if width else "" for i in range(2**width)]
    size = rng.randint(1, max_support)
    pmf: dict = {}
    for _ in range(size):
        Y = tuple(rng.choice(ys) for _ in range(arity))
        pmf[Y] = pmf.get(Y, 0) + rng.randint(1, 9)
    total = sum(pmf.values())
    return TupleDistribution(arity, width, pmf={Y: Fraction(w, total) for Y, w in pmf.items()})


def explicit_product(D: FiniteDistribution, arity: int) -> TupleDistribution:
    pmf = {(): Fraction(1)}
    for _ in range(arity):
        pmf = {Y + (y,): p * q for Y, p in pmf.items() for y, q in D.items()}
    return TupleDistribution(arity, D.width, pmf=pmf)


# ---------------------------------------------------------------- suites


def _suite_kraft(cfg: ExperimentConfig):
    total = kraft_sum(cfg.kbudget, halting_only=False, jobs=cfg.jobs)
    return [Check(f"kraft[L_max={cfg.lmax}]", total, Fraction(1), 0)], {"kraft_sum": total}


def _suite_deficiency(cfg: ExperimentConfig):
    D = cfg.distribution()
    records, summary = [], {}
    for c in cfg.c_values:
        rep = deficiency_check(D, c, "", cfg.kbudget, cfg.jobs)
        records.extend(rep.checks)
        summary[f"violating_mass[c={c}]"] = rep.violating_mass
    return records, summary


def _suite_shannon(cfg: ExperimentConfig):
    D = cfg.distribution()
    book = shannon_fano(D)
    wrong_len = sum(len(book.encode(y)) != code_length(p) for y, p in D.items())
    words = sorted(book.codes.values())
    prefix_hits = sum(b.startswith(a) for a, b in zip(words, words[1:]))
    round_trip = sum(book.decode(book.encode(y)) != y for y in D.support)
    records = [
        Check("shannon.lengths_mismatch", wrong_len, 0, 0),
        Check("shannon.prefix_violations", prefix_hits, 0, 0),
        Check("shannon.round_trip_failures", round_trip, 0, 0),
        Check("shannon.kraft", book.kraft(), Fraction(1), 0),
    ]
    return records, {"codes": dict(book.codes)}


def _suite_pinsker(cfg: ExperimentConfig):
    rng = random.Random(cfg.seed)
    records = []
    for i in range(cfg.instances):
        width = rng.randint(0, 3)
        A = random_distribution(rng, width)
        B = random_distribution(rng, width, full_support=rng.random() < 0.8)
        chk = pinsker_check(A, B, slack=SLACK)
        records.append(Check(f"pinsker[{i}]", chk.lhs, chk.rhs, chk.slack, {"width": width}))
    return records, {"instances": cfg.instances}


def _suite_rao(cfg: ExperimentConfig):
    rng = random.Random(cfg.seed)
    records = []
    for i in range(cfg.instances):
        arity, width = rng.randint(1, 3), rng.randint(1, 3)
        R = random_tuple_distribution(rng, arity, width)
        D = random_distribution(rng, width, full_support=True)
        chk = rao_check(R, D, slack=SLACK)
        records.append(Check(f"rao[{i}]", chk.lhs, chk.rhs, chk.slack,
                             {"arity": arity, "width": width}))
    for i in range(20):
        arity, width = rng.randint(1, 3), rng.randint(1, 2)
        D = random_distribution(rng, width, full_support=True)
        R = explicit_product(random_distribution(rng, width, full_support=True), arity)
        records.append(Check(f"rao.equality[{i}]", abs(rao_exact_relation(R, D)), 0, 0))
    return records, {"instances": cfg.instances, "product_instances": 20}


def _sampler(cfg: ExperimentConfig, D: FiniteDistribution):
    if cfg.sampler == "exact":
        return ExactSampler()
    kind, _, arg = cfg.sampler.partition(":")
    if kind == "point":
        return FixedSampler.against(FiniteDistribution.point(parse_literal(arg)), D)
    raise ConfigError(f"bad sampler {cfg.sampler!r}; use 'exact' or 'point:<bits>'")


def _machine_searcher(cfg: ExperimentConfig, n_bits: int) -> MachineSearcher:
    if cfg.searcher is None:
        return uniform_searcher(n_bits, cfg.exec_budget)
    s = parse_searcher(cfg.searcher, cfg.exec_budget)
    if not isinstance(s, MachineSearcher):
        raise ConfigError("this suite needs a machine searcher")
    return s


def _params(cfg: ExperimentConfig, D: FiniteDistribution):
    k = k_for_accuracy(cfg.eps) if cfg.eps is not None else cfg.k
    return derive_params(D.width, k, cfg.exponent)


def _suite_stor(cfg: ExperimentConfig):
    D = cfg.distribution()
    params = _params(cfg, D)
    rep = verify_stor(D, _sampler(cfg, D), params, cfg.trials, cfg.seed, cfg.kbudget, cfg.jobs)
    lo, hi = rep.ci
    return rep.checks, {"params": params.to_json(), "failure_rate": rep.failure_rate,
                        "ci_low": lo, "ci_high": hi, "bound": rep.bound}


def _suite_rtos(cfg: ExperimentConfig):
    D = cfg.distribution()
    params = _params(cfg, D)
    rep = verify_rtos_chain(_machine_searcher(cfg, params.tuple_bits), D, params, cfg.kbudget,
                            cfg.jobs)
    summary = rep.to_json()
    del summary["checks"]
    return rep.checks, summary


def _suite_exclusion(cfg: ExperimentConfig):
    D = cfg.distribution()
    params = _params(cfg, D)
    if cfg.programs:
        corpus = [(text, parse_program(text)) for text in cfg.programs]
    else:
        corpus = [("zeros", zeros_emitter(params.tuple_bits)),
                  ("period2", period2_emitter(params.tuple_bits))]
    z = z_encoding(D, params.k)
    records, summary = [], {}
    for name, p in corpus:
        rep = short_program_exclusion(p, D, params, cfg.kbudget, z)
        records.append(Check(f"exclusion[{name}].consistent", int(not rep.consistent), 0, 0))
        records.append(Check(f"exclusion[{name}].excluded", int(rep.member), 0, 0,
                             {"program_length": rep.program_length, "applicable": rep.applicable}))
        summary[name] = rep.to_json()
    return records, summary


def _suite_otherdir(cfg: ExperimentConfig):
    accept = parse_predicate(cfg.accept)
    D_x = build_otherdir(accept, cfg.width, "", cfg.kbudget, cfg.jobs)
    if cfg.searcher is None:
        # deterministic single-point searcher: the literal program of the first accepted string
        searcher = MachineSearcher(Program(literal_ops(D_x.support[0])), 0, cfg.exec_budget)
    else:
        searcher = _machine_searcher(cfg, cfg.width)
    rep = verify_otherdir(accept, D_x, searcher, cfg.k, "", cfg.kbudget, cfg.jobs)
    summary = rep.to_json()
    del summary["checks"]
    summary["D_x"] = dict(D_x.items())
    summary["searcher"] = searcher.descriptor()
    return rep.checks, summary


def _suite_end_to_end(cfg: ExperimentConfig):
    D = cfg.distribution()
    params = _params(cfg, D)
    searcher = _machine_searcher(cfg, params.tuple_bits)
    rep = verify_end_to_end(D, _sampler(cfg, D), searcher, params, cfg.trials, cfg.seed,
                            cfg.kbudget, cfg.jobs)
    return rep.checks, {"params": params.to_json(), "eps": rep.eps, "measured_tv": rep.measured_tv,
                        "failure_rate": rep.stor.failure_rate, "searcher": searcher.descriptor()}


_DISPATCH = {
    "kraft": _suite_kraft,
    "deficiency": _suite_deficiency,
    "shannon-fano": _suite_shannon,
    "pinsker": _suite_pinsker,
    "rao": _suite_rao,
    "lemma-stor": _suite_stor,
    "lemma-rtos": _suite_rtos,
    "exclusion": _suite_exclusion,
    "otherdir": _suite_otherdir,
    "end-to-end": _suite_end_to_end,
}


def run_suite(cfg: ExperimentConfig) -> Report:
    start = time.perf_counter()
    records, summary = _DISPATCH[cfg.suite](cfg)
    return Report(cfg, list(records), summary, time.perf_counter() - start)


def write_report(report: Report, path: str | Path) -> None:
    Path(path).write_text(report.dumps())


# ---------------------------------------------------------------- sweeps


_AXIS_FIELD = {"k": "k", "m": "width", "L_max": "lmax", "T": "steps", "trials": "trials",
               "exponent": "exponent"}


def _axis_value(axis: str, text):
    if axis == "exponent":
        return as_exponent(text)
    return int(text)


def sweep(template: ExperimentConfig, axis: str, values: Iterable) -> tuple[list[Report], str]:
    """One report per value plus a CSV summary (header row first)."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"axis must be one of {', '.join(SWEEP_AXES)}")
    reports = []
    for v in values:
        cfg = replace(template, **{_AXIS_FIELD[axis]: _axis_value(axis, v)})
        reports.append(run_suite(cfg))
    return reports, summary_csv(axis, reports)


def _scalar(v) -> bool:
    return isinstance(v, (int, str, Fraction)) or v is None or hasattr(v, "_mpf_")


def summary_csv(axis: str, reports: list[Report]) -> str:
    keys = sorted({k for r in reports for k, v in r.summary.items() if _scalar(v)})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([axis, "suite", "pass", "records", "failed", *keys])
    for r in reports:
        value = format_value(getattr(r.config, _AXIS_FIELD[axis]))
        row = [value, r.config.suite, int(r.passed), len(r.records), len(r.failing)]
        row += [format_value(r.summary.get(k, "")) for k in keys]
        w.writerow(row)
    return buf.getvalue()


__all__ = ["ConfigError", "ExperimentConfig", "Report", "SUITES", "SWEEP_AXES", "parse_predicate",
           "parse_program", "period2_emitter", "run_suite", "summary_csv", "sweep",
           "write_report", "zeros_emitter"]
