"""Acceptance criteria, one test each, with one PASS/FAIL line per criterion.

Run under pytest (lines are printed in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import sys
import time
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import mpmath
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from sskit.checks import SLACK, leq, parse_value  # noqa: E402
from sskit.dist import FiniteDistribution, load_distribution  # noqa: E402
from sskit.equivalence import derive_params, k_for_accuracy  # noqa: E402
from sskit.harness import ExperimentConfig, run_suite  # noqa: E402
from sskit.kolmo import KBudget, shannon_fano, universal_prior  # noqa: E402
from sskit.machine import programs  # noqa: E402

F = Fraction
DATA = Path(__file__).parent / "data"
RESULTS: list[str] = []


def _record(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    RESULTS.append(line)
    print(line)


def _dist(name: str) -> str:
    return str(DATA / f"{name}.dist")


# jobs=1 runs are shared between criteria 5-9 and the reproducibility check
CONFIGS = {
    "stor": dict(suite="lemma-stor", dist=_dist("uniform2"), k=1, trials=10_000, seed=42),
    "rtos": dict(suite="lemma-rtos", dist=_dist("uniform2"), k=1),
    "exclusion": dict(suite="exclusion", dist=_dist("uniform2"), k=1),
    "otherdir": dict(suite="otherdir", width=2, k=1, lmax=30, accept="parity:1"),
    "e2e": dict(suite="end-to-end", dist=_dist("uniform2"), k=1, trials=10_000, seed=42),
}


@lru_cache(maxsize=None)
def report(key: str, jobs: int = 1):
    start = time.perf_counter()
    rep = run_suite(ExperimentConfig(**CONFIGS[key], jobs=jobs))
    return rep, time.perf_counter() - start


def _records(rep, prefix: str):
    return [r for r in rep.records if r.name.startswith(prefix)]


# ---------------------------------------------------------------- criteria


def criterion_1():
    start = time.perf_counter()
    words = sorted(p.bits for p in programs(20))
    prefix_pairs = sum(b.startswith(a) for a, b in zip(words, words[1:]))
    rep = run_suite(ExperimentConfig("kraft", lmax=20))
    total = rep.records[0].lhs
    seconds = time.perf_counter() - start
    ok = prefix_pairs == 0 and total <= 1 and rep.passed and seconds <= 60
    return ok, f"{len(words)} programs, prefix pairs={prefix_pairs}, kraft={total}, {seconds:.1f}s"


def criterion_2():
    worst = []
    ok = True
    for name in ("uniform2", "uniform4", "rational2"):
        rep = run_suite(ExperimentConfig("deficiency", dist=_dist(name), c_values=(0, 1, 2, 3, 4)))
        for c in range(5):
            mass = rep.summary[f"violating_mass[c={c}]"]
            ok &= mass <= F(1, 2**c)
        ok &= rep.passed and all(r.slack == 0 for r in rep.records)
        worst.append(f"{name}:{max(rep.summary.values())}")
    return ok, "max violating mass " + ", ".join(worst)


def criterion_3():
    corpus = [load_distribution(_dist(n)) for n in ("uniform2", "uniform4", "rational2", "skew1")]
    corpus.append(universal_prior(2, budget=KBudget(30)).distribution())
    corpus.append(FiniteDistribution(3, {"000": F(1, 3), "011": F(1, 5), "101": F(7, 15)}))
    ok = True
    for D in corpus:
        book = shannon_fano(D)
        ok &= all(len(book.encode(y)) == oracles.ceil_log2_inv(p) for y, p in D.items())
        ok &= oracles.is_prefix_free(book.codes.values())
        ok &= all(book.decode(book.encode(y)) == y for y in D.support)
    return ok, f"{len(corpus)} distributions"


def criterion_4():
    pin = run_suite(ExperimentConfig("pinsker", instances=200, seed=42))
    rao = run_suite(ExperimentConfig("rao", instances=200, seed=42))
    ineq = _records(rao, "rao[")
    eq = _records(rao, "rao.equality")
    ok = (len(pin.records) == 200 and len(ineq) == 200 and len(eq) == 20
          and all(r.slack == SLACK for r in pin.records + ineq)
          and all(r.lhs == 0 and r.slack == 0 for r in eq)
          and all(r.detail["width"] <= 3 for r in pin.records + ineq)
          and all(r.detail["arity"] <= 3 for r in ineq)
          and pin.passed and rao.passed)
    return ok, f"pinsker {len(pin.records) - len(pin.failing)}/200, rao {len(ineq)}+{len(eq)} exact"


def criterion_5():
    rep, seconds = report("stor")
    p = rep.summary["params"]
    ok = (p["N"] == 9 and p["beta"] == 2 and rep.summary["bound"] == F(1, 4)
          and rep.passed and seconds <= 300)
    return ok, (f"failure_rate={rep.summary['failure_rate']}, "
                f"ci_high={mpmath.nstr(rep.summary['ci_high'], 6)} <= 1/4, {seconds:.1f}s")


def criterion_6():
    rep, seconds = report("rtos")
    s = rep.summary
    steps = {r.name.split("[")[0] for r in rep.records}
    need = {f"rtos.{i}" for i in range(1, 9)}
    params = derive_params(2, 1)
    # measured TV <= delta + sqrt((2 beta + 2 maxK)/N), the O(1) term taken as 0
    with mpmath.workprec(128):
        stated = params.delta + mpmath.sqrt(mpmath.mpf(2 * params.beta + 2 * s["max_k"]) / params.N)
    within = leq(parse_value(s["measured_tv"]), stated, SLACK)
    ok = (s["rho"] == 18 and steps >= need and rep.passed and within
          and all(r.slack == SLACK for r in rep.records if r.name != "rtos.hypothesis")
          and seconds <= 600)
    return ok, (f"measured_tv={s['measured_tv']}, max_k={s['max_k']}, "
                f"bound={mpmath.nstr(stated, 6)}, {seconds:.1f}s")


def criterion_7():
    rep, _ = report("exclusion")
    zeros, period2 = rep.summary["zeros"], rep.summary["period2"]
    ok = zeros["excluded"] and period2["excluded"]
    return ok, (f"zeros excluded={zeros['excluded']} (|p|={zeros['program_length']}), "
                f"period2 excluded={period2['excluded']} (|p|={period2['program_length']}), "
                f"threshold=16")


def criterion_8():
    rep, seconds = report("otherdir")
    s = rep.summary
    inside = _records(rep, "otherdir.i")[0]
    ii = _records(rep, "otherdir.ii")[0]
    ok = inside.lhs == 0 and ii.passed and rep.passed and seconds <= 600
    return ok, (f"c={s['c']}, g_B={s['g_B']}, measured_tv={s['measured_tv']} "
                f"<= {s['tv_bound']}, {seconds:.1f}s")


def criterion_9():
    rep, _ = report("e2e")
    s = rep.summary
    eps = s["eps"]
    ok = (k_for_accuracy(eps) == 1 and eps == 2 * derive_params(2, 1).delta and rep.passed
          and _records(rep, "e2e.sample_tv")[0].slack == SLACK)
    return ok, f"failure_rate={s['failure_rate']}, measured_tv={s['measured_tv']} <= eps={eps}"


def criterion_10():
    diffs = []
    for key in CONFIGS:
        base = report(key, 1)[0].dumps(timing=False)
        for jobs in (2, 3):
            if report(key, jobs)[0].dumps(timing=False) != base:
                diffs.append(f"{key}@{jobs}")
    return not diffs, "identical for jobs 1, 2, 3" if not diffs else f"differs: {', '.join(diffs)}"


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 11)}

# At m=2, k=1 the threshold is 16 bits and every program under 16 bits has at
# most two opcodes, so no such program prints an 18-bit tuple and neither
# emitter can be excluded.  The check runs unchanged and is expected to fail.
KNOWN_FAILING = {7: "no program under 16 bits prints 18 bits; both emitters are admitted"}


def _params():
    for n in CRITERIA:
        marks = [pytest.mark.xfail(strict=True, reason=KNOWN_FAILING[n])] if n in KNOWN_FAILING else []
        yield pytest.param(n, id=f"criterion_{n}", marks=marks)


@pytest.mark.parametrize("n", list(_params()))
def test_criterion(n):
    ok, detail = CRITERIA[n]()
    _record(n, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for n, fn in CRITERIA.items():
        ok, detail = fn()
        _record(n, ok, detail)
        failed += not ok
    sys.exit(1 if failed else 0)
