"""Verifiers: Monte Carlo for sampling-to-search, exact seed enumeration for the rest.

Every verifier returns a report whose ``checks`` are :class:`~sskit.checks.Check`
records, so a pass/fail verdict can be recomputed from the serialized values.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist

import mpmath

from ..bits import BitString, SeededBits
from ..checks import DEFAULT_PREC, SLACK, Check, format_value
from ..dist import (ConditioningError, DimensionError, FiniteDistribution, TupleDistribution,
                    average_marginal, exact_sum, kl_divergence, marginals, pinsker_check, power,
                    rao_check, tv_distance)
from ..kolmo import DEFAULT_KBUDGET, KBudget, k_bounded, literal_length, universal_prior
from ..machine import DEFAULT_BUDGET, ExecBudget, Program, Status, kernel
from .oracles import MachineSearcher, Sampler
from .problem import ReductionParams, decide, split_tuple, z_encoding
from .reductions import sample_to_search

FAIL = None  # the "no output" outcome of an aborted or malformed run

_Z99 = NormalDist().inv_cdf(0.995)


def wilson_interval(successes: int, trials: int, z: float = _Z99,
                    prec: int = DEFAULT_PREC) -> tuple[mpmath.mpf, mpmath.mpf]:
    """Wilson score interval for a binomial proportion (99% by default)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    with mpmath.workprec(prec):
        n = mpmath.mpf(trials)
        ph = mpmath.mpf(successes) / n
        z = mpmath.mpf(z)
        denom = 1 + z**2 / n
        centre = (ph + z**2 / (2 * n)) / denom
        half = z * mpmath.sqrt(ph * (1 - ph) / n + z**2 / (4 * n**2)) / denom
        return max(mpmath.mpf(0), centre - half), min(mpmath.mpf(1), centre + half)


def _log2(x: Fraction):
    return mpmath.log(mpmath.mpf(x.numerator), 2) - mpmath.log(mpmath.mpf(x.denominator), 2)


def _chunks(lo: int, hi: int, parts: int) -> list[tuple[int, int]]:
    step = max(1, -(-(hi - lo) // parts))
    return [(a, min(a + step, hi)) for a in range(lo, hi, step)]


# ---------------------------------------------------------------- sampling -> search


@dataclass
class StorReport:
    params: ReductionParams
    trials: int
    failures: int
    declared_accuracy: Fraction
    seed: int

    @property
    def failure_rate(self) -> Fraction:
        return Fraction(self.failures, self.trials)

    @property
    def ci(self):
        return wilson_interval(self.failures, self.trials)

    @property
    def bound(self) -> Fraction:
        return self.declared_accuracy * self.params.N + Fraction(1, 2**self.params.beta)

    @property
    def checks(self) -> list[Check]:
        lo, hi = self.ci
        return [Check("stor.failure_ci_upper", hi, self.bound, 0,
                      {"failures": self.failures, "trials": self.trials,
                       "failure_rate": self.failure_rate, "ci_low": lo,
                       "declared_accuracy": self.declared_accuracy})]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"params": self.params.to_json(), "seed": self.seed,
                "checks": [c.to_json() for c in self.checks]}


def _stor_trials(args) -> int:
    D, sampler, params, budget, z, seed, lo, hi = args
    failures = 0
    for t in range(lo, hi):
        Y = sample_to_search(sampler, D, params, SeededBits(seed, t))
        if not decide(Y, D, params, budget, z).member:
            failures += 1
    return failures


def verify_stor(D: FiniteDistribution, sampler: Sampler, params: ReductionParams, trials: int,
                seed: int, budget: KBudget = DEFAULT_KBUDGET, jobs: int = 1,
                z: BitString | None = None) -> StorReport:
    """Failure frequency of ``sample_to_search``; trial ``t`` draws from stream ``(seed, t)``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if z is None:
        z = z_encoding(D, params.k)
    tasks = [(D, sampler, params, budget, z, seed, lo, hi)
             for lo, hi in _chunks(0, trials, 4 * jobs if jobs > 1 else 1)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            failures = sum(pool.map(_stor_trials, tasks))
    else:
        failures = sum(map(_stor_trials, tasks))
    return StorReport(params, trials, failures, sampler.declared_accuracy, seed)


# ---------------------------------------------------------------- seed enumeration


@dataclass(frozen=True)
class SeedHistogram:
    """Outputs of one program over all ``2^rho`` random tapes."""

    rho: int
    halted: Mapping[BitString, int]
    aborts: Mapping[str, int]

    @property
    def total(self) -> int:
        return 2**self.rho

    def to_json(self) -> dict:
        return {"rho": self.rho, "distinct_outputs": len(self.halted), "aborts": dict(self.aborts)}


def _histogram_part(args):
    ops, z, rho, lo, hi, budget_args = args
    return kernel.seed_histogram(ops, z, rho, lo, hi, *budget_args)


def machine_output_distribution(program: Program, z: BitString, rho: int,
                                budget: ExecBudget = DEFAULT_BUDGET, jobs: int = 1) -> SeedHistogram:
    """Run ``program`` once per seed; counts are merged by exact addition."""
    zb = z.encode("ascii")
    tasks = [(program.ops, zb, rho, lo, hi, budget.as_args())
             for lo, hi in _chunks(0, 2**rho, 4 * jobs if jobs > 1 else 1)]
    if jobs > 1 and rho >= 12:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_histogram_part, tasks))
    else:
        parts = [_histogram_part(t) for t in tasks]
    halted: dict[BitString, int] = {}
    aborts: dict[str, int] = {}
    for h, a in parts:
        for out, n in h.items():
            key = out.decode("ascii")
            halted[key] = halted.get(key, 0) + n
        for status, n in a.items():
            name = Status(status).name
            aborts[name] = aborts.get(name, 0) + n
    return SeedHistogram(rho, dict(sorted(halted.items())), dict(sorted(aborts.items())))


def _tv_with_failure(C: Mapping, D: FiniteDistribution) -> Fraction:
    """TV between a distribution that may carry a FAIL outcome and ``D``."""
    return exact_sum(d for y, p in C.items() if (d := p - (0 if y is FAIL else D.prob(y))) > 0)


def _tv_maps(A: Mapping, B: Mapping) -> Fraction:
    return exact_sum(d for y, p in A.items() if (d := p - B.get(y, 0)) > 0)


def search_to_sample_distribution(searcher: MachineSearcher, D: FiniteDistribution,
                                  params: ReductionParams, jobs: int = 1) -> dict:
    """Exact output law of ``search_to_sample`` (FAIL for aborted or malformed runs)."""
    hist = machine_output_distribution(searcher.program, z_encoding(D, params.k), searcher.rho,
                                       searcher.budget, jobs)
    total = hist.total
    acc: dict = {}
    fail = sum(hist.aborts.values())
    for out, n in hist.halted.items():
        if len(out) != params.tuple_bits:
            fail += n
            continue
        for y in split_tuple(out, params.N, params.m):
            acc[y] = acc.get(y, 0) + n
    C = {y: Fraction(n, total * params.N) for y, n in sorted(acc.items())}
    if fail:
        C[FAIL] = Fraction(fail, total)
    return C


# ---------------------------------------------------------------- search -> sampling chain


@dataclass
class RtosChainReport:
    params: ReductionParams
    rho: int
    success_mass: Fraction
    malformed_mass: Fraction
    measured_tv: Fraction
    kappa: mpmath.mpf
    max_k: int
    max_log_ratio: mpmath.mpf
    checks: list[Check] = field(default_factory=list)

    @property
    def failure_mass(self) -> Fraction:
        return 1 - self.success_mass

    @property
    def hypothesis_holds(self) -> bool:
        return self.failure_mass <= self.params.delta

    @property
    def realized_q(self):
        """Constant ``Q`` with ``sqrt(2 kappa / N) = Q sqrt(beta / N)``."""
        with mpmath.workprec(DEFAULT_PREC):
            return mpmath.sqrt(2 * self.kappa / self.params.beta)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"params": self.params.to_json(), "rho": self.rho,
                "success_mass": format_value(self.success_mass),
                "malformed_mass": format_value(self.malformed_mass),
                "hypothesis_holds": self.hypothesis_holds,
                "measured_tv": format_value(self.measured_tv),
                "kappa": format_value(self.kappa), "max_k": self.max_k,
                "max_log_ratio": format_value(self.max_log_ratio),
                "realized_q": format_value(self.realized_q),
                "checks": [c.to_json() for c in self.checks]}


def verify_rtos_chain(searcher: MachineSearcher, D: FiniteDistribution, params: ReductionParams,
                      budget: KBudget = DEFAULT_KBUDGET, jobs: int = 1,
                      slack: Fraction = SLACK, prec: int = DEFAULT_PREC) -> RtosChainReport:
    """Enumerate every seed and check each inequality of the search-to-sampling argument.

    ``R`` is the searcher's output law, ``R'`` its restriction to solutions,
    ``C`` and ``C'`` the laws of a uniformly chosen coordinate under each.
    Runs that abort or print the wrong number of bits are a FAIL outcome of
    ``R`` and ``C``.  Raises :class:`ConditioningError` when no seed succeeds.
    """
    if D.width != params.m:
        raise DimensionError("distribution width does not match params.m")
    z = z_encoding(D, params.k)
    hist = machine_output_distribution(searcher.program, z, searcher.rho, searcher.budget, jobs)
    total = hist.total
    N, delta, beta = params.N, params.delta, params.beta

    R: dict = {}
    malformed = sum(hist.aborts.values())
    for out, n in hist.halted.items():
        if len(out) != params.tuple_bits:
            malformed += n
        else:
            R[split_tuple(out, N, params.m)] = Fraction(n, total)
    if malformed:
        R[FAIL] = Fraction(malformed, total)

    members = {Y: p for Y, p in R.items() if Y is not FAIL and decide(Y, D, params, budget, z).member}
    success = exact_sum(members.values())
    if not success:
        raise ConditioningError("the searcher never outputs a solution")
    Rc = TupleDistribution(N, params.m, pmf={Y: p / success for Y, p in members.items()})

    # Coordinate laws of R (with FAIL) and of R'.
    C: dict = {}
    for Y, p in R.items():
        if Y is FAIL:
            C[FAIL] = C.get(FAIL, 0) + p
            continue
        for y in Y:
            C[y] = C.get(y, 0) + p / N
    Cc = average_marginal(Rc)
    margs = marginals(Rc)
    checks: list[Check] = []

    # Steps 1, 2 and 8 use the realized failure mass; the hypothesis record says
    # whether it meets the target delta.
    delta_eff = 1 - success
    checks.append(Check("rtos.hypothesis", delta_eff, delta, 0, {"success_mass": success}))
    tv_R = _tv_maps(dict(Rc.items()), R)
    checks.append(Check("rtos.1", tv_R, delta_eff, slack))
    tv_C = _tv_maps(dict(Cc.items()), C)
    checks.append(Check("rtos.2", tv_C, delta_eff, slack))

    # Step 3: KL(R'||D^N) <= max [K(Y|z) + beta - log2 1/q_Y]^+.  Members have no
    # program shorter than their threshold, so the literal program caps K.
    with mpmath.workprec(prec):
        kl_joint = kl_divergence(Rc, power(D, N), prec)
        best = -mpmath.inf
        max_ratio = -mpmath.inf
        max_k = 0
        for Y, q in Rc.items():
            flat = "".join(Y)
            kb = k_bounded(flat, z, budget).value
            kv = min(kb, literal_length(flat))
            max_k = max(max_k, kv)
            log_q = _log2(q)
            best = max(best, kv + beta + log_q)
            p = Fraction(1)
            for y in Y:
                p *= D.prob(y)
            max_ratio = max(max_ratio, log_q - _log2(p))
        kappa = max(mpmath.mpf(0), best)
    checks.append(Check("rtos.3", kl_joint, kappa, slack,
                        {"max_log_ratio": max_ratio, "max_k": max_k}))
    checks.append(Check("rtos.3a", kl_joint, max_ratio, slack))

    rao = rao_check(Rc, D, prec, slack)
    checks.append(Check("rtos.4", rao.lhs, rao.rhs, slack))

    tvs = []
    for i, Ri in enumerate(margs, 1):
        pc = pinsker_check(Ri, D, prec, slack)
        tvs.append(pc.lhs)
        checks.append(Check(f"rtos.5[i={i}]", pc.lhs, pc.rhs, slack, {"kl": pc.detail["kl"]}))

    sum_tv = exact_sum(tvs)
    with mpmath.workprec(prec):
        sq = sum((t * t for t in tvs), Fraction(0))
        cs_rhs = mpmath.sqrt(N * (mpmath.mpf(sq.numerator) / sq.denominator))
    checks.append(Check("rtos.6", sum_tv, cs_rhs, slack))
    tv_cd = tv_distance(Cc, D)
    checks.append(Check("rtos.7", tv_cd, sum_tv / N, slack))
    measured = _tv_with_failure(C, D)
    checks.append(Check("rtos.8", measured, delta_eff + tv_cd, slack))
    with mpmath.workprec(prec):
        final = delta_eff + mpmath.sqrt(2 * kappa / N)
    checks.append(Check("rtos.bound", measured, final, slack, {"kappa": kappa}))

    return RtosChainReport(params, searcher.rho, success, Fraction(malformed, total), measured,
                           kappa, int(max_k), max_ratio, checks)


# ---------------------------------------------------------------- converse construction


def build_otherdir(accept: Callable[[BitString], bool], width: int, z: BitString = "",
                   budget: KBudget = DEFAULT_KBUDGET, jobs: int = 1) -> FiniteDistribution:
    """Universal prior restricted to ``accept`` and renormalized."""
    prior = universal_prior(width, z, budget, jobs)
    kept = {y: w for y, w in prior.weights.items() if accept(y)}
    if not kept:
        raise ConditioningError("the predicate accepts no string")
    alpha = exact_sum(kept.values())
    return FiniteDistribution(width, {y: w / alpha for y, w in kept.items()})


@dataclass
class OtherDirReport:
    width: int
    k: int
    c: Fraction
    g_B: Fraction
    success_mass: Fraction
    measured_tv: Fraction
    checks: list[Check] = field(default_factory=list)

    @property
    def delta(self) -> Fraction:
        return Fraction(1, 2**self.k)

    @property
    def tv_bound(self) -> Fraction:
        return 1 - self.c / self.g_B + self.delta

    @property
    def eta(self) -> Fraction:
        return self.c / self.g_B - self.delta

    @property
    def passed(self) -> bool:
        return all(ch.passed for ch in self.checks)

    def to_json(self) -> dict:
        return {"width": self.width, "k": self.k, "c": format_value(self.c),
                "g_B": format_value(self.g_B), "success_mass": format_value(self.success_mass),
                "tv_bound": format_value(self.tv_bound), "eta": format_value(self.eta),
                "measured_tv": format_value(self.measured_tv),
                "checks": [ch.to_json() for ch in self.checks]}


def verify_otherdir(accept: Callable[[BitString], bool], D_x: FiniteDistribution,
                    searcher: MachineSearcher, k: int, z: BitString = "",
                    budget: KBudget = DEFAULT_KBUDGET, jobs: int = 1,
                    slack: Fraction = SLACK) -> OtherDirReport:
    """Check both directions of the converse on ``D_x`` built by :func:`build_otherdir`.

    The searcher runs on conditional tape ``z`` and should print one
    ``width``-bit string; aborts and other lengths are failures.
    """
    width = D_x.width
    checks: list[Check] = []
    # (i) an exact sampler for D_x fails only on mass outside the accepted set
    outside = exact_sum(p for y, p in D_x.items() if not accept(y))
    checks.append(Check("otherdir.i", outside, 0, 0))

    prior = universal_prior(width, z, budget, jobs)
    hist = machine_output_distribution(searcher.program, z, searcher.rho, searcher.budget, jobs)
    total = hist.total
    C: dict = {}
    fail = sum(hist.aborts.values())
    for out, n in hist.halted.items():
        if len(out) == width:
            C[out] = Fraction(n, total)
        else:
            fail += n
    if fail:
        C[FAIL] = Fraction(fail, total)
    hits = {y: p for y, p in C.items() if y is not FAIL and accept(y)}
    success = exact_sum(hits.values())
    if not success:
        raise ConditioningError("the searcher never outputs an accepted string")
    Cc = FiniteDistribution(width, {y: p / success for y, p in hits.items()})

    g_B = max(q * 2 ** prior.k_values[y] for y, q in Cc.items())
    c = prior.c
    floor = min(p * 2 ** prior.k_values[y] for y, p in D_x.items())
    delta = Fraction(1, 2**k)
    checks.append(Check("otherdir.hypothesis", 1 - success, delta, 0))
    checks.append(Check("otherdir.prior_floor", c, floor, 0))
    checks.append(Check("otherdir.conditioning", _tv_maps(dict(Cc.items()), C), 1 - success, 0))
    checks.append(Check("otherdir.domination", tv_distance(Cc, D_x), 1 - c / g_B, 0))
    measured = _tv_with_failure(C, D_x)
    checks.append(Check("otherdir.ii", measured, 1 - c / g_B + delta, slack,
                        {"c": c, "g_B": g_B, "delta": delta}))
    return OtherDirReport(width, k, c, g_B, success, measured, checks)


# ---------------------------------------------------------------- both directions


@dataclass
class EndToEndReport:
    stor: StorReport
    eps: Fraction
    measured_tv: Fraction
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"params": self.stor.params.to_json(), "eps": format_value(self.eps),
                "measured_tv": format_value(self.measured_tv),
                "checks": [c.to_json() for c in self.checks]}


def verify_end_to_end(D: FiniteDistribution, sampler: Sampler, searcher: MachineSearcher,
                      params: ReductionParams, trials: int, seed: int,
                      budget: KBudget = DEFAULT_KBUDGET, jobs: int = 1,
                      slack: Fraction = SLACK) -> EndToEndReport:
    """Sampler -> search at failure delta, and searcher -> sampler at accuracy eps = 2 delta."""
    stor = verify_stor(D, sampler, params, trials, seed, budget, jobs)
    lo, hi = stor.ci
    eps = 2 * params.delta
    C = search_to_sample_distribution(searcher, D, params, jobs)
    measured = _tv_with_failure(C, D)
    checks = [
        Check("e2e.search_failure", hi, params.delta, 0, {"failure_rate": stor.failure_rate}),
        Check("e2e.sample_tv", measured, eps, slack),
    ]
    return EndToEndReport(stor, eps, measured, checks)
