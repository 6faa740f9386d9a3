"""The search problem built from a sampling problem.

A tuple ``Y = (y_1..y_N)`` of m-bit strings is a solution for ``(D, k)`` iff

    log2 1/(p_{y_1} ... p_{y_N})  <=  K(y_1 || ... || y_N | z(D, k)) + beta

with ``delta = 2^-k``, ``beta = 1 + k`` and ``N = ceil(m * 2^(exponent*k))``.
The test is decided exactly: ``prod p >= 2^-(K + beta)``, and only programs
shorter than the surprisal threshold ever need to be enumerated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from ..bits import BitString, all_strings, gamma, read_gamma
from ..dist import DimensionError, FiniteDistribution
from ..kolmo import DEFAULT_KBUDGET, INFINITE, KBudget, code_length, k_bounded
from ..machine import Program, run

DEFAULT_EXPONENT = Fraction(21, 10)

Tuple = tuple[BitString, ...]


class InapplicableError(ValueError):
    """The program does not halt with a tuple-shaped output."""


def as_exponent(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


@dataclass(frozen=True)
class ReductionParams:
    m: int
    k: int
    N: int
    beta: int
    eps: Fraction
    exponent: Fraction = DEFAULT_EXPONENT

    @property
    def delta(self) -> Fraction:
        return Fraction(1, 2**self.k)

    @property
    def tuple_bits(self) -> int:
        return self.N * self.m

    def to_json(self) -> dict:
        return {"m": self.m, "k": self.k, "N": self.N, "beta": self.beta,
                "eps": f"{self.eps.numerator}/{self.eps.denominator}",
                "delta": f"1/{2**self.k}", "exponent": str(self.exponent)}


def tuple_arity(m: int, k: int, exponent=DEFAULT_EXPONENT) -> int:
    """``ceil(m * 2^(exponent * k))``; exact when the power is an integer."""
    e = as_exponent(exponent) * k
    if e.denominator == 1:
        return m * 2 ** int(e)
    # 2^e is irrational here, so it is never an integer and 64 spare bits decide ceil
    int_bits = m.bit_length() + int(e) + 2
    with mpmath.workprec(int_bits + 64):
        value = m * mpmath.power(2, mpmath.mpf(e.numerator) / e.denominator)
        return int(mpmath.ceil(value))


def derive_params(m: int, k: int, exponent=DEFAULT_EXPONENT) -> ReductionParams:
    if m < 1:
        raise ValueError("m must be >= 1")
    if k < 0:
        raise ValueError("k must be >= 0")
    exponent = as_exponent(exponent)
    N = tuple_arity(m, k, exponent)
    delta = Fraction(1, 2**k)
    return ReductionParams(m, k, N, 1 + k, delta / (2 * N), exponent)


def k_for_accuracy(eps: Fraction) -> int:
    """Smallest k with ``2^-k <= eps/2``, i.e. ``k = ceil(log2(2/eps))``."""
    eps = Fraction(eps)
    if not 0 < eps <= 2:
        raise ValueError("accuracy must lie in (0, 2]")
    k = 0
    while Fraction(1, 2**k) > eps / 2:
        k += 1
    return k


def params_for_accuracy(m: int, eps, exponent=DEFAULT_EXPONENT) -> ReductionParams:
    return derive_params(m, k_for_accuracy(Fraction(eps)), exponent)


def dyadic_k(delta) -> int:
    """Round a requested failure target down to the next dyadic ``2^-k``."""
    delta = Fraction(delta)
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    k = 0
    while Fraction(1, 2**k) > delta:
        k += 1
    return k


def z_encoding(D: FiniteDistribution, k: int) -> BitString:
    """Self-delimiting serialization of the instance ``(D, k)``.

    ``gamma(m+1) || gamma(den) || gamma(num_y + 1) for all y in lex order || gamma(k+1)``
    with all probabilities over their least common denominator.
    """
    den = math.lcm(*(p.denominator for _, p in D.items()))
    parts = [gamma(D.width + 1), gamma(den)]
    for y in all_strings(D.width):
        p = D.prob(y)
        parts.append(gamma(p.numerator * (den // p.denominator) + 1))
    parts.append(gamma(k + 1))
    return "".join(parts)


def z_decode(bits: BitString) -> tuple[FiniteDistribution, int]:
    m1, pos = read_gamma(bits)
    den, pos = read_gamma(bits, pos)
    pmf = {}
    for y in all_strings(m1 - 1):
        n1, pos = read_gamma(bits, pos)
        if n1 > 1:
            pmf[y] = Fraction(n1 - 1, den)
    k1, pos = read_gamma(bits, pos)
    if pos != len(bits):
        raise ValueError("trailing bits after the instance encoding")
    return FiniteDistribution(m1 - 1, pmf), k1 - 1


def tuple_prob(Y: Tuple, D: FiniteDistribution) -> Fraction:
    num = den = 1
    for y in Y:
        if len(y) != D.width:
            raise DimensionError(f"{y!r} is not a {D.width}-bit string")
        p = D.pmf.get(y)
        if p is None:
            return Fraction(0)
        num *= p.numerator
        den *= p.denominator
    return Fraction(num, den)


@dataclass(frozen=True)
class Membership:
    member: bool
    prob: Fraction
    surprisal_ceil: int         # ceil(log2 1/prod p); 0 when prob is 0
    threshold: int | None       # smallest K that admits Y
    k_found: int | float        # bounded K below the threshold, else INFINITE
    off_support: bool = False

    def to_json(self) -> dict:
        return {"member": self.member, "prob": str(self.prob),
                "surprisal_ceil": self.surprisal_ceil, "threshold": self.threshold,
                "k_below_threshold": None if self.k_found == INFINITE else self.k_found,
                "off_support": self.off_support}


def decide(Y: Tuple, D: FiniteDistribution, params: ReductionParams,
           budget: KBudget = DEFAULT_KBUDGET, z: BitString | None = None) -> Membership:
    """Decide membership and keep the numbers that justify it."""
    if len(Y) != params.N:
        raise DimensionError(f"expected a {params.N}-tuple, got {len(Y)} entries")
    if D.width != params.m:
        raise DimensionError("distribution width does not match params.m")
    P = tuple_prob(Y, D)
    if not P:
        return Membership(False, P, 0, None, INFINITE, off_support=True)
    ell = code_length(P)
    # P * 2^(K+beta) >= 1  <=>  K + beta >= ell  (K and beta are integers)
    threshold = ell - params.beta
    limit = min(budget.L_max, threshold - 1)
    if limit < 1:
        return Membership(True, P, ell, threshold, INFINITE)
    if z is None:
        z = z_encoding(D, params.k)
    res = k_bounded("".join(Y), z, budget.with_lmax(limit))
    return Membership(not res.finite, P, ell, threshold, res.value)


def membership(Y: Tuple, D: FiniteDistribution, params: ReductionParams,
               budget: KBudget = DEFAULT_KBUDGET, z: BitString | None = None) -> bool:
    return decide(Y, D, params, budget, z).member


def split_tuple(bits: BitString, N: int, m: int) -> Tuple:
    if len(bits) != N * m:
        raise DimensionError(f"expected {N * m} output bits, got {len(bits)}")
    return tuple(bits[i * m:(i + 1) * m] for i in range(N))


@dataclass(frozen=True)
class ExclusionReport:
    program_length: int
    prob: Fraction
    beta: int
    applicable: bool
    member: bool
    off_support: bool

    @property
    def excluded(self) -> bool:
        return not self.member

    @property
    def consistent(self) -> bool:
        """A short generator must never coexist with membership."""
        return not (self.applicable and self.member)

    def surprisal(self, prec: int = 64):
        if not self.prob:
            return mpmath.inf
        with mpmath.workprec(prec):
            return -mpmath.log(mpmath.mpf(self.prob.numerator) / self.prob.denominator, 2)

    def to_json(self) -> dict:
        return {"program_length": self.program_length, "prob": str(self.prob), "beta": self.beta,
                "applicable": self.applicable, "member": self.member, "excluded": self.excluded,
                "off_support": self.off_support, "consistent": self.consistent}


def short_program_exclusion(p: Program, D: FiniteDistribution, params: ReductionParams,
                            budget: KBudget = DEFAULT_KBUDGET,
                            z: BitString | None = None) -> ExclusionReport:
    """Run ``p`` on ``z(D, k)`` and test the tuple it prints.

    When ``|p| < log2(1/prod p) - beta`` the program is itself a witness that
    ``K(Y|z) <= |p|``, so ``Y`` must be rejected.  Membership is decided with
    ``L_max`` raised to at least ``|p|`` so that the witness is within reach.
    """
    if z is None:
        z = z_encoding(D, params.k)
    outcome = run(p, z, "", budget.exec)
    if not outcome.halted or len(outcome.output) != params.tuple_bits:
        raise InapplicableError(f"program does not halt with {params.tuple_bits} output bits: {outcome.status.name}")
    Y = split_tuple(outcome.output, params.N, params.m)
    P = tuple_prob(Y, D)
    wide = budget.with_lmax(max(budget.L_max, len(p)))
    if not P:
        return ExclusionReport(len(p), P, params.beta, True, False, True)
    applicable = P * 2 ** (len(p) + params.beta) < 1
    member = membership(Y, D, params, wide, z)
    return ExclusionReport(len(p), P, params.beta, applicable, member, False)
