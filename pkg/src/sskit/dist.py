"""Exact finite distributions over bit strings and the information inequalities.

Probabilities are ``fractions.Fraction`` end to end; total variation on
rational inputs is exact.  KL divergence is evaluated in bits with mpmath at a
configurable binary precision (128 bits by default).

Tuple coordinates are numbered from 1, matching the usual ``R_i`` notation.
"""

from __future__ import annotations

import bisect
import math
from collections import defaultdict
from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType

import mpmath

from .bits import BitString, all_strings, is_bits
from .checks import DEFAULT_PREC, SLACK, Check

Tuple = tuple[BitString, ...]


class DimensionError(ValueError):
    """Width or arity mismatch between operands."""


class ConditioningError(ValueError):
    """Conditioning on an event of probability zero."""


class RepresentationError(ValueError):
    """The operation needs an explicit (enumerable) tuple distribution."""


class DistributionFormatError(ValueError):
    """Malformed distribution file."""


def exact_sum(values: Iterable[Fraction]) -> Fraction:
    """Sum of many fractions, grouping by denominator to keep it fast."""
    by_den: dict[int, int] = defaultdict(int)
    for v in values:
        by_den[v.denominator] += v.numerator
    return sum((Fraction(n, d) for d, n in by_den.items()), Fraction(0))


def _weighted_sum(pairs: Iterable[tuple[object, Fraction]]) -> dict:
    acc: dict[object, dict[int, int]] = defaultdict(lambda: defaultdict(int))
    for key, v in pairs:
        acc[key][v.denominator] += v.numerator
    return {k: sum((Fraction(n, d) for d, n in g.items()), Fraction(0)) for k, g in acc.items()}


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """Exact probability mass over bit strings of one fixed width."""

    width: int
    pmf: Mapping[BitString, Fraction]

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("width must be non-negative")
        clean = {}
        for y, p in self.pmf.items():
            if not is_bits(y) or len(y) != self.width:
                raise DimensionError(f"outcome {y!r} is not a {self.width}-bit string")
            p = Fraction(p)
            if p < 0:
                raise ValueError(f"negative probability for {y!r}")
            if p > 0:
                clean[y] = p
        if exact_sum(clean.values()) != 1:
            raise ValueError("probabilities must sum to exactly 1")
        object.__setattr__(self, "pmf", MappingProxyType(dict(sorted(clean.items()))))

    @classmethod
    def uniform(cls, width: int) -> FiniteDistribution:
        p = Fraction(1, 2**width)
        return cls(width, {y: p for y in all_strings(width)})

    @classmethod
    def point(cls, y: BitString) -> FiniteDistribution:
        return cls(len(y), {y: Fraction(1)})

    @classmethod
    def from_weights(cls, width: int, weights: Mapping[BitString, int | Fraction]) -> FiniteDistribution:
        total = exact_sum(Fraction(w) for w in weights.values())
        if total <= 0:
            raise ValueError("weights must have positive total")
        return cls(width, {y: Fraction(w) / total for y, w in weights.items()})

    def prob(self, y: BitString) -> Fraction:
        return self.pmf.get(y, Fraction(0))

    @property
    def support(self) -> tuple[BitString, ...]:
        return tuple(self.pmf)

    def items(self):
        return self.pmf.items()

    def __eq__(self, other):
        if not isinstance(other, FiniteDistribution):
            return NotImplemented
        return self.width == other.width and dict(self.pmf) == dict(other.pmf)

    def __hash__(self):
        return hash((self.width, tuple(self.pmf.items())))

    def __reduce__(self):
        return (type(self), (self.width, dict(self.pmf)))

    def __repr__(self):
        body = ", ".join(f"{y or 'ε'}: {p}" for y, p in self.pmf.items())
        return f"FiniteDistribution(m={self.width}, {{{body}}})"

    def to_text(self) -> str:
        return format_distribution(self)

    @classmethod
    def from_text(cls, text: str) -> FiniteDistribution:
        return parse_distribution(text)


@dataclass(frozen=True, eq=False)
class TupleDistribution:
    """Distribution over N-tuples of m-bit strings.

    Either EXPLICIT (``pmf`` set) or an IMPLICIT product ``base ** arity``
    that only answers probability queries.
    """

    arity: int
    width: int
    pmf: Mapping[Tuple, Fraction] | None = None
    base: FiniteDistribution | None = None

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        if (self.pmf is None) == (self.base is None):
            raise ValueError("exactly one of pmf / base must be given")
        if self.base is not None:
            if self.base.width != self.width:
                raise DimensionError("base width does not match")
            return
        clean = {}
        for Y, p in self.pmf.items():
            Y = tuple(Y)
            if len(Y) != self.arity or any(len(y) != self.width or not is_bits(y) for y in Y):
                raise DimensionError(f"tuple {Y!r} is not a {self.arity}-tuple of {self.width}-bit strings")
            p = Fraction(p)
            if p < 0:
                raise ValueError("negative probability")
            if p > 0:
                clean[Y] = p
        if exact_sum(clean.values()) != 1:
            raise ValueError("probabilities must sum to exactly 1")
        object.__setattr__(self, "pmf", MappingProxyType(dict(sorted(clean.items()))))

    @classmethod
    def explicit(cls, pmf: Mapping[Tuple, Fraction]) -> TupleDistribution:
        first = next(iter(pmf))
        return cls(len(first), len(first[0]) if first else 0, pmf=pmf)

    @property
    def is_explicit(self) -> bool:
        return self.pmf is not None

    def prob(self, Y: Tuple) -> Fraction:
        if self.pmf is not None:
            return self.pmf.get(tuple(Y), Fraction(0))
        if len(Y) != self.arity:
            raise DimensionError("wrong arity")
        p = Fraction(1)
        for y in Y:
            p *= self.base.prob(y)
            if not p:
                break
        return p

    @property
    def support(self) -> tuple[Tuple, ...]:
        self._need_explicit("support")
        return tuple(self.pmf)

    def items(self):
        self._need_explicit("items")
        return self.pmf.items()

    def _need_explicit(self, what: str):
        if self.pmf is None:
            raise RepresentationError(f"{what} needs an EXPLICIT tuple distribution")

    def __eq__(self, other):
        if not isinstance(other, TupleDistribution):
            return NotImplemented
        if (self.arity, self.width) != (other.arity, other.width):
            return False
        if self.is_explicit and other.is_explicit:
            return dict(self.pmf) == dict(other.pmf)
        if not self.is_explicit and not other.is_explicit:
            return self.base == other.base
        return False

    __hash__ = None

    def __reduce__(self):
        pmf = None if self.pmf is None else dict(self.pmf)
        return (type(self), (self.arity, self.width, pmf, self.base))


def _same_shape(A, B):
    if type(A) is not type(B):
        raise DimensionError("cannot compare a FiniteDistribution with a TupleDistribution")
    if A.width != B.width:
        raise DimensionError(f"width mismatch: {A.width} vs {B.width}")
    if isinstance(A, TupleDistribution) and A.arity != B.arity:
        raise DimensionError(f"arity mismatch: {A.arity} vs {B.arity}")


def tv_distance(A, B) -> Fraction:
    """Total variation distance ``1/2 * sum |p - q|``, exact."""
    _same_shape(A, B)
    if isinstance(A, TupleDistribution) and not A.is_explicit:
        if not B.is_explicit:
            raise RepresentationError("tv_distance needs at least one EXPLICIT side")
        A, B = B, A
    # sum of positive parts over supp(A) equals half the L1 distance
    return exact_sum(d for x, p in A.items() if (d := p - B.prob(x)) > 0)


def _log2_ratio(r: Fraction):
    return mpmath.log(mpmath.mpf(r.numerator), 2) - mpmath.log(mpmath.mpf(r.denominator), 2)


def kl_divergence(A, B, prec: int = DEFAULT_PREC):
    """``sum p log2(p/q)`` in bits as an mpmath number; ``+inf`` on support escape."""
    _same_shape(A, B)
    if isinstance(A, TupleDistribution) and not A.is_explicit:
        if B.is_explicit:
            raise RepresentationError("kl_divergence needs an EXPLICIT first argument")
        with mpmath.workprec(prec):
            return A.arity * kl_divergence(A.base, B.base, prec)
    weights: dict[Fraction, list[Fraction]] = defaultdict(list)
    for x, p in A.items():
        q = B.prob(x)
        if not q:
            return mpmath.inf
        if p != q:
            weights[p / q].append(p)
    with mpmath.workprec(prec):
        total = mpmath.mpf(0)
        for ratio in sorted(weights):
            w = exact_sum(weights[ratio])
            total += (mpmath.mpf(w.numerator) / w.denominator) * _log2_ratio(ratio)
        return +total


def kl_log_form(A, B) -> tuple[Fraction, int] | None:
    """Exact representation ``KL(A||B) = log2(P) / L`` with rational P.

    Returns ``None`` when the divergence is infinite.  Sizes grow quickly, so
    this is meant for small instances only.
    """
    _same_shape(A, B)
    items = list(A.items())
    L = math.lcm(*(p.denominator for _, p in items))
    P = Fraction(1)
    for x, p in items:
        q = B.prob(x)
        if not q:
            return None
        e = p.numerator * (L // p.denominator)
        P *= (p / q) ** e
    return P, L


def power(D: FiniteDistribution, N: int) -> TupleDistribution:
    if N < 1:
        raise ValueError("N must be >= 1")
    return TupleDistribution(N, D.width, base=D)


def _check_index(R: TupleDistribution, i: int):
    if not 1 <= i <= R.arity:
        raise IndexError(f"coordinate {i} outside 1..{R.arity}")


def marginal(R: TupleDistribution, i: int) -> FiniteDistribution:
    """Marginal on coordinate ``i`` (1-based)."""
    _check_index(R, i)
    if not R.is_explicit:
        return R.base
    return FiniteDistribution(R.width, _weighted_sum((Y[i - 1], p) for Y, p in R.items()))


def marginals(R: TupleDistribution) -> list[FiniteDistribution]:
    """All N marginals in one pass over the support."""
    if not R.is_explicit:
        return [R.base] * R.arity
    return [FiniteDistribution(R.width, m) for m in _all_marginal_maps(R)]


def _all_marginal_maps(R: TupleDistribution) -> list[dict]:
    accs = [defaultdict(lambda: defaultdict(int)) for _ in range(R.arity)]
    for Y, p in R.items():
        n, d = p.numerator, p.denominator
        for acc, y in zip(accs, Y):
            acc[y][d] += n
    return [{y: sum((Fraction(n, d) for d, n in g.items()), Fraction(0)) for y, g in acc.items()}
            for acc in accs]


def average_marginal(R: TupleDistribution) -> FiniteDistribution:
    """Distribution of ``y_i`` for a uniformly random coordinate ``i``."""
    if not R.is_explicit:
        return R.base
    N = R.arity
    total: dict[BitString, list[Fraction]] = defaultdict(list)
    for m in _all_marginal_maps(R):
        for y, p in m.items():
            total[y].append(p)
    return FiniteDistribution(R.width, {y: exact_sum(ps) / N for y, ps in total.items()})


def condition(R: TupleDistribution, accept: Callable[[Tuple], bool]) -> TupleDistribution:
    """Restrict ``R`` to accepted tuples and renormalize."""
    if not R.is_explicit:
        raise RepresentationError("condition needs an EXPLICIT tuple distribution")
    kept = {Y: p for Y, p in R.items() if accept(Y)}
    mass = exact_sum(kept.values())
    if not mass:
        raise ConditioningError("accepted event has probability zero")
    return TupleDistribution(R.arity, R.width, pmf={Y: p / mass for Y, p in kept.items()})


def mix(A, B, lam: Fraction):
    """Mixture ``lam * A + (1 - lam) * B`` of two explicit distributions."""
    _same_shape(A, B)
    lam = Fraction(lam)
    if not 0 <= lam <= 1:
        raise ValueError("mixing weight must lie in [0, 1]")
    keys = set(A.pmf) | set(B.pmf)
    pmf = {x: lam * A.prob(x) + (1 - lam) * B.prob(x) for x in keys}
    if isinstance(A, FiniteDistribution):
        return FiniteDistribution(A.width, pmf)
    return TupleDistribution(A.arity, A.width, pmf=pmf)


def sample_exact(D: FiniteDistribution, bits: Iterator[int]) -> BitString:
    """Draw from ``D`` exactly by lazily expanding a uniform real in [0, 1).

    The dyadic interval ``[a/2^j, (a+1)/2^j)`` is refined one bit at a time
    until it falls inside a single cumulative cell (cells in lex order).
    """
    support = D.support
    cum = [Fraction(0)]
    for y in support:
        cum.append(cum[-1] + D.pmf[y])
    a, scale = 0, 1
    while True:
        lo = Fraction(a, scale)
        i = bisect.bisect_right(cum, lo) - 1
        if Fraction(a + 1, scale) <= cum[i + 1]:
            return support[i]
        a = 2 * a + next(bits)
        scale *= 2


def pinsker_check(A, B, prec: int = DEFAULT_PREC, slack: Fraction = SLACK) -> Check:
    """``tv(A, B) <= sqrt(2 * KL(A||B))`` with KL in bits."""
    tv = tv_distance(A, B)
    kl = kl_divergence(A, B, prec)
    with mpmath.workprec(prec):
        rhs = mpmath.sqrt(2 * kl)
    return Check("pinsker", tv, rhs, slack, {"tv": tv, "kl": kl})


def rao_check(R: TupleDistribution, D: FiniteDistribution, prec: int = DEFAULT_PREC,
              slack: Fraction = SLACK) -> Check:
    """``sum_i KL(R_i||D) <= KL(R||D^N)``."""
    if not R.is_explicit:
        raise RepresentationError("rao_check needs an EXPLICIT tuple distribution")
    if R.width != D.width:
        raise DimensionError("width mismatch")
    margs = marginals(R)
    with mpmath.workprec(prec):
        per = [kl_divergence(Ri, D, prec) for Ri in margs]
        lhs = mpmath.fsum(per)
        rhs = kl_divergence(R, power(D, R.arity), prec)
    return Check("rao", lhs, rhs, slack, {"per_coordinate": per})


def rao_exact_relation(R: TupleDistribution, D: FiniteDistribution) -> int:
    """Sign of ``KL(R||D^N) - sum_i KL(R_i||D)``, decided in exact arithmetic.

    Both sides are brought to the form ``log2(P)/M`` over a common M and the
    rational arguments compared.  Raises ``ValueError`` on infinite sides.
    """
    parts = [kl_log_form(Ri, D) for Ri in marginals(R)]
    joint = kl_log_form(R, power(D, R.arity))
    if joint is None or any(p is None for p in parts):
        raise ValueError("infinite divergence")
    M = math.lcm(joint[1], *(L for _, L in parts))
    lhs = Fraction(1)
    for P, L in parts:
        lhs *= P ** (M // L)
    rhs = joint[0] ** (M // joint[1])
    return (rhs > lhs) - (rhs < lhs)


def format_distribution(D: FiniteDistribution) -> str:
    lines = [f"m={D.width}"]
    for y, p in D.items():
        lines.append(f"{y} {p.numerator}/{p.denominator}")
    return "\n".join(lines) + "\n"


def parse_distribution(text: str) -> FiniteDistribution:
    """Parse the ``m=<int>`` / ``<bits> <num>/<den>`` text format strictly."""
    if "\r" in text:
        raise DistributionFormatError("line endings must be LF")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith("m="):
        raise DistributionFormatError("first line must be m=<integer>")
    try:
        m = int(lines[0][2:])
    except ValueError:
        raise DistributionFormatError(f"bad width line {lines[0]!r}") from None
    if m < 0 or lines[0][2:] != str(m):
        raise DistributionFormatError(f"bad width line {lines[0]!r}")
    pmf: dict[BitString, Fraction] = {}
    prev = None
    for n, line in enumerate(lines[1:], start=2):
        parts = line.split(" ")
        if len(parts) != 2:
            raise DistributionFormatError(f"line {n}: expected '<bits> <num>/<den>'")
        y, frac = parts
        if not is_bits(y) or len(y) != m:
            raise DistributionFormatError(f"line {n}: {y!r} is not a {m}-bit string")
        if y in pmf:
            raise DistributionFormatError(f"line {n}: duplicate key {y!r}")
        if prev is not None and y < prev:
            raise DistributionFormatError(f"line {n}: keys not in ascending order")
        num, sep, den = frac.partition("/")
        if not sep or not num.isdigit() or not den.isdigit():
            raise DistributionFormatError(f"line {n}: bad probability {frac!r}")
        num, den = int(num), int(den)
        if den == 0 or num == 0:
            raise DistributionFormatError(f"line {n}: probability must be positive")
        if math.gcd(num, den) != 1:
            raise DistributionFormatError(f"line {n}: {frac} not in lowest terms")
        pmf[y] = Fraction(num, den)
        prev = y
    if exact_sum(pmf.values()) != 1:
        raise DistributionFormatError("probabilities do not sum to 1")
    return FiniteDistribution(m, pmf)


def load_distribution(path: str | Path) -> FiniteDistribution:
    return parse_distribution(Path(path).read_text(encoding="utf-8"))


def save_distribution(D: FiniteDistribution, path: str | Path) -> None:
    Path(path).write_text(format_distribution(D), encoding="utf-8", newline="\n")
