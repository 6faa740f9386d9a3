"""Resource-bounded conditional Kolmogorov complexity on the toy machine.

``K(y|z)`` here is the length of the shortest valid program, no longer than
``L_max`` bits, that halts within the execution budget on conditional tape
``z`` and an empty random tape with output exactly ``y``.  Programs that try
to read random bits abort, so only deterministic programs count.

Enumeration is organized in *layers*: all programs with the same number of
opcodes share one encoded length.  A layer is run once per ``(z, budget)``
and cached; every K query, Kraft sum and prior weight reads from the cache.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .bits import BitString, all_strings, check_bits
from .checks import Check
from .dist import FiniteDistribution
from .machine import DEFAULT_BUDGET, ExecBudget, Program, kernel, layers, run, total_length

INFINITE = math.inf


class BudgetTooSmallError(ValueError):
    """The budget cannot guarantee a finite complexity for every target."""


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class KBudget:
    L_max: int = 24
    exec: ExecBudget = DEFAULT_BUDGET

    def __post_init__(self):
        if self.L_max < 1:
            raise ValueError("L_max must be >= 1")

    def with_lmax(self, L_max: int) -> KBudget:
        return KBudget(L_max, self.exec)

    def to_json(self) -> dict:
        return {"L_max": self.L_max, **self.exec.to_json()}


DEFAULT_KBUDGET = KBudget()


@dataclass(frozen=True)
class KResult:
    value: int | float
    witness: Program | None = None

    @property
    def finite(self) -> bool:
        return self.witness is not None

    def to_json(self, y: BitString, budget: KBudget) -> dict:
        return {
            "y": y,
            "k": self.value if self.finite else "inf",
            "witness": self.witness.literal() if self.finite else None,
            "budget": budget.to_json(),
        }


class Layer(NamedTuple):
    n_ops: int
    length: int
    n_valid: int
    n_halted: int
    first: Mapping[BitString, bytes]


_LAYERS: dict[tuple[int, BitString, ExecBudget], Layer] = {}
_PARALLEL_FROM = 6  # layers smaller than this are not worth shipping to workers


def _survey_part(args):
    n_ops, prefix, z, budget_args = args
    return kernel.survey(n_ops, prefix, z, b"", *budget_args)


def layer(n_ops: int, z: BitString = "", budget: ExecBudget = DEFAULT_BUDGET, jobs: int = 1) -> Layer:
    """Survey every program with ``n_ops`` opcodes on ``(z, empty r)``.

    With ``jobs > 1`` the layer is split by first opcode across processes and
    merged in opcode order, so the result does not depend on ``jobs``.
    """
    key = (n_ops, z, budget)
    hit = _LAYERS.get(key)
    if hit is not None:
        return hit
    zb = check_bits(z).encode("ascii")
    if jobs > 1 and n_ops >= _PARALLEL_FROM:
        tasks = [(n_ops, bytes([op]), zb, budget.as_args()) for op in range(8)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_survey_part, tasks))
    else:
        parts = [kernel.survey(n_ops, b"", zb, b"", *budget.as_args())]
    n_valid = n_halted = 0
    first: dict[BitString, bytes] = {}
    for nv, nh, f in parts:
        n_valid += nv
        n_halted += nh
        for out, ops in f.items():
            first.setdefault(out.decode("ascii"), ops)
    result = Layer(n_ops, total_length(n_ops), n_valid, n_halted, first)
    _LAYERS[key] = result
    return result


def clear_cache() -> None:
    _LAYERS.clear()


def k_bounded(y: BitString, z: BitString = "", budget: KBudget = DEFAULT_KBUDGET, jobs: int = 1) -> KResult:
    """Bounded ``K(y|z)`` with the lexicographically first shortest witness."""
    check_bits(y)
    for n in layers(budget.L_max):
        ops = layer(n, z, budget.exec, jobs).first.get(y)
        if ops is not None:
            return KResult(total_length(n), Program(ops))
    return KResult(INFINITE)


def literal_ops(y: BitString) -> bytes:
    """Straight-line body printing ``y``: FLIP when the bit changes, then OUT."""
    ops = bytearray()
    cell = "0"
    for b in check_bits(y):
        if b != cell:
            ops.append(2)
            cell = b
        ops.append(5)
    return bytes(ops)


def literal_length(y: BitString) -> int:
    return total_length(len(literal_ops(y)))


def literal_bound(width: int) -> int:
    """Worst-case literal program length over all strings of ``width`` bits."""
    return 6 * width + 2 * ((6 * width + 1).bit_length() - 1) + 1


def k_upper_literal(y: BitString) -> tuple[int, Program]:
    """Constructive upper bound on K(y|z) for every z, verified by running it."""
    p = Program(literal_ops(y))
    budget = ExecBudget(max(1, len(p.ops)), 1, max(1, len(y)))
    outcome = run(p, "", "", budget)
    if not outcome.halted or outcome.output != y:
        raise AssertionError(f"literal program failed for {y!r}: {outcome}")
    return len(p), p


def kraft_sum(budget: KBudget = DEFAULT_KBUDGET, z: BitString = "", halting_only: bool = True,
              jobs: int = 1) -> Fraction:
    """``sum 2^-|p|`` over programs of length <= L_max (halting ones by default)."""
    total = Fraction(0)
    for n in layers(budget.L_max):
        lay = layer(n, z, budget.exec, jobs)
        count = lay.n_halted if halting_only else lay.n_valid
        total += Fraction(count, 2 ** lay.length)
    return total


def below_threshold(p: Fraction, k: int | float, c: int) -> bool:
    """``k < log2(1/p) - c`` decided exactly as ``p * 2^(k+c) < 1``."""
    if k == INFINITE:
        return False
    return p * Fraction(2) ** (k + c) < 1


@dataclass
class DeficiencyReport:
    c: int
    violating_mass: Fraction
    kraft: Fraction
    entries: list[dict] = field(default_factory=list)

    @property
    def bound(self) -> Fraction:
        return self.kraft / 2**self.c

    @property
    def checks(self) -> list[Check]:
        return [
            Check(f"deficiency[c={self.c}]", self.violating_mass, self.bound, 0),
            Check(f"kraft_scaled[c={self.c}]", self.bound, Fraction(1, 2**self.c), 0),
        ]

    @property
    def passed(self) -> bool:
        return all(ch.passed for ch in self.checks)


def deficiency_check(D: FiniteDistribution, c: int, z: BitString = "",
                     budget: KBudget = DEFAULT_KBUDGET, jobs: int = 1) -> DeficiencyReport:
    """Exact ``Pr_{y~D}[K(y|z) < log2(1/p_y) - c]`` against ``2^-c * kraft_sum``.

    Distinct strings have distinct shortest programs, so the violating mass is
    below ``sum 2^-(K+c)`` and hence below the scaled Kraft sum: the counting
    constant is 1 on this machine.
    """
    if c < 0:
        raise ValueError("c must be non-negative")
    violating = Fraction(0)
    entries = []
    for y, p in D.items():
        res = k_bounded(y, z, budget, jobs)
        bad = below_threshold(p, res.value, c)
        if bad:
            violating += p
        entries.append({**res.to_json(y, budget), "p": p, "violates": bad})
    return DeficiencyReport(c, violating, kraft_sum(budget, z, jobs=jobs), entries)


@dataclass(frozen=True)
class CodeBook:
    width: int
    codes: Mapping[BitString, BitString]

    def encode(self, y: BitString) -> BitString:
        try:
            return self.codes[y]
        except KeyError:
            raise KeyError(f"{y!r} is not in the support") from None

    def decode(self, bits: BitString) -> BitString:
        """Inverse of :meth:`encode` for a single complete codeword."""
        y, rest = self.decode_prefix(bits)
        if rest:
            raise DecodeError(f"{len(rest)} bits left after the codeword")
        return y

    def decode_prefix(self, bits: BitString) -> tuple[BitString, BitString]:
        inverse = {c: y for y, c in self.codes.items()}
        for i in range(len(bits) + 1):
            y = inverse.get(bits[:i])
            if y is not None:
                return y, bits[i:]
        raise DecodeError(f"{bits!r} does not start with a codeword")

    def kraft(self) -> Fraction:
        return sum((Fraction(1, 2 ** len(c)) for c in self.codes.values()), Fraction(0))


def code_length(p: Fraction) -> int:
    """``ceil(log2(1/p))`` for ``0 < p <= 1``, from integer bit lengths."""
    n, d = p.numerator, p.denominator
    ell = d.bit_length() - n.bit_length()
    if (n << ell) < d:
        ell += 1
    return ell


def shannon_fano(D: FiniteDistribution) -> CodeBook:
    """Shannon code: cumulative probabilities truncated to ``ceil(log2 1/p)`` bits.

    Outcomes are taken by decreasing probability, ties in lex order; that
    ordering is what makes the truncated cumulative sums prefix-free.
    """
    order = sorted(D.items(), key=lambda item: (-item[1], item[0]))
    codes = {}
    F = Fraction(0)
    for y, p in order:
        ell = code_length(p)
        word = math.floor(F * 2**ell)
        codes[y] = format(word, "b").zfill(ell) if ell else ""
        F += p
    return CodeBook(D.width, dict(sorted(codes.items())))


@dataclass(frozen=True)
class UniversalPrior:
    width: int
    z: BitString
    k_values: Mapping[BitString, int]
    weights: Mapping[BitString, Fraction]
    normalizer: Fraction

    @property
    def c(self) -> Fraction:
        """Exact constant with ``u_y = c * 2^-K(y|z)``."""
        return 1 / self.normalizer

    def prob(self, y: BitString) -> Fraction:
        return self.weights[y] / self.normalizer

    def distribution(self) -> FiniteDistribution:
        return FiniteDistribution(self.width, {y: w / self.normalizer for y, w in self.weights.items()})


def universal_prior(width: int, z: BitString = "", budget: KBudget = DEFAULT_KBUDGET,
                    jobs: int = 1) -> UniversalPrior:
    """Weights ``2^-K(y|z)`` over all ``width``-bit strings, normalized exactly."""
    need = literal_bound(width)
    if budget.L_max < need:
        raise BudgetTooSmallError(f"L_max={budget.L_max} < literal bound {need} for width {width}")
    ex = budget.exec
    if ex.max_steps < 2 * width or ex.max_output_bits < max(width, 1):
        raise BudgetTooSmallError("execution budget cannot run the literal programs")
    ks = {}
    for y in all_strings(width):
        res = k_bounded(y, z, budget, jobs)
        if not res.finite:
            raise AssertionError(f"K({y!r}) infinite despite the literal bound")
        ks[y] = res.value
    weights = {y: Fraction(1, 2**k) for y, k in ks.items()}
    Z = sum(weights.values(), Fraction(0))
    return UniversalPrior(width, z, ks, weights, Z)
