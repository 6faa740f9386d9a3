"""Sampler and searcher oracles plugged into the reductions."""

from __future__ import annotations

from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from fractions import Fraction

from ..bits import BitString, parse_literal
from ..dist import FiniteDistribution, sample_exact, tv_distance
from ..machine import DEFAULT_BUDGET, ExecBudget, Program, run, validate
from .problem import ReductionParams, Tuple, split_tuple, z_encoding


class OracleFailure(RuntimeError):
    """A sampler or searcher could not produce an output."""


def uniform_index(N: int, bits: Iterator[int]) -> int:
    """Exactly uniform index in ``range(N)`` by rejection on ceil(log2 N) bits."""
    if N < 1:
        raise ValueError("N must be >= 1")
    width = (N - 1).bit_length()
    while True:
        v = 0
        for _ in range(width):
            v = 2 * v + next(bits)
        if v < N:
            return v


class Sampler:
    """Produces one m-bit sample of ``D`` at requested accuracy ``eps``."""

    declared_accuracy: Fraction = Fraction(0)

    def sample(self, D: FiniteDistribution, eps: Fraction, bits: Iterator[int]) -> BitString:
        raise NotImplementedError


class ExactSampler(Sampler):
    """Honest reference: samples ``D`` exactly whatever ``eps`` is."""

    def sample(self, D, eps, bits):
        return sample_exact(D, bits)

    def __repr__(self):
        return "ExactSampler()"


class FixedSampler(Sampler):
    """Ignores ``D`` and samples a fixed distribution ``C`` instead."""

    def __init__(self, C: FiniteDistribution, declared_accuracy: Fraction):
        self.C = C
        self.declared_accuracy = Fraction(declared_accuracy)

    @classmethod
    def against(cls, C: FiniteDistribution, D: FiniteDistribution) -> FixedSampler:
        return cls(C, tv_distance(C, D))

    def sample(self, D, eps, bits):
        if D.width != self.C.width:
            raise OracleFailure("sampler width does not match the instance")
        return sample_exact(self.C, bits)

    def __repr__(self):
        return f"FixedSampler({self.C!r}, declared_accuracy={self.declared_accuracy})"


def constant_sampler(y: BitString, D: FiniteDistribution) -> FixedSampler:
    return FixedSampler.against(FiniteDistribution.point(y), D)


class Searcher:
    def search(self, D: FiniteDistribution, params: ReductionParams, bits: Iterator[int]) -> Tuple:
        raise NotImplementedError


@dataclass
class HostSearcher(Searcher):
    """Arbitrary Python callable ``fn(D, params, bits) -> tuple``."""

    name: str
    fn: Callable

    def search(self, D, params, bits):
        Y = tuple(self.fn(D, params, bits))
        if len(Y) != params.N or any(len(y) != params.m for y in Y):
            raise OracleFailure(f"host searcher {self.name!r} returned a malformed tuple")
        return Y

    def descriptor(self) -> str:
        return f"host:{self.name}"


@dataclass
class MachineSearcher(Searcher):
    """A toy-machine program run on ``z(D, k)`` with ``rho`` random bits."""

    program: Program
    rho: int
    budget: ExecBudget = field(default=DEFAULT_BUDGET)

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be non-negative")

    def output(self, z: BitString, r: BitString):
        return run(self.program, z, r, self.budget)

    def search(self, D, params, bits):
        r = "".join("1" if next(bits) else "0" for _ in range(self.rho))
        outcome = self.output(z_encoding(D, params.k), r)
        if not outcome.halted:
            raise OracleFailure(f"searcher aborted: {outcome.status.name}")
        if len(outcome.output) != params.tuple_bits:
            raise OracleFailure(f"searcher printed {len(outcome.output)} bits, expected {params.tuple_bits}")
        return split_tuple(outcome.output, params.N, params.m)

    def descriptor(self) -> str:
        return f"machine:{self.program.literal()},rho={self.rho}"


def _host_exact(D, params, bits):
    return tuple(sample_exact(D, bits) for _ in range(params.N))


def _host_constant(D, params, bits):
    return (D.support[0],) * params.N


def _host_zeros(D, params, bits):
    return ("0" * params.m,) * params.N


HOST_PLUGINS: dict[str, Callable] = {
    "exact": _host_exact,
    "constant": _host_constant,
    "zeros": _host_zeros,
}


def uniform_searcher(bits_out: int, budget: ExecBudget = DEFAULT_BUDGET) -> MachineSearcher:
    """``(RDR OUT) * bits_out``: prints fresh random bits."""
    return MachineSearcher(Program(bytes([7, 5] * bits_out)), bits_out, budget)


def parse_searcher(text: str, budget: ExecBudget = DEFAULT_BUDGET) -> Searcher:
    """``host:<plugin>`` or ``machine:bits:<len>:0x<hex>,rho=<int>``."""
    kind, _, rest = text.partition(":")
    if kind == "host":
        if rest not in HOST_PLUGINS:
            raise ValueError(f"unknown host plugin {rest!r}; known: {sorted(HOST_PLUGINS)}")
        return HostSearcher(rest, HOST_PLUGINS[rest])
    if kind == "machine":
        lit, sep, rho = rest.partition(",rho=")
        if not sep:
            raise ValueError("machine searcher needs ',rho=<int>'")
        return MachineSearcher(validate(parse_literal(lit)), int(rho), budget)
    raise ValueError(f"bad searcher descriptor {text!r}")
