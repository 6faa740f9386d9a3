"""A toy prefix-free universal machine.

Programs are self-delimiting: ``gamma(len(body) + 1) || body``, where the body
is a sequence of 3-bit opcodes (MSB first) with matched brackets.

=====  ======  ============================================================
bits   name    effect
=====  ======  ============================================================
000    MOVR    head right; fresh cells read 0
001    MOVL    head left; leaving cell 0 aborts (ABORT_LEFT_EDGE)
010    FLIP    toggle the current cell
011    LOOP    ``[``: if the cell is 0, jump past the matching ``]``
100    END     ``]``: if the cell is not 0, jump just after the matching ``[``
101    OUT     append the current cell to the output
110    RDZ     read the next conditional-tape bit into the cell
111    RDR     read the next random-tape bit into the cell
=====  ======  ============================================================

A run halts when the instruction pointer passes the last opcode.  Each opcode
executed costs one step (jumps included).  Reading past the end of either
input tape aborts, as do exceeding the step budget, visiting more distinct
cells than the space budget, and emitting more bits than the output cap.
"""

from __future__ import annotations

import enum
import hashlib
from collections.abc import Iterator
from dataclasses import dataclass
from functools import cached_property

from ..bits import BitString, check_bits, gamma, gamma_length, parse_literal, read_gamma, to_literal
from . import kernel

MNEMONICS = ("MOVR", "MOVL", "FLIP", "LOOP", "END", "OUT", "RDZ", "RDR")
MOVR, MOVL, FLIP, LOOP, END, OUT, RDZ, RDR = range(8)
_ALIASES = {"[": LOOP, "]": END, **{name: i for i, name in enumerate(MNEMONICS)}}

ISA_TEXT = """sskit prefix machine v1
header: elias-gamma(body_len + 1); body: 3-bit opcodes, MSB first
000 MOVR head+1; abort SPACE if head+1 >= max_cells
001 MOVL head-1; abort LEFT_EDGE at cell 0
010 FLIP cell ^= 1
011 LOOP if cell == 0: ip = match(ip)
100 END  if cell != 0: ip = match(ip)
101 OUT  abort OUTPUT_CAP if len(out) == cap; out += cell
110 RDZ  abort OVERREAD_Z at end of z; cell = next z bit
111 RDR  abort OVERREAD_R at end of r; cell = next r bit
step: abort STEPS if steps == max_steps; steps += 1; execute; ip += 1
halt: ip == len(body); cells_used = distinct cells visited
"""
ISA_HASH = hashlib.sha256(ISA_TEXT.encode()).hexdigest()


class Status(enum.IntEnum):
    HALTED = 0
    ABORT_OVERREAD_Z = 1
    ABORT_OVERREAD_R = 2
    ABORT_STEPS = 3
    ABORT_SPACE = 4
    ABORT_OUTPUT_CAP = 5
    ABORT_LEFT_EDGE = 6


class ValidationError(ValueError):
    """Bits do not form a valid program."""


class MalformedHeaderError(ValidationError):
    pass


class MissingBitsError(ValidationError):
    pass


class TrailingBitsError(ValidationError):
    pass


class BodyAlignmentError(ValidationError):
    pass


class UnmatchedBracketError(ValidationError):
    pass


@dataclass(frozen=True)
class ExecBudget:
    max_steps: int = 4096
    max_cells: int = 256
    max_output_bits: int = 1024

    def __post_init__(self):
        if min(self.max_steps, self.max_cells, self.max_output_bits) < 1:
            raise ValueError("execution budgets must be strictly positive")

    def covers(self, other: ExecBudget) -> bool:
        return (self.max_steps >= other.max_steps and self.max_cells >= other.max_cells
                and self.max_output_bits >= other.max_output_bits)

    def as_args(self) -> tuple[int, int, int]:
        return self.max_steps, self.max_cells, self.max_output_bits

    def to_json(self) -> dict:
        return {"steps": self.max_steps, "cells": self.max_cells, "output_bits": self.max_output_bits}


DEFAULT_BUDGET = ExecBudget()


@dataclass(frozen=True)
class ExecOutcome:
    status: Status
    output: BitString
    steps_used: int
    cells_used: int
    z_bits_read: int
    r_bits_read: int

    @property
    def halted(self) -> bool:
        return self.status is Status.HALTED


@dataclass(frozen=True)
class Program:
    """A valid program, identified by its opcode body."""

    ops: bytes

    def __post_init__(self):
        ops = bytes(self.ops)
        if any(op > 7 for op in ops):
            raise ValueError("opcodes are 3-bit values")
        if kernel.match_brackets(ops) is None:
            raise UnmatchedBracketError("brackets are not matched")
        object.__setattr__(self, "ops", ops)

    @classmethod
    def from_asm(cls, text: str) -> Program:
        """Build from mnemonics, e.g. ``"FLIP [ OUT ]"``."""
        try:
            return cls(bytes(_ALIASES[tok.upper()] for tok in text.split()))
        except KeyError as exc:
            raise ValueError(f"unknown mnemonic {exc.args[0]!r}") from None

    @classmethod
    def from_literal(cls, text: str) -> Program:
        return validate(parse_literal(text))

    @property
    def body_length(self) -> int:
        return 3 * len(self.ops)

    @cached_property
    def header(self) -> BitString:
        return gamma(self.body_length + 1)

    @cached_property
    def body(self) -> BitString:
        return "".join(format(op, "03b") for op in self.ops)

    @cached_property
    def bits(self) -> BitString:
        return self.header + self.body

    def __len__(self) -> int:
        return total_length(len(self.ops))

    def asm(self) -> str:
        return " ".join(MNEMONICS[op] for op in self.ops)

    def literal(self) -> str:
        return to_literal(self.bits)

    def __repr__(self):
        return f"Program({self.asm()!r}, len={len(self)})"


def total_length(n_ops: int) -> int:
    """Total encoded length of a program with ``n_ops`` opcodes."""
    body = 3 * n_ops
    return gamma_length(body + 1) + body


def layers(L_max: int) -> Iterator[int]:
    """Opcode counts whose encoded length fits in ``L_max`` bits, ascending."""
    n = 0
    while total_length(n) <= L_max:
        yield n
        n += 1


def validate(bits: BitString) -> Program:
    """Parse raw bits as a program, raising a specific :class:`ValidationError`."""
    try:
        check_bits(bits)
    except ValueError as exc:
        raise MalformedHeaderError(str(exc)) from None
    try:
        n, pos = read_gamma(bits)
    except ValueError:
        raise MalformedHeaderError("header is not a complete gamma codeword") from None
    body_len = n - 1
    if body_len % 3:
        raise BodyAlignmentError(f"body length {body_len} is not a multiple of 3")
    body = bits[pos:]
    if len(body) < body_len:
        raise MissingBitsError(f"header announces {body_len} body bits, got {len(body)}")
    if len(body) > body_len:
        raise TrailingBitsError(f"{len(body) - body_len} bits after the body")
    return Program(bytes(int(body[i:i + 3], 2) for i in range(0, body_len, 3)))


def _ascii(bits: BitString) -> bytes:
    return check_bits(bits).encode("ascii")


def run(p: Program, z: BitString = "", r: BitString = "",
        budget: ExecBudget = DEFAULT_BUDGET) -> ExecOutcome:
    status, out, steps, cells, zr, rr = kernel.run_ops(p.ops, _ascii(z), _ascii(r), *budget.as_args())
    return ExecOutcome(Status(status), out.decode("ascii"), steps, cells, zr, rr)


def programs(L_max: int) -> Iterator[Program]:
    """Every valid program of length <= L_max, by length then lexicographically."""
    for n in layers(L_max):
        for ops in kernel.iter_bodies(n):
            yield Program(ops)


def enumerate_programs(L_max: int, z: BitString = "", r: BitString = "",
                       budget: ExecBudget = DEFAULT_BUDGET) -> Iterator[tuple[Program, ExecOutcome]]:
    """Lazily pair every valid program of length <= L_max with its run outcome."""
    for p in programs(L_max):
        yield p, run(p, z, r, budget)


__all__ = [
    "BodyAlignmentError", "DEFAULT_BUDGET", "ExecBudget", "ExecOutcome", "ISA_HASH", "ISA_TEXT",
    "MalformedHeaderError", "MissingBitsError", "MNEMONICS", "Program", "Status",
    "TrailingBitsError", "UnmatchedBracketError", "ValidationError", "enumerate_programs",
    "layers", "programs", "run", "total_length", "validate",
]
