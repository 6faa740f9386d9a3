"""Bit strings, Elias gamma codes, hex literals and reproducible bit sources.

Bit strings are plain ``str`` objects over the alphabet ``{'0', '1'}``.  For a
fixed length, Python's string ordering is the canonical lexicographic order.

Seeded bit streams use a counter construction so that any (seed, stream)
pair can be regenerated independently of all others::

    block_j = SHA-256(b"sskit/bits/v1" || seed || stream || j)

with ``seed``, ``stream`` and ``j`` each encoded as 8-byte big-endian
unsigned integers.  Blocks are read most-significant bit first.
"""

from __future__ import annotations

import hashlib
import itertools
import re
from collections.abc import Iterator

BitString = str

_BITS_RE = re.compile(r"^[01]*$")
_LITERAL_RE = re.compile(r"^bits:(\d+):0x([0-9a-fA-F]+)$")


class BitsExhausted(Exception):
    """A finite bit source ran out of bits."""


def is_bits(s: str) -> bool:
    return isinstance(s, str) and _BITS_RE.match(s) is not None


def check_bits(s: str, width: int | None = None) -> BitString:
    if not is_bits(s):
        raise ValueError(f"not a bit string: {s!r}")
    if width is not None and len(s) != width:
        raise ValueError(f"expected {width} bits, got {len(s)}: {s!r}")
    return s


def all_strings(width: int) -> Iterator[BitString]:
    """Every bit string of the given width, in lexicographic order."""
    for combo in itertools.product("01", repeat=width):
        yield "".join(combo)


def to_literal(bits: BitString) -> str:
    """Format as ``bits:<len>:0x<hex>``."""
    value = int(bits, 2) if bits else 0
    return f"bits:{len(bits)}:0x{value:x}"


def parse_literal(text: str) -> BitString:
    """Inverse of :func:`to_literal`.  A bare 0/1 string is also accepted."""
    text = text.strip()
    m = _LITERAL_RE.match(text)
    if m is None:
        if is_bits(text):
            return text
        raise ValueError(f"bad bit literal: {text!r}")
    length = int(m.group(1))
    value = int(m.group(2), 16)
    if value.bit_length() > length:
        raise ValueError(f"literal {text!r} has more than {length} significant bits")
    return format(value, "b").zfill(length) if length else ""


def gamma(n: int) -> BitString:
    """Elias gamma code of ``n >= 1``: floor(log2 n) zeros, then n in binary."""
    if n < 1:
        raise ValueError("gamma code is defined for n >= 1")
    body = format(n, "b")
    return "0" * (len(body) - 1) + body


def read_gamma(bits: BitString, pos: int = 0) -> tuple[int, int]:
    """Decode one gamma codeword starting at ``pos``; return ``(n, next_pos)``.

    Raises ``ValueError`` when the codeword is cut off.
    """
    zeros = 0
    while pos + zeros < len(bits) and bits[pos + zeros] == "0":
        zeros += 1
    end = pos + 2 * zeros + 1
    if end > len(bits):
        raise ValueError("truncated gamma codeword")
    return int(bits[pos + zeros:end], 2), end


def gamma_length(n: int) -> int:
    return 2 * (n.bit_length() - 1) + 1


class SeededBits:
    """Unbounded deterministic bit stream for one (seed, stream) pair."""

    def __init__(self, seed: int, stream: int = 0):
        if seed < 0 or stream < 0:
            raise ValueError("seed and stream must be non-negative")
        self.seed = seed
        self.stream = stream
        self.consumed = 0
        self._gen = self._blocks()

    def _blocks(self) -> Iterator[int]:
        prefix = b"sskit/bits/v1" + self.seed.to_bytes(8, "big") + self.stream.to_bytes(8, "big")
        for j in itertools.count():
            digest = hashlib.sha256(prefix + j.to_bytes(8, "big")).digest()
            for byte in digest:
                for shift in range(7, -1, -1):
                    yield (byte >> shift) & 1

    def __iter__(self):
        return self

    def __next__(self) -> int:
        self.consumed += 1
        return next(self._gen)

    def take(self, n: int) -> BitString:
        return "".join("1" if next(self) else "0" for _ in range(n))


class FixedBits:
    """A finite bit source; reading past the end raises :class:`BitsExhausted`."""

    def __init__(self, bits: BitString):
        self.bits = check_bits(bits)
        self.consumed = 0

    def __iter__(self):
        return self

    def __next__(self) -> int:
        if self.consumed >= len(self.bits):
            raise BitsExhausted(f"all {len(self.bits)} bits consumed")
        b = self.bits[self.consumed]
        self.consumed += 1
        return 1 if b == "1" else 0

    def take(self, n: int) -> BitString:
        return "".join("1" if next(self) else "0" for _ in range(n))
