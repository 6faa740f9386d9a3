"""A single inequality record ``lhs <= rhs + slack`` shared by every verifier."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import mpmath

SLACK = Fraction(1, 2**40)
DEFAULT_PREC = 128

# Significant decimal digits used when serializing reals (> 128 bits).
_DIGITS = 45


def format_value(v: Any) -> Any:
    """JSON-friendly rendering: rationals as ``"n/d"``, reals as decimal strings."""
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, mpmath.mpf):
        if mpmath.isinf(v):
            return "inf" if v > 0 else "-inf"
        return mpmath.nstr(v, _DIGITS, min_fixed=-mpmath.inf, max_fixed=mpmath.inf)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, dict):
        return {str(k): format_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [format_value(x) for x in v]
    return v


def parse_value(s) -> Fraction | mpmath.mpf:
    """Inverse of :func:`format_value` for numeric fields."""
    if isinstance(s, int):
        return Fraction(s)
    if s in ("inf", "-inf"):
        return mpmath.mpf(s)
    if "/" in s or s.lstrip("-").isdigit():
        return Fraction(s)
    with mpmath.workprec(DEFAULT_PREC + 32):
        return mpmath.mpf(s)


def leq(lhs, rhs, slack=0, prec: int = DEFAULT_PREC) -> bool:
    """``lhs <= rhs + slack``; exact when all three are rational."""
    if all(isinstance(x, (int, Fraction)) for x in (lhs, rhs, slack)):
        return lhs <= rhs + slack
    with mpmath.workprec(prec):
        return _mpf(lhs) <= _mpf(rhs) + _mpf(slack)


def _mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


@dataclass(frozen=True)
class Check:
    name: str
    lhs: Any
    rhs: Any
    slack: Any = 0
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return leq(self.lhs, self.rhs, self.slack)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "lhs": format_value(self.lhs),
            "rhs": format_value(self.rhs),
            "slack": format_value(self.slack),
            "pass": self.passed,
            "detail": format_value(self.detail),
        }

    @classmethod
    def from_json(cls, d: dict) -> Check:
        """Rebuild a record from :meth:`to_json` output so its verdict can be recomputed."""
        return cls(d["name"], parse_value(d["lhs"]), parse_value(d["rhs"]),
                   parse_value(d["slack"]), d.get("detail", {}))

    def __str__(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] {self.name}: {format_value(self.lhs)} <= "
                f"{format_value(self.rhs)} + {format_value(self.slack)}")
