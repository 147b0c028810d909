"""Commutative semirings used for aggregation and range sums.

Values are plain Python objects: ``bool`` for boolean, ``int`` for counting,
``float`` (with ``inf``) for the two tropical variants and ``frozenset`` for
setunion.  Each instance knows how to parse and print its carrier so CSV
weights and query defaults round-trip.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .errors import ParseError, SemiringOverflow, UnknownSemiring

INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1


@dataclass(frozen=True)
class Semiring:
    name: str
    zero: Any
    one: Any
    _plus: Callable[[Any, Any], Any]
    _times: Callable[[Any, Any], Any]
    _parse: Callable[[str], Any]
    _format: Callable[[Any], str]
    has_additive_inverse: bool = False
    plus_idempotent: bool = False
    _neg: Optional[Callable[[Any], Any]] = None

    def plus(self, a, b):
        return self._plus(a, b)

    def times(self, a, b):
        return self._times(a, b)

    def neg(self, a):
        if self._neg is None:
            raise TypeError(f"{self.name} has no additive inverse")
        return self._neg(a)

    def is_zero(self, a) -> bool:
        return a == self.zero

    def sum(self, values) -> Any:
        acc = self.zero
        for v in values:
            acc = self._plus(acc, v)
        return acc

    def product(self, values) -> Any:
        acc = self.one
        for v in values:
            acc = self._times(acc, v)
        return acc

    def parse(self, text: str):
        try:
            return self._parse(text.strip())
        except (ValueError, TypeError) as exc:
            raise ParseError(f"bad {self.name} value {text!r}") from exc

    def format(self, value) -> str:
        return self._format(value)

    def __repr__(self) -> str:
        return f"Semiring({self.name})"


def _checked(x: int) -> int:
    if x < INT64_MIN or x > INT64_MAX:
        raise SemiringOverflow(f"counting value {x} leaves the 64-bit range")
    return x


def _parse_bool(s: str) -> bool:
    low = s.lower()
    if low in ("1", "true", "t", "yes"):
        return True
    if low in ("0", "false", "f", "no"):
        return False
    raise ValueError(s)


def _parse_int(s: str) -> int:
    return _checked(int(s))


def _parse_float(s: str) -> float:
    v = float(s)
    if math.isnan(v):
        raise ValueError(s)
    return v


def _fmt_float(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if v == int(v):
        return str(int(v))
    return repr(v)


# setunion: finite sets of integers under union, with an adjoined absorbing
# zero (None) so that times has an annihilator.


def _su_plus(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a | b


def _su_times(a, b):
    if a is None or b is None:
        return None
    return a | b


def _su_parse(s: str):
    if s.lower() in ("none", "bot", "zero"):
        return None
    if not (s.startswith("{") and s.endswith("}")):
        raise ValueError(s)
    inner = s[1:-1].strip()
    if not inner:
        return frozenset()
    return frozenset(int(p) for p in inner.split(";"))


def _su_format(v) -> str:
    if v is None:
        return "none"
    return "{" + ";".join(str(x) for x in sorted(v)) + "}"


BOOLEAN = Semiring(
    "boolean", False, True,
    lambda a, b: a or b, lambda a, b: a and b,
    _parse_bool, lambda v: "true" if v else "false",
    plus_idempotent=True,
)

COUNTING = Semiring(
    "counting", 0, 1,
    lambda a, b: _checked(a + b), lambda a, b: _checked(a * b),
    _parse_int, str,
    has_additive_inverse=True,
    _neg=lambda a: _checked(-a),
)

TROPICAL = Semiring(
    "tropical", math.inf, 0.0,
    min, lambda a, b: a + b,
    _parse_float, _fmt_float,
    plus_idempotent=True,
)

MAX_TROPICAL = Semiring(
    "max_tropical", -math.inf, 0.0,
    max, lambda a, b: a + b,
    _parse_float, _fmt_float,
    plus_idempotent=True,
)

SETUNION = Semiring(
    "setunion", None, frozenset(),
    _su_plus, _su_times,
    _su_parse, _su_format,
    plus_idempotent=True,
)

_INSTANCES = {s.name: s for s in (BOOLEAN, COUNTING, TROPICAL, MAX_TROPICAL, SETUNION)}


def instance(name: str) -> Semiring:
    try:
        return _INSTANCES[name]
    except KeyError:
        raise UnknownSemiring(f"unknown semiring {name!r}; choose from {sorted(_INSTANCES)}") from None


def names() -> list[str]:
    return sorted(_INSTANCES)
