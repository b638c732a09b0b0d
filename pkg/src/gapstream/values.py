"""Value domain shared by concrete and abstract streams.

Concrete event payloads are plain Python values: bool, int, Fraction, the
UNIT marker, or domain extensions registered elsewhere (timed queues).
Abstract payloads additionally use TOP (any value of the base domain) and
closed Intervals over rationals.

Three sentinels describe per-timestamp stream cells:
  BOTTOM  no event at this covered timestamp
  UNKNOWN timestamp beyond the stream's progress
  GAP     timestamp inside an unknown region of an abstract stream
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .timeline import INF, _Infinity


class _Marker:
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __repr__(self):
        return self.name

    def __deepcopy__(self, memo):
        return self

    def __copy__(self):
        return self


UNIT = _Marker("unit")
BOTTOM = _Marker("bottom")
UNKNOWN = _Marker("unknown")
GAP = _Marker("gap")
TOP = _Marker("top")

NEG_INF = _Marker("-inf")


def _ext_le(a, b) -> bool:
    """Order on Fraction extended with NEG_INF and INF."""
    if a is NEG_INF or b is INF:
        return True
    if a is INF:
        return b is INF
    if b is NEG_INF:
        return a is NEG_INF
    return a <= b


@dataclass(frozen=True)
class Interval:
    """Closed rational interval, possibly unbounded; top is [-inf, inf]."""

    lo: Union[Fraction, _Marker]
    hi: Union[Fraction, _Marker, _Infinity]

    def __post_init__(self):
        if not _ext_le(self.lo, self.hi):
            raise ValueError(f"interval bounds out of order: [{self.lo}, {self.hi}]")

    @staticmethod
    def of(lo, hi) -> "Interval":
        lo = lo if lo in (NEG_INF, INF) else Fraction(lo)
        hi = hi if hi in (NEG_INF, INF) else Fraction(hi)
        return Interval(lo, hi)

    @staticmethod
    def single(x) -> "Interval":
        x = Fraction(x)
        return Interval(x, x)

    @staticmethod
    def top() -> "Interval":
        return Interval(NEG_INF, INF)

    def is_single(self) -> bool:
        return self.lo == self.hi and isinstance(self.lo, Fraction)

    def is_top(self) -> bool:
        return self.lo is NEG_INF and self.hi is INF

    def hull(self, other: "Interval") -> "Interval":
        lo = self.lo if _ext_le(self.lo, other.lo) else other.lo
        hi = other.hi if _ext_le(self.hi, other.hi) else self.hi
        return Interval(lo, hi)

    def contains_value(self, x: Fraction) -> bool:
        return _ext_le(self.lo, x) and _ext_le(x, self.hi)

    def within(self, other: "Interval") -> bool:
        return _ext_le(other.lo, self.lo) and _ext_le(self.hi, other.hi)

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"


def value_eq(a, b) -> bool:
    """Decidable equality across all value variants.

    bool and int are kept distinct (1 != True as stream payloads), and
    Fraction/int compare by numeric value only within the same kind family.
    """
    if isinstance(a, bool) != isinstance(b, bool):
        return False
    return type(a) == type(b) and a == b or (
        not isinstance(a, bool)
        and isinstance(a, (int, Fraction))
        and isinstance(b, (int, Fraction))
        and a == b
    )
