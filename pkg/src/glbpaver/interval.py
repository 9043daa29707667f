"""Closed floating-point intervals and boxes with outward rounding."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _rounding as R

__all__ = [
    "Box", "EMPTY", "Interval", "add", "bisect", "box_width", "div",
    "format_float", "intersect", "midpoint", "mul", "neg", "parse_interval",
    "power", "sqr", "sqrt", "sub", "width",
]


def format_float(x: float) -> str:
    """Shortest text that round-trips to the same float."""
    return repr(float(x))


@dataclass(frozen=True, slots=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            # canonical empty sentinel
            lo, hi = math.inf, -math.inf
        elif lo == math.inf or hi == -math.inf:
            raise ValueError(f"[{lo}, {hi}] contains no real number")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: float) -> Interval:
        return cls(x, x)

    @classmethod
    def entire(cls) -> Interval:
        return cls(-math.inf, math.inf)

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    def width(self) -> float:
        if self.is_empty:
            raise ValueError("width of an empty interval")
        return R.width_up(self.lo, self.hi)

    def midpoint(self) -> float:
        if self.is_empty:
            raise ValueError("midpoint of an empty interval")
        return R.midpoint(self.lo, self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def subset(self, other: Interval) -> bool:
        if self.is_empty:
            return True
        return other.lo <= self.lo and self.hi <= other.hi

    def interior_of(self, other: Interval) -> bool:
        """True when self lies in the topological interior of other."""
        if self.is_empty:
            return True
        return other.lo < self.lo and self.hi < other.hi

    def _wrap(self, pair) -> Interval:
        return Interval(*pair)

    def __add__(self, other: Interval) -> Interval:
        other = _as_interval(other)
        return Interval(*R.i_add(self.lo, self.hi, other.lo, other.hi))

    __radd__ = __add__

    def __sub__(self, other: Interval) -> Interval:
        other = _as_interval(other)
        return Interval(*R.i_sub(self.lo, self.hi, other.lo, other.hi))

    def __rsub__(self, other) -> Interval:
        return _as_interval(other) - self

    def __mul__(self, other: Interval) -> Interval:
        other = _as_interval(other)
        return Interval(*R.i_mul(self.lo, self.hi, other.lo, other.hi))

    __rmul__ = __mul__

    def __truediv__(self, other: Interval) -> Interval:
        other = _as_interval(other)
        return Interval(*R.i_div(self.lo, self.hi, other.lo, other.hi))

    def __rtruediv__(self, other) -> Interval:
        return _as_interval(other) / self

    def __neg__(self) -> Interval:
        return Interval(*R.i_neg(self.lo, self.hi))

    def __pow__(self, k: int) -> Interval:
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        return Interval(*R.i_pow(self.lo, self.hi, int(k)))

    def sqr(self) -> Interval:
        return Interval(*R.i_sqr(self.lo, self.hi))

    def sqrt(self) -> Interval:
        return Interval(*R.i_sqrt(self.lo, self.hi))

    def __and__(self, other: Interval) -> Interval:
        return Interval(*R.i_meet(self.lo, self.hi, other.lo, other.hi))

    def hull(self, other: Interval) -> Interval:
        return Interval(*R.i_hull(self.lo, self.hi, other.lo, other.hi))

    def __str__(self) -> str:
        if self.is_empty:
            return "[empty]"
        return f"[{format_float(self.lo)},{format_float(self.hi)}]"


EMPTY = Interval(math.inf, -math.inf)


def _as_interval(x) -> Interval:
    if isinstance(x, Interval):
        return x
    return Interval(float(x), float(x))


# module-level aliases matching the operation names used in the docs
def add(a: Interval, b: Interval) -> Interval:
    return a + b


def sub(a: Interval, b: Interval) -> Interval:
    return a - b


def mul(a: Interval, b: Interval) -> Interval:
    return a * b


def div(a: Interval, b: Interval) -> Interval:
    return a / b


def neg(a: Interval) -> Interval:
    return -a


def sqr(a: Interval) -> Interval:
    return a.sqr()


def power(a: Interval, k: int) -> Interval:
    return a**k


def sqrt(a: Interval) -> Interval:
    return a.sqrt()


def intersect(a: Interval, b: Interval) -> Interval:
    return a & b


def width(x: Interval) -> float:
    return x.width()


def midpoint(x: Interval) -> float:
    return x.midpoint()


def parse_interval(text: str) -> Interval:
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ValueError(f"not an interval: {text!r}")
    lo, hi = body[1:-1].split(",")
    return Interval(float(lo), float(hi))


class Box:
    """Immutable vector of intervals stored as two float arrays.

    A box with any empty component is normalized to the empty box of the
    same dimension.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo: Sequence[float] | np.ndarray,
                 hi: Sequence[float] | np.ndarray):
        lo = np.array(lo, dtype=np.float64)
        hi = np.array(hi, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be 1-d arrays of equal length")
        if np.isnan(lo).any() or np.isnan(hi).any():
            raise ValueError("box endpoints must not be NaN")
        if (lo > hi).any():
            lo[:] = math.inf
            hi[:] = -math.inf
        lo.flags.writeable = False
        hi.flags.writeable = False
        self.lo = lo
        self.hi = hi

    @classmethod
    def from_intervals(cls, components: Iterable[Interval]) -> Box:
        comps = list(components)
        return cls([c.lo for c in comps], [c.hi for c in comps])

    @classmethod
    def empty(cls, n: int) -> Box:
        return cls(np.full(n, math.inf), np.full(n, -math.inf))

    def __len__(self) -> int:
        return self.lo.shape[0]

    def __getitem__(self, i: int) -> Interval:
        return Interval(self.lo[i], self.hi[i])

    def __iter__(self) -> Iterator[Interval]:
        for i in range(len(self)):
            yield self[i]

    @property
    def is_empty(self) -> bool:
        return len(self) > 0 and bool(self.lo[0] > self.hi[0])

    def width(self) -> float:
        """Largest component width (rounded up)."""
        if self.is_empty:
            raise ValueError("width of an empty box")
        if len(self) == 0:
            return 0.0
        return max(R.width_up(a, b) for a, b in zip(self.lo, self.hi))

    def midpoint(self) -> np.ndarray:
        return np.array([R.midpoint(a, b) for a, b in zip(self.lo, self.hi)])

    def contains(self, point: Sequence[float]) -> bool:
        p = np.asarray(point, dtype=np.float64)
        return bool(np.all(self.lo <= p) and np.all(p <= self.hi))

    def subset(self, other: Box) -> bool:
        if self.is_empty:
            return True
        return bool(np.all(other.lo <= self.lo) and np.all(self.hi <= other.hi))

    def replace(self, i: int, comp: Interval) -> Box:
        lo, hi = self.lo.copy(), self.hi.copy()
        lo[i], hi[i] = comp.lo, comp.hi
        return Box(lo, hi)

    def bisect(self, i: int) -> tuple[Box, Box]:
        """Split component ``i`` at its midpoint."""
        if self.is_empty:
            raise ValueError("cannot bisect an empty box")
        a, b = float(self.lo[i]), float(self.hi[i])
        if math.isinf(a) or math.isinf(b):
            raise ValueError(f"component {i} is unbounded")
        m = R.midpoint(a, b)
        if not (a < m < b):
            raise ValueError(f"component {i} is too narrow to split")
        left_hi = self.hi.copy()
        right_lo = self.lo.copy()
        left_hi[i] = m
        right_lo[i] = m
        return Box(self.lo, left_hi), Box(right_lo, self.hi)

    def key(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """Hashable exact representation."""
        return tuple(self.lo.tolist()), tuple(self.hi.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Box):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self) + ")"

    def __repr__(self) -> str:
        return f"Box{self}"


def box_width(b: Box) -> float:
    return b.width()


def bisect(b: Box, i: int) -> tuple[Box, Box]:
    return b.bisect(i)
