"""Outward-rounded interval arithmetic on doubles.

Rounding is emulated by bumping every computed endpoint outward by a relative
slack of 2**-50 (eight units in the last place), which dominates the
round-to-nearest error of a single IEEE operation on normal numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

from blenderlab.errors import SingularError

SLACK = 2.0 ** -50

Number = Union[int, float]


def round_down(v: float) -> float:
    if v > 0:
        return v * (1.0 - SLACK)
    return v * (1.0 + SLACK)


def round_up(v: float) -> float:
    if v > 0:
        return v * (1.0 + SLACK)
    return v * (1.0 - SLACK)


def _out(lo: float, hi: float) -> "Interval":
    return Interval(round_down(lo), round_up(hi))


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]``."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, v: Number) -> "Interval":
        return cls(v, v)

    @classmethod
    def around(cls, center: Number, radius: Number) -> "Interval":
        return _out(center - radius, center + radius)

    @classmethod
    def hull_of(cls, values: Iterable[Number]) -> "Interval":
        vals = [float(v) for v in values]
        return cls(min(vals), max(vals))

    # ---- queries -----------------------------------------------------
    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def rad(self) -> float:
        return 0.5 * (self.hi - self.lo)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> float:
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def contains(self, other: Union["Interval", Number]) -> bool:
        if isinstance(other, Interval):
            return self.lo <= other.lo and other.hi <= self.hi
        return self.lo <= other <= self.hi

    def __contains__(self, other) -> bool:
        return self.contains(other)

    def interior_contains(self, other: Union["Interval", Number]) -> bool:
        if isinstance(other, Interval):
            return self.lo < other.lo and other.hi < self.hi
        return self.lo < other < self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersection(self, other: "Interval") -> "Interval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    def hull(self, other: Union["Interval", Number]) -> "Interval":
        other = _coerce(other)
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def inflate(self, r: float) -> "Interval":
        return _out(self.lo - r, self.hi + r)

    def split(self, n: int) -> list["Interval"]:
        edges = [self.lo + (self.hi - self.lo) * k / n for k in range(n + 1)]
        edges[-1] = self.hi
        return [Interval(edges[k], edges[k + 1]) for k in range(n)]

    def __iter__(self) -> Iterator[float]:
        yield self.lo
        yield self.hi

    # ---- arithmetic --------------------------------------------------
    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __pos__(self) -> "Interval":
        return self

    def __add__(self, other) -> "Interval":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return _out(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __sub__(self, other) -> "Interval":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return _out(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other) -> "Interval":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other) -> "Interval":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.lo == self.hi and other.lo == other.hi:
            p = self.lo * other.lo
            return _out(p, p)
        prods = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return _out(min(prods), max(prods))

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        if self.lo <= 0.0 <= self.hi:
            raise SingularError(f"division by interval containing 0: [{self.lo}, {self.hi}]")
        return _out(1.0 / self.hi, 1.0 / self.lo)

    def __truediv__(self, other) -> "Interval":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.lo <= 0.0 <= other.hi:
            raise SingularError(f"division by interval containing 0: [{other.lo}, {other.hi}]")
        quots = (self.lo / other.lo, self.lo / other.hi, self.hi / other.lo, self.hi / other.hi)
        return _out(min(quots), max(quots))

    def __rtruediv__(self, other) -> "Interval":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, k: int) -> "Interval":
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        if k == 0:
            return Interval(1.0, 1.0)
        if k == 1:
            return self
        a, b = self.lo ** k, self.hi ** k
        if k % 2 == 0:
            if self.lo <= 0.0 <= self.hi:
                return _out(0.0, max(a, b))
            return _out(min(a, b), max(a, b))
        return _out(a, b)

    def __abs__(self) -> "Interval":
        return Interval(self.mig(), self.mag())

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def to_list(self) -> list[float]:
        return [self.lo, self.hi]


def _coerce(v) -> Interval:
    if isinstance(v, Interval):
        return v
    if isinstance(v, (int, float)):
        return Interval(v, v)
    try:
        f = float(v)
    except (TypeError, ValueError):
        return NotImplemented
    return Interval(f, f)


@dataclass(frozen=True)
class Box2:
    """Product ``x × y`` of two intervals."""

    x: Interval
    y: Interval

    @classmethod
    def from_bounds(cls, xlo: float, xhi: float, ylo: float, yhi: float) -> "Box2":
        return cls(Interval(xlo, xhi), Interval(ylo, yhi))

    @classmethod
    def centered(cls, cx: float, cy: float, rx: float, ry: float) -> "Box2":
        return cls(Interval(cx - rx, cx + rx), Interval(cy - ry, cy + ry))

    @classmethod
    def point(cls, x: float, y: float) -> "Box2":
        return cls(Interval(x, x), Interval(y, y))

    @property
    def center(self) -> tuple[float, float]:
        return (self.x.mid, self.y.mid)

    @property
    def widths(self) -> tuple[float, float]:
        return (self.x.width, self.y.width)

    def corners(self) -> list[tuple[float, float]]:
        return [(self.x.lo, self.y.lo), (self.x.hi, self.y.lo), (self.x.hi, self.y.hi), (self.x.lo, self.y.hi)]

    def contains_point(self, p) -> bool:
        return self.x.contains(float(p[0])) and self.y.contains(float(p[1]))

    def contains(self, other: "Box2") -> bool:
        return self.x.contains(other.x) and self.y.contains(other.y)

    def interior_contains(self, other: "Box2") -> bool:
        return self.x.interior_contains(other.x) and self.y.interior_contains(other.y)

    def intersects(self, other: "Box2") -> bool:
        return self.x.intersects(other.x) and self.y.intersects(other.y)

    def hull(self, other: "Box2") -> "Box2":
        return Box2(self.x.hull(other.x), self.y.hull(other.y))

    def inflate(self, rx: float, ry: float | None = None) -> "Box2":
        return Box2(self.x.inflate(rx), self.y.inflate(rx if ry is None else ry))

    def split(self, nx: int, ny: int | None = None) -> list["Box2"]:
        ny = nx if ny is None else ny
        return [Box2(bx, by) for bx in self.x.split(nx) for by in self.y.split(ny)]

    def separation(self, other: "Box2") -> float:
        """Chebyshev gap between the boxes (negative if they overlap)."""
        gx = max(other.x.lo - self.x.hi, self.x.lo - other.x.hi)
        gy = max(other.y.lo - self.y.hi, self.y.lo - other.y.hi)
        return max(gx, gy)

    def to_list(self) -> list[list[float]]:
        return [self.x.to_list(), self.y.to_list()]

    @classmethod
    def from_list(cls, data) -> "Box2":
        return cls(Interval(*data[0]), Interval(*data[1]))


def interval_image(matrix, offset, box: Box2) -> Box2:
    """Enclosure of the affine image ``matrix @ p + offset`` over ``box``."""
    (a, b), (c, d) = matrix
    x = box.x * a + box.y * b + offset[0]
    y = box.x * c + box.y * d + offset[1]
    return Box2(x, y)
