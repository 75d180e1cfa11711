"""Sparse bivariate polynomials and polynomial planar maps.

Transition maps are polynomials of degree at most six.  Keeping them in
explicit monomial form makes composition exact and lets the renormalization
code carry coefficients as mpmath numbers when scalings leave double range.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

import numpy as np

from blenderlab.errors import ConfigError
from blenderlab.numerics.interval import Box2, Interval
from blenderlab.numerics.jet import Jet

_MONO = re.compile(r"^(x|y)(?:\^(\d+))?$")


def parse_monomial(text: str) -> tuple[int, int]:
    """``"1"``, ``"x"``, ``"y^2"``, ``"x*y^3"`` -> exponent pair."""
    s = text.replace(" ", "")
    if s in ("1", ""):
        return (0, 0)
    i = j = 0
    for factor in s.split("*"):
        m = _MONO.match(factor)
        if not m:
            raise ConfigError(f"cannot parse monomial {text!r}")
        e = int(m.group(2) or 1)
        if m.group(1) == "x":
            i += e
        else:
            j += e
    return (i, j)


def format_monomial(m: tuple[int, int]) -> str:
    i, j = m
    parts = []
    for name, e in (("x", i), ("y", j)):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"


def _zero(v) -> bool:
    try:
        return v == 0
    except Exception:
        return False


class Poly2:
    """Polynomial in ``x, y`` stored as ``{(i, j): coeff}``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int], Any] | None = None):
        self.terms = {tuple(k): v for k, v in (terms or {}).items() if not _zero(v)}

    @classmethod
    def constant(cls, c) -> "Poly2":
        return cls({(0, 0): c})

    @classmethod
    def x(cls) -> "Poly2":
        return cls({(1, 0): 1.0})

    @classmethod
    def y(cls) -> "Poly2":
        return cls({(0, 1): 1.0})

    @classmethod
    def from_table(cls, table: Mapping[str, float]) -> "Poly2":
        terms: dict = {}
        for key, value in table.items():
            m = parse_monomial(key)
            terms[m] = terms.get(m, 0.0) + float(value)
        return cls(terms)

    def to_table(self) -> dict[str, float]:
        return {format_monomial(m): float(c) for m, c in sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), -kv[0][0]))}

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=0)

    def coeff(self, i: int, j: int):
        return self.terms.get((i, j), 0.0)

    def map_coeffs(self, fn) -> "Poly2":
        return Poly2({m: fn(c) for m, c in self.terms.items()})

    # ---- algebra -----------------------------------------------------
    def __add__(self, other) -> "Poly2":
        other = _as_poly(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return Poly2(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly2":
        return Poly2({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly2":
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "Poly2":
        return _as_poly(other) - self

    def __mul__(self, other) -> "Poly2":
        if not isinstance(other, Poly2):
            return Poly2({m: c * other for m, c in self.terms.items()})
        out: dict = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                m = (i1 + i2, j1 + j2)
                t = c1 * c2
                out[m] = out[m] + t if m in out else t
        return Poly2(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly2":
        result = Poly2.constant(1.0)
        for _ in range(k):
            result = result * self
        return result

    def compose(self, px: "Poly2", py: "Poly2") -> "Poly2":
        """``self(px(x, y), py(x, y))`` computed exactly."""
        deg_x = max((i for i, _ in self.terms), default=0)
        deg_y = max((j for _, j in self.terms), default=0)
        powx = [Poly2.constant(1.0)]
        for _ in range(deg_x):
            powx.append(powx[-1] * px)
        powy = [Poly2.constant(1.0)]
        for _ in range(deg_y):
            powy.append(powy[-1] * py)
        out = Poly2()
        for (i, j), c in self.terms.items():
            out = out + (powx[i] * powy[j]) * c
        return out

    def scale_arguments(self, sx, sy) -> "Poly2":
        """``self(sx * x, sy * y)``."""
        return Poly2({(i, j): c * (sx ** i) * (sy ** j) for (i, j), c in self.terms.items()})

    def partial(self, var: int) -> "Poly2":
        out = {}
        for (i, j), c in self.terms.items():
            if var == 0 and i:
                out[(i - 1, j)] = c * i
            elif var == 1 and j:
                out[(i, j - 1)] = c * j
        return Poly2(out)

    # ---- evaluation --------------------------------------------------
    def eval(self, x, y):
        deg_x = max((i for i, _ in self.terms), default=0)
        deg_y = max((j for _, j in self.terms), default=0)
        if isinstance(x, Interval):
            px = [None] + [x ** k for k in range(1, deg_x + 1)]
            py = [None] + [y ** k for k in range(1, deg_y + 1)]
        else:
            px = [None, x]
            for _ in range(1, deg_x):
                px.append(px[-1] * x)
            py = [None, y]
            for _ in range(1, deg_y):
                py.append(py[-1] * y)
        total = None
        for (i, j), c in self.terms.items():
            if i and j:
                t = px[i] * py[j] * c
            elif i:
                t = px[i] * c
            elif j:
                t = py[j] * c
            else:
                t = c
            total = t if total is None else total + t
        if total is None:
            return x * 0.0 if isinstance(x, (Jet, Interval)) else 0.0
        if isinstance(x, (Jet, Interval)) and not isinstance(total, (Jet, Interval)):
            return x * 0.0 + total
        return total

    def equals(self, other: "Poly2", tol: float = 0.0) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(float(self.coeff(*k)) - float(other.coeff(*k))) <= tol for k in keys)

    def __repr__(self) -> str:
        return f"Poly2({self.to_table()})"


def _as_poly(v) -> Poly2:
    return v if isinstance(v, Poly2) else Poly2.constant(v)


@dataclass(frozen=True, eq=False)
class PolyMap:
    """Planar polynomial map ``(P(x, y), Q(x, y))``."""

    px: Poly2
    py: Poly2
    name: str = "poly"

    @classmethod
    def from_tables(cls, tx: Mapping[str, float], ty: Mapping[str, float], name: str = "poly") -> "PolyMap":
        return cls(Poly2.from_table(tx), Poly2.from_table(ty), name)

    @classmethod
    def affine(cls, matrix, offset, name: str = "affine") -> "PolyMap":
        (a, b), (c, d) = matrix
        return cls(
            Poly2({(0, 0): offset[0], (1, 0): a, (0, 1): b}),
            Poly2({(0, 0): offset[1], (1, 0): c, (0, 1): d}),
            name,
        )

    @classmethod
    def identity(cls) -> "PolyMap":
        return cls(Poly2.x(), Poly2.y(), "id")

    def to_tables(self) -> dict:
        return {"x": self.px.to_table(), "y": self.py.to_table()}

    @property
    def degree(self) -> int:
        return max(self.px.degree, self.py.degree)

    @property
    def constant(self) -> tuple:
        return (self.px.coeff(0, 0), self.py.coeff(0, 0))

    def with_constant(self, cx=None, cy=None) -> "PolyMap":
        px, py = dict(self.px.terms), dict(self.py.terms)
        if cx is not None:
            px[(0, 0)] = cx
        if cy is not None:
            py[(0, 0)] = cy
        return PolyMap(Poly2(px), Poly2(py), self.name)

    def translated(self, dx=0.0, dy=0.0) -> "PolyMap":
        return PolyMap(self.px + dx, self.py + dy, self.name)

    def linear_part(self) -> np.ndarray:
        return np.array(
            [[float(self.px.coeff(1, 0)), float(self.px.coeff(0, 1))],
             [float(self.py.coeff(1, 0)), float(self.py.coeff(0, 1))]]
        )

    def compose(self, inner: "PolyMap", name: str | None = None) -> "PolyMap":
        return PolyMap(self.px.compose(inner.px, inner.py), self.py.compose(inner.px, inner.py),
                       name or f"{self.name}∘{inner.name}")

    def map_coeffs(self, fn) -> "PolyMap":
        return PolyMap(self.px.map_coeffs(fn), self.py.map_coeffs(fn), self.name)

    def evaluate(self, z, env=None):
        if isinstance(z, Box2):
            return Box2(_interval(self.px.eval(z.x, z.y)), _interval(self.py.eval(z.x, z.y)))
        x, y = z
        return (self.px.eval(x, y), self.py.eval(x, y))

    def __call__(self, x, y):
        return self.evaluate((x, y))

    def jets(self, point, order: int = 1) -> tuple[Jet, Jet]:
        jx, jy = Jet.variables((float(point[0]), float(point[1])), order)
        return self.evaluate((jx, jy))

    def jacobian(self, point) -> np.ndarray:
        x, y = point
        return np.array(
            [[float(self.px.partial(0).eval(x, y)), float(self.px.partial(1).eval(x, y))],
             [float(self.py.partial(0).eval(x, y)), float(self.py.partial(1).eval(x, y))]]
        )

    def equals(self, other: "PolyMap", tol: float = 0.0) -> bool:
        return self.px.equals(other.px, tol) and self.py.equals(other.py, tol)


def _interval(v) -> Interval:
    return v if isinstance(v, Interval) else Interval(float(v), float(v))


def polymap_from_terms(xterms: Iterable, yterms: Iterable, name: str = "poly") -> PolyMap:
    return PolyMap(Poly2(dict(xterms)), Poly2(dict(yterms)), name)
