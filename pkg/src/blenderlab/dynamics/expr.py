"""Expression trees for planar map families.

An expression is built from the variables ``x``, ``y``, the parameter ``a``,
constants, the four arithmetic operations, integer powers, and two smooth
primitives: :class:`Recip` and the plateau :class:`Bump`.  Evaluation is
generic, so one tree serves floats, :class:`Jet` and :class:`Interval` inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

from blenderlab.errors import DomainError
from blenderlab.numerics.interval import Box2, Interval, round_down, round_up
from blenderlab.numerics.jet import Jet


class Expr:
    """Base node; subclasses implement :meth:`eval`."""

    def eval(self, env: Mapping[str, Any]):  # pragma: no cover - abstract
        raise NotImplementedError

    def __add__(self, o):
        return Add(self, as_expr(o))

    def __radd__(self, o):
        return Add(as_expr(o), self)

    def __sub__(self, o):
        return Sub(self, as_expr(o))

    def __rsub__(self, o):
        return Sub(as_expr(o), self)

    def __mul__(self, o):
        return Mul(self, as_expr(o))

    def __rmul__(self, o):
        return Mul(as_expr(o), self)

    def __truediv__(self, o):
        return Mul(self, Recip(as_expr(o)))

    def __rtruediv__(self, o):
        return Mul(as_expr(o), Recip(self))

    def __neg__(self):
        return Neg(self)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        return Pow(self, k)


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def eval(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise DomainError(f"unbound variable {self.name!r}") from None


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def eval(self, env):
        return self.value


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr

    def eval(self, env):
        return self.left.eval(env) + self.right.eval(env)


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr

    def eval(self, env):
        return self.left.eval(env) - self.right.eval(env)


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr

    def eval(self, env):
        return self.left.eval(env) * self.right.eval(env)


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def eval(self, env):
        return -self.arg.eval(env)


@dataclass(frozen=True)
class Pow(Expr):
    arg: Expr
    k: int

    def eval(self, env):
        return self.arg.eval(env) ** self.k


@dataclass(frozen=True)
class Recip(Expr):
    arg: Expr

    def eval(self, env):
        v = self.arg.eval(env)
        if isinstance(v, (Jet, Interval)):
            return v.reciprocal()
        if v == 0:
            raise DomainError("reciprocal of zero")
        return 1.0 / v


def smoothstep5(t: float) -> float:
    """Quintic smoothstep, C^2 at both ends of [0, 1]."""
    t = min(max(t, 0.0), 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def _plateau(d: float, radius: float) -> float:
    if d <= radius:
        return 1.0
    if d >= 2.0 * radius:
        return 0.0
    return 1.0 - smoothstep5((d - radius) / radius)


@dataclass(frozen=True)
class Bump(Expr):
    """Plateau bump: 1 within ``radius`` of ``center``, 0 beyond ``2*radius``.

    The transition uses :func:`smoothstep5`, so the bump is C^2.
    """

    arg: Expr
    center: float
    radius: float

    def eval(self, env):
        v = self.arg.eval(env)
        c, r = self.center, self.radius
        if isinstance(v, Interval):
            d = v - c
            lo = _plateau(d.mag(), r)
            hi = _plateau(d.mig(), r)
            return Interval(max(0.0, round_down(lo)), min(1.0, round_up(hi)))
        if isinstance(v, Jet):
            x0 = float(v.value)
            d0 = abs(x0 - c)
            if d0 <= r:
                return Jet.constant(1.0, v.num_vars, v.order, v.base)
            if d0 >= 2.0 * r:
                return Jet.constant(0.0, v.num_vars, v.order, v.base)
            side = 1.0 if x0 > c else -1.0
            t = (side * (v - c) - r) * (1.0 / r)
            s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
            return 1.0 - s
        return _plateau(abs(float(v) - c), r)


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    return Const(float(v))


X = Var("x")
Y = Var("y")
A = Var("a")


@dataclass(frozen=True)
class PlanarMapExpr:
    """A planar map ``(x, y) -> (fx, fy)`` with optional parameter values."""

    fx: Expr
    fy: Expr
    params: tuple = field(default_factory=tuple)
    name: str = "f"

    @classmethod
    def build(cls, fx, fy, name: str = "f", **params) -> "PlanarMapExpr":
        return cls(as_expr(fx), as_expr(fy), tuple(sorted(params.items())), name)

    def with_params(self, **params) -> "PlanarMapExpr":
        merged = dict(self.params)
        merged.update(params)
        return PlanarMapExpr(self.fx, self.fy, tuple(sorted(merged.items())), self.name)

    def param(self, key: str, default=None):
        return dict(self.params).get(key, default)

    def _env(self, x, y, extra: Mapping | None = None) -> dict:
        env = dict(self.params)
        if extra:
            env.update(extra)
        env["x"] = x
        env["y"] = y
        return env

    def evaluate(self, z, env: Mapping | None = None):
        """Evaluate on a point, a pair of jets/intervals, or a :class:`Box2`."""
        if isinstance(z, Box2):
            e = self._env(z.x, z.y, env)
            return Box2(_as_interval(self.fx.eval(e)), _as_interval(self.fy.eval(e)))
        x, y = z
        e = self._env(x, y, env)
        return (self.fx.eval(e), self.fy.eval(e))

    def __call__(self, x, y):
        return self.evaluate((x, y))

    def jets(self, point, order: int = 1) -> tuple[Jet, Jet]:
        jx, jy = Jet.variables((float(point[0]), float(point[1])), order)
        out = self.evaluate((jx, jy))
        return tuple(_as_jet(v, jx) for v in out)

    def jacobian(self, point):
        import numpy as np

        jx, jy = self.jets(point, 1)
        return np.array([[jx.coeff((1, 0)), jx.coeff((0, 1))], [jy.coeff((1, 0)), jy.coeff((0, 1))]], dtype=float)


def _as_interval(v) -> Interval:
    if isinstance(v, Interval):
        return v
    return Interval(float(v), float(v))


def _as_jet(v, like: Jet) -> Jet:
    if isinstance(v, Jet):
        return v
    return Jet.constant(v, like.num_vars, like.order, like.base)


def henon(a: float, b: float) -> PlanarMapExpr:
    """Hénon map ``(1 - a x^2 + y, b x)``."""
    return PlanarMapExpr.build(1.0 - A * X ** 2 + Y, Var("b") * X, name="henon", a=a, b=b)


def linear_map(sx: float, sy: float) -> PlanarMapExpr:
    return PlanarMapExpr.build(sx * X, sy * Y, name="linear")


def quadratic_product(a: float, fy: Expr | None = None) -> PlanarMapExpr:
    """``(x^2 + a, fy)``; the fibre map defaults to the identity."""
    return PlanarMapExpr.build(X ** 2 + A, Y if fy is None else fy, name="quadratic", a=a)


__all__ = [
    "A",
    "Add",
    "Bump",
    "Const",
    "Expr",
    "Mul",
    "Neg",
    "PlanarMapExpr",
    "Pow",
    "Recip",
    "Sub",
    "Var",
    "X",
    "Y",
    "as_expr",
    "henon",
    "linear_map",
    "quadratic_product",
    "smoothstep5",
]
