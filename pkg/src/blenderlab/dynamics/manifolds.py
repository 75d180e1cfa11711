"""One-dimensional invariant manifolds by the parameterization method.

For a multiplier ``mu`` of ``F = f^period`` at ``p`` we solve
``F(h(t)) = h(mu t)`` order by order.  The order-``k`` coefficient satisfies
``(DF(p) - mu^k I) h_k = -E_k`` where ``E_k`` collects the contributions of
lower-order coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from blenderlab.dynamics.orbits import PH_SOURCE, PeriodicOrbit, iterate, period_jacobian
from blenderlab.errors import PreconditionError, ResonanceError, UnsupportedError
from blenderlab.numerics.jet import Jet

STABLE = "stable"
UNSTABLE = "unstable"
STRONG_UNSTABLE = "strong-unstable"
WEAK_UNSTABLE = "weak-unstable"
FLAVORS = (STABLE, UNSTABLE, STRONG_UNSTABLE, WEAK_UNSTABLE)

RESONANCE_TOL = 1e-10
RESIDUAL_TOL = 1e-9
RESIDUAL_SAMPLES = 100


@dataclass(frozen=True)
class ManifoldCurve:
    orbit: PeriodicOrbit
    flavor: str
    multiplier: float
    taylor: tuple  # (x coefficients, y coefficients), index = power of t
    validity_radius: float
    residual: float

    @property
    def order(self) -> int:
        return len(self.taylor[0]) - 1

    @property
    def tangent(self) -> tuple[float, float]:
        return (float(self.taylor[0][1]), float(self.taylor[1][1]))

    def evaluate(self, t):
        cx, cy = self.taylor
        return (_horner(cx, t), _horner(cy, t))

    def jets(self) -> tuple[Jet, Jet]:
        return (Jet(np.array(self.taylor[0], dtype=float), 1, self.order),
                Jet(np.array(self.taylor[1], dtype=float), 1, self.order))

    def sample(self, count: int = 101, radius: float | None = None) -> np.ndarray:
        r = self.validity_radius if radius is None else radius
        ts = np.linspace(-r, r, count)
        return np.array([self.evaluate(float(t)) for t in ts])

    def to_dict(self) -> dict:
        return {
            "flavor": self.flavor,
            "multiplier": self.multiplier,
            "point": list(self.orbit.points[0]),
            "period": self.orbit.period,
            "taylor_x": [float(c) for c in self.taylor[0]],
            "taylor_y": [float(c) for c in self.taylor[1]],
            "validity_radius": self.validity_radius,
            "residual": self.residual,
        }


def _horner(coeffs, t):
    acc = 0.0 * t
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def _pick_multiplier(orbit: PeriodicOrbit, flavor: str, theta: float = 1e-9) -> tuple[complex, complex]:
    small, big = sorted(orbit.multipliers, key=abs)
    if flavor == STABLE:
        if abs(small) >= 1 - theta:
            raise PreconditionError("no contracting multiplier for a stable manifold",
                                    multipliers=[str(m) for m in orbit.multipliers])
        return small, big
    if flavor == UNSTABLE:
        if abs(big) <= 1 + theta:
            raise PreconditionError("no expanding multiplier for an unstable manifold",
                                    multipliers=[str(m) for m in orbit.multipliers])
        return big, small
    if flavor in (STRONG_UNSTABLE, WEAK_UNSTABLE):
        if orbit.kind != PH_SOURCE:
            raise PreconditionError(f"{flavor} manifold needs a projectively hyperbolic source",
                                    kind=orbit.kind)
        return (big, small) if flavor == STRONG_UNSTABLE else (small, big)
    raise ValueError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")


def _eigenvector(jac: np.ndarray, mu: float) -> np.ndarray:
    m = jac - mu * np.eye(2)
    # The kernel is orthogonal to the larger row of the singular matrix.
    row = m[0] if np.linalg.norm(m[0]) >= np.linalg.norm(m[1]) else m[1]
    if np.linalg.norm(row) == 0:
        v = np.array([1.0, 0.0])
    else:
        v = np.array([-row[1], row[0]])
    v = v / np.linalg.norm(v)
    # Deterministic orientation: first nonzero component positive.
    k = 0 if abs(v[0]) > 1e-15 else 1
    return v if v[k] > 0 else -v


def local_manifold(fmap, orbit: PeriodicOrbit, flavor: str, order: int = 10,
                   tol: float = RESIDUAL_TOL, max_radius: float = 64.0) -> ManifoldCurve:
    """Taylor parameterization of a one-dimensional invariant curve through ``orbit.points[0]``."""
    mu_c, other_c = _pick_multiplier(orbit, flavor)
    if abs(mu_c.imag) > 1e-12 or abs(other_c.imag) > 1e-12:
        raise UnsupportedError("complex multipliers are not supported", multipliers=[str(mu_c), str(other_c)])
    mu, other = mu_c.real, other_c.real
    p = np.array(orbit.points[0], dtype=float)
    period = orbit.period
    jac = period_jacobian(fmap, p, period)
    cx = np.zeros(order + 1)
    cy = np.zeros(order + 1)
    cx[0], cy[0] = p
    v = _eigenvector(jac, mu)
    if order >= 1:
        cx[1], cy[1] = v
    for k in range(2, order + 1):
        muk = mu ** k
        if abs(muk - other) < RESONANCE_TOL:
            raise ResonanceError(f"resonance mu^{k} = mu_other", k=k, mu=mu, other=other)
        jx = Jet(cx[:k + 1].copy(), 1, k)
        jy = Jet(cy[:k + 1].copy(), 1, k)
        fx, fy = iterate(fmap, (jx, jy), period)
        e = np.array([_coeff(fx, k), _coeff(fy, k)])
        hk = np.linalg.solve(jac - muk * np.eye(2), -e)
        cx[k], cy[k] = hk
    curve = ManifoldCurve(orbit, flavor, mu, (tuple(map(float, cx)), tuple(map(float, cy))), 0.0, 0.0)
    radius, residual = _validity_radius(fmap, curve, tol, max_radius)
    return ManifoldCurve(orbit, flavor, mu, curve.taylor, radius, residual)


def _coeff(j, k):
    if isinstance(j, Jet):
        return float(j.coeffs[k])
    return 0.0


def invariance_residual(fmap, curve: ManifoldCurve, radius: float, samples: int = RESIDUAL_SAMPLES) -> float:
    worst = 0.0
    for t in np.linspace(-radius, radius, samples):
        t = float(t)
        img = iterate(fmap, curve.evaluate(t), curve.orbit.period)
        tgt = curve.evaluate(curve.multiplier * t)
        d = max(abs(float(img[0]) - tgt[0]), abs(float(img[1]) - tgt[1]))
        if not np.isfinite(d):
            return float("inf")
        worst = max(worst, d)
    return worst


def _validity_radius(fmap, curve, tol, max_radius):
    r = 1.0
    res = _safe_residual(fmap, curve, r)
    if res <= tol:
        while r * 2 <= max_radius:
            nxt = _safe_residual(fmap, curve, 2 * r)
            if nxt > tol:
                break
            r, res = 2 * r, nxt
        return r, res
    while r > 1e-12:
        r *= 0.5
        res = _safe_residual(fmap, curve, r)
        if res <= tol:
            return r, res
    raise PreconditionError("no radius with invariance residual below tolerance", tol=tol)


def _safe_residual(fmap, curve, r):
    try:
        return invariance_residual(fmap, curve, r)
    except (OverflowError, ArithmeticError):
        return float("inf")


__all__ = [
    "FLAVORS",
    "ManifoldCurve",
    "STABLE",
    "STRONG_UNSTABLE",
    "UNSTABLE",
    "WEAK_UNSTABLE",
    "invariance_residual",
    "local_manifold",
]
