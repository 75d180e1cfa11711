"""Periodic orbits: Newton solve, multipliers, classification, deduplication."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from functools import partial
from typing import Sequence

import numpy as np

from blenderlab.errors import DegenerateError, DomainError, NotFoundError, SingularError
from blenderlab.numerics.interval import Box2
from blenderlab.numerics.jet import Jet
from blenderlab.parallel import ordered_map

NEWTON_TOL = 1e-12
NEWTON_CAP = 50
THETA = 1e-9
THETA_GAP = 1e-6
DEDUP_TOL = 1e-6

SINK = "sink"
SADDLE = "saddle"
SOURCE = "source"
PH_SOURCE = "projectively-hyperbolic-source"
NON_HYPERBOLIC = "non-hyperbolic"
KINDS = (SINK, SADDLE, SOURCE, PH_SOURCE, NON_HYPERBOLIC)


@dataclass(frozen=True)
class PeriodicOrbit:
    points: tuple
    period: int
    multipliers: tuple
    kind: str
    residual: float = 0.0

    @property
    def point(self) -> tuple[float, float]:
        return self.points[0]

    def to_dict(self) -> dict:
        return {
            "points": [list(p) for p in self.points],
            "period": self.period,
            "multipliers": [[m.real, m.imag] for m in self.multipliers],
            "kind": self.kind,
            "residual": self.residual,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PeriodicOrbit":
        return cls(
            tuple(tuple(p) for p in d["points"]),
            int(d["period"]),
            tuple(complex(re, im) for re, im in d["multipliers"]),
            d["kind"],
            float(d.get("residual", 0.0)),
        )


def iterate(fmap, z, times: int):
    for _ in range(times):
        z = fmap.evaluate(z)
    return z


def period_jets(fmap, point, period: int, order: int = 1) -> tuple[Jet, Jet]:
    """Jets of ``f^period`` at ``point``."""
    jx, jy = Jet.variables((float(point[0]), float(point[1])), order)
    z = (jx, jy)
    for _ in range(period):
        z = fmap.evaluate(z)
    return tuple(v if isinstance(v, Jet) else Jet.constant(v, 2, order, jx.base) for v in z)


def period_jacobian(fmap, point, period: int) -> np.ndarray:
    jx, jy = period_jets(fmap, point, period, 1)
    return np.array([[jx.coeff((1, 0)), jx.coeff((0, 1))], [jy.coeff((1, 0)), jy.coeff((0, 1))]], dtype=float)


def eigenvalues_2x2(m: np.ndarray) -> tuple[complex, complex]:
    """Eigenvalues of a real 2x2 matrix, ordered by increasing modulus."""
    tr = float(m[0, 0] + m[1, 1])
    det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    disc = 0.25 * tr * tr - det
    if disc >= 0:
        root = math.sqrt(disc)
        big = 0.5 * tr + (root if tr >= 0 else -root)
        small = det / big if big != 0 else 0.0
        mus = (complex(small), complex(big))
    else:
        root = cmath.sqrt(disc)
        mus = (0.5 * tr - root, 0.5 * tr + root)
    return tuple(sorted(mus, key=lambda z: (abs(z), z.real, z.imag)))


def classify(multipliers: Sequence[complex], theta: float = THETA, theta_gap: float = THETA_GAP) -> str:
    """Hyperbolicity type of a planar periodic orbit from its two multipliers."""
    m1, m2 = sorted((complex(m) for m in multipliers), key=abs)
    a1, a2 = abs(m1), abs(m2)
    if a2 < 1 - theta:
        return SINK
    if a1 < 1 - theta and a2 > 1 + theta:
        return SADDLE
    if a1 > 1 + theta:
        real = abs(m1.imag) <= theta and abs(m2.imag) <= theta
        if real and a1 * (1 + theta_gap) <= a2:
            return PH_SOURCE
        return SOURCE
    return NON_HYPERBOLIC


def _residual(fmap, z, period):
    fz = iterate(fmap, (float(z[0]), float(z[1])), period)
    return np.array([float(fz[0]) - z[0], float(fz[1]) - z[1]])


def find_periodic_orbit(fmap, period: int, seed, tol: float = NEWTON_TOL, max_iter: int = NEWTON_CAP,
                        reduce_period: bool = True) -> PeriodicOrbit:
    """Newton solve of ``f^period(z) = z`` from ``seed``.

    Raises :class:`NotFoundError` if the residual does not reach ``tol`` within
    ``max_iter`` steps or fails the interval re-check, and
    :class:`DegenerateError` if ``D f^period - I`` is singular.
    """
    if period < 1:
        raise ValueError("period must be >= 1")
    z = np.array([float(seed[0]), float(seed[1])])
    try:
        res = _residual(fmap, z, period)
    except (DomainError, SingularError, OverflowError) as exc:
        raise NotFoundError(f"map not evaluable at seed {tuple(z)}: {exc}") from exc
    norm = float(np.max(np.abs(res)))
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise NotFoundError(f"Newton did not converge in {max_iter} iterations", residual=norm,
                                point=list(z))
        it += 1
        try:
            jac = period_jacobian(fmap, z, period) - np.eye(2)
        except (DomainError, SingularError, OverflowError) as exc:
            raise NotFoundError(f"derivative not evaluable at {tuple(z)}: {exc}") from exc
        det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        scale = max(1.0, float(np.max(np.abs(jac)))) ** 2
        if not np.isfinite(det) or abs(det) <= 1e-14 * scale:
            raise DegenerateError("singular Newton derivative", point=list(z), det=float(det))
        step = np.linalg.solve(jac, -res)
        lam = 1.0
        accepted = False
        for _ in range(30):
            trial = z + lam * step
            try:
                trial_res = _residual(fmap, trial, period)
                trial_norm = float(np.max(np.abs(trial_res)))
            except (DomainError, SingularError, OverflowError):
                trial_norm = math.inf
            if np.isfinite(trial_norm) and trial_norm <= norm:
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            raise NotFoundError("damped Newton step failed to reduce the residual", residual=norm,
                                point=list(z))
        z, res, norm = trial, trial_res, trial_norm
    _interval_post_check(fmap, z, period, tol)
    if reduce_period:
        for q in range(1, period):
            if period % q == 0 and np.max(np.abs(_residual(fmap, z, q))) <= max(1e3 * tol, 1e-9):
                period = q
                break
    return orbit_from_point(fmap, (float(z[0]), float(z[1])), period, residual=norm)


def _interval_post_check(fmap, z, period, tol) -> None:
    box = Box2.point(float(z[0]), float(z[1]))
    img = iterate(fmap, box, period)
    dx = max(abs(img.x.lo - z[0]), abs(img.x.hi - z[0]))
    dy = max(abs(img.y.lo - z[1]), abs(img.y.hi - z[1]))
    if max(dx, dy) > 10 * tol:
        raise NotFoundError("interval re-check of the Newton residual failed", residual=max(dx, dy))


def orbit_from_point(fmap, z, period: int, residual: float = 0.0) -> PeriodicOrbit:
    points = [tuple(float(v) for v in z)]
    cur = points[0]
    for _ in range(period - 1):
        cur = tuple(float(v) for v in fmap.evaluate(cur))
        points.append(cur)
    mus = eigenvalues_2x2(period_jacobian(fmap, points[0], period))
    return PeriodicOrbit(tuple(points), period, mus, classify(mus), residual)


def canonical(fmap, orbit: PeriodicOrbit) -> PeriodicOrbit:
    """Rotate so the lexicographically smallest point comes first."""
    k = min(range(orbit.period), key=lambda i: orbit.points[i])
    if k == 0:
        return orbit
    pts = orbit.points[k:] + orbit.points[:k]
    mus = eigenvalues_2x2(period_jacobian(fmap, pts[0], orbit.period))
    return replace(orbit, points=pts, multipliers=mus, kind=classify(mus))


def cyclic_distance(a: PeriodicOrbit, b: PeriodicOrbit) -> float:
    if a.period != b.period:
        return math.inf
    pa = np.array(a.points)
    pb = np.array(b.points)
    best = math.inf
    for s in range(a.period):
        d = float(np.max(np.abs(pa - np.roll(pb, -s, axis=0))))
        best = min(best, d)
    return best


def dedupe(orbits: Sequence[PeriodicOrbit], tol: float = DEDUP_TOL) -> list[PeriodicOrbit]:
    kept: list[PeriodicOrbit] = []
    for o in orbits:
        if all(cyclic_distance(o, k) >= tol for k in kept):
            kept.append(o)
    return kept


def _solve_task(task, fmap, tol):
    period, seed = task
    try:
        return find_periodic_orbit(fmap, period, seed, tol=tol)
    except (NotFoundError, DegenerateError):
        return None


def search_orbits(fmap, periods: Sequence[int], seeds: Sequence, tol: float = NEWTON_TOL,
                  workers: int = 1) -> list[PeriodicOrbit]:
    """Newton from every (period, seed) pair; results deduplicated in task order."""
    tasks = [(p, tuple(s)) for p in periods for s in seeds]
    results = ordered_map(partial(_solve_task, fmap=fmap, tol=tol), tasks, workers)
    found = [canonical(fmap, r) for r in results if r is not None]
    return dedupe(found)


def seed_grid(box: Box2, n: int) -> list[tuple[float, float]]:
    xs = np.linspace(box.x.lo, box.x.hi, n)
    ys = np.linspace(box.y.lo, box.y.hi, n)
    return [(float(x), float(y)) for x in xs for y in ys]


__all__ = [
    "KINDS",
    "NON_HYPERBOLIC",
    "PH_SOURCE",
    "PeriodicOrbit",
    "SADDLE",
    "SINK",
    "SOURCE",
    "canonical",
    "classify",
    "cyclic_distance",
    "dedupe",
    "eigenvalues_2x2",
    "find_periodic_orbit",
    "iterate",
    "orbit_from_point",
    "period_jacobian",
    "period_jets",
    "search_orbits",
    "seed_grid",
]
