"""The quadratic-product bicycle example and a desk-scale sink census.

``f_{a,eps}(x, y) = (x^2 + a, rho(x) y)`` where ``rho`` equals ``1 + eps``
near the orbit of the source and ``1 - eps`` near the orbit of the saddle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Mapping, Sequence

import numpy as np

from blenderlab.blender import LCG
from blenderlab.dynamics.expr import A, X, Y, Bump, Const, PlanarMapExpr
from blenderlab.dynamics.manifolds import STABLE, UNSTABLE, local_manifold
from blenderlab.dynamics.orbits import (
    PH_SOURCE,
    SADDLE,
    SINK,
    PeriodicOrbit,
    classify,
    find_periodic_orbit,
    iterate,
    search_orbits,
)
from blenderlab.errors import BlenderLabError, ConfigError, InconclusiveError, NotFoundError, PreconditionError
from blenderlab.io import csv_text
from blenderlab.parallel import ordered_map

DEFAULT_SEAM = 0.05
DEFAULT_EXCLUSION = 0.01
LANDING_TOL = 1e-9
BASIN_RADIUS = 1e-3
BASIN_PROBES = 10
BASIN_ITERS = 1000
BISECT_TOL = 1e-8


# ---------------------------------------------------------------------------
# Misiurewicz check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MisiurewiczReport:
    a: float
    landed: bool
    landing_time: int | None
    period: int | None
    point: float | None
    multiplier: float | None
    tolerance_used: float | None
    orbit: tuple
    backward_condition_verified: bool = False

    @property
    def repelling(self) -> bool:
        return self.multiplier is not None and abs(self.multiplier) > 1

    @property
    def misiurewicz(self) -> bool:
        return self.landed and self.repelling and self.landing_time >= 1

    def to_dict(self) -> dict:
        return {
            "a": self.a, "landed": self.landed, "landing_time": self.landing_time, "period": self.period,
            "point": self.point, "multiplier": self.multiplier, "repelling": self.repelling,
            "misiurewicz": self.misiurewicz, "tolerance_used": self.tolerance_used,
            "orbit": list(self.orbit), "backward_condition_verified": self.backward_condition_verified,
        }


def critical_orbit(a: float, length: int) -> list[float]:
    out = [0.0]
    for _ in range(length):
        v = out[-1]
        out.append(v * v + a)
        if not math.isfinite(out[-1]):
            break
    return out


def misiurewicz_check(a: float, max_iter: int = 100, max_period: int = 16,
                      tol: float = LANDING_TOL) -> MisiurewiczReport:
    """Find the first time the critical orbit of ``x^2 + a`` sits on a periodic point.

    Landing at time ``k`` with period ``q`` means ``|c_{k+q} - c_k| <= tol``
    with ``(k, q)`` minimal in that order.  The multiplier is the product of
    ``2 c_j`` around the cycle.
    """
    orbit = critical_orbit(a, max_iter + max_period)
    for k in range(min(max_iter, len(orbit)) + 1):
        for q in range(1, max_period + 1):
            if k + q >= len(orbit):
                break
            gap = abs(orbit[k + q] - orbit[k])
            if gap <= tol:
                mult = 1.0
                for j in range(k, k + q):
                    mult *= 2.0 * orbit[j]
                return MisiurewiczReport(a, True, k, q, orbit[k], mult, gap, tuple(orbit[: k + q + 1]))
    if len(orbit) < max_iter + max_period + 1:
        raise InconclusiveError("critical orbit escapes to infinity", a=a, escape_time=len(orbit) - 1)
    raise InconclusiveError(f"no landing within {max_iter} iterations", a=a, max_iter=max_iter)


# ---------------------------------------------------------------------------
# Bicycle family
# ---------------------------------------------------------------------------


def build_rho(eps: float, sources: Sequence[float], saddles: Sequence[float], radius: float = DEFAULT_SEAM):
    """``1 + eps`` on plateaus around ``sources``, ``1 - eps`` around ``saddles``."""
    centres = list(sources) + list(saddles)
    for i, c in enumerate(centres):
        for d in centres[i + 1:]:
            if abs(c - d) < 4 * radius:
                raise ConfigError(f"orbit points {c} and {d} are closer than 4 x seam radius", radius=radius)
    rho = Const(1.0)
    for s in sources:
        rho = rho + eps * Bump(X, float(s), radius)
    for p in saddles:
        rho = rho - eps * Bump(X, float(p), radius)
    return rho


@dataclass(frozen=True)
class ExampleFamily:
    a: float
    eps: float
    source_orbit: tuple
    saddle_orbit: tuple
    radius: float = DEFAULT_SEAM
    exclusion: float = DEFAULT_EXCLUSION
    fmap: PlanarMapExpr = field(default=None, compare=False)
    checks: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.fmap is None:
            rho = build_rho(self.eps, self.source_orbit, self.saddle_orbit, self.radius)
            m = PlanarMapExpr.build(X ** 2 + A, rho * Y, name="bicycle", a=self.a)
            object.__setattr__(self, "fmap", m)

    @property
    def S(self) -> tuple[float, float]:
        return (self.source_orbit[0], 0.0)

    @property
    def P(self) -> tuple[float, float]:
        return (self.saddle_orbit[0], 0.0)

    def rho(self, x: float) -> float:
        return float(self.fmap.fy.eval({"x": x, "y": 1.0, "a": self.a}))

    def evaluate(self, z, env=None):
        return self.fmap.evaluate(z, env)

    def __call__(self, x, y):
        return self.evaluate((x, y))

    def at(self, a: float) -> PlanarMapExpr:
        return self.fmap.with_params(a=a)

    def in_exclusion(self, p) -> bool:
        return abs(float(p[0])) < self.exclusion

    def to_dict(self) -> dict:
        return {"a": self.a, "eps": self.eps, "source_orbit": list(self.source_orbit),
                "saddle_orbit": list(self.saddle_orbit), "radius": self.radius, "exclusion": self.exclusion,
                "S": list(self.S), "P": list(self.P), "checks": dict(self.checks)}


def _cycle(a: float, x0: float, max_period: int = 16, tol: float = LANDING_TOL) -> tuple[float, ...]:
    pts = [x0]
    for _ in range(max_period):
        nxt = pts[-1] ** 2 + a
        if abs(nxt - x0) <= tol:
            return tuple(pts)
        pts.append(nxt)
    raise ConfigError(f"{x0} is not periodic for x^2 + {a} with period <= {max_period}")


def build_bicycle_family(eps: float, a: float = -2.0, s: float = 2.0, p: float = -1.0,
                         radius: float = DEFAULT_SEAM, exclusion: float = DEFAULT_EXCLUSION) -> ExampleFamily:
    """Build the family and verify the source and saddle by multiplier arithmetic.

    At ``a = -2`` the points ``s = 2`` (multiplier 4) and ``p = -1``
    (multiplier -2) are fixed and repelling for the quadratic map.
    """
    if not eps > 0:
        raise ConfigError("eps must be positive: the fibre direction is neutral at eps = 0", eps=eps)
    if eps >= 1:
        raise ConfigError("eps must be < 1 so that rho stays positive", eps=eps)
    report = misiurewicz_check(a)
    s_orbit = _cycle(a, s)
    p_orbit = _cycle(a, p)
    if any(abs(x) < exclusion + 2 * radius for x in s_orbit + p_orbit):
        raise ConfigError("a designated orbit meets the critical exclusion zone")
    fam = ExampleFamily(a, eps, s_orbit, p_orbit, radius, exclusion)
    # direct multiplier arithmetic, independent of the planar map
    gs = math.prod(2 * x for x in s_orbit)
    gp = math.prod(2 * x for x in p_orbit)
    ys = (1 + eps) ** len(s_orbit)
    yp = (1 - eps) ** len(p_orbit)
    if not (abs(gs) > ys > 1):
        raise ConfigError(f"source multipliers out of order: |g'| = {abs(gs)} vs y-direction {ys}",
                          g_multiplier=gs, y_multiplier=ys)
    if not (abs(gp) > 1 > yp):
        raise ConfigError(f"saddle multipliers fail: |g'| = {abs(gp)}, y-direction {yp}",
                          g_multiplier=gp, y_multiplier=yp)
    # cross-check against the planar map's own classification
    S_orbit = find_periodic_orbit(fam.fmap, len(s_orbit), (s, 0.0))
    P_orbit = find_periodic_orbit(fam.fmap, len(p_orbit), (p, 0.0))
    if S_orbit.kind != PH_SOURCE or P_orbit.kind != SADDLE:
        raise ConfigError("planar classification disagrees with the multiplier arithmetic",
                          source_kind=S_orbit.kind, saddle_kind=P_orbit.kind)
    checks = {
        "source_g_multiplier": gs, "source_y_multiplier": ys,
        "saddle_g_multiplier": gp, "saddle_y_multiplier": yp,
        "source_kind": S_orbit.kind, "saddle_kind": P_orbit.kind,
        "saddle_fiber_contracting": yp < 1,
        "saddle_abs_det": abs(gp) * yp,
        "area_dissipative": abs(gp) * yp < 1,
        "landing_time": report.landing_time, "critical_value_lands_on": report.point,
        "backward_condition_verified": False,
    }
    return ExampleFamily(a, eps, s_orbit, p_orbit, radius, exclusion, fam.fmap, checks)


# ---------------------------------------------------------------------------
# Tangency detection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Clearance:
    value: float  # signed; tangency where it crosses zero
    point: tuple
    contact_order: float | None = None


def signed_clearance(unstable: np.ndarray, stable: np.ndarray) -> Clearance:
    """Signed distance from the unstable polyline to the stable one at its critical approach.

    Each unstable point is measured against its nearest stable segment,
    with the sign taken from the stable tangent.  Points whose nearest
    stable point is an endpoint are ignored.  The reported value is the
    interior local extremum of smallest modulus, refined by a parabola
    through the three neighbouring samples.
    """
    u = np.asarray(unstable, dtype=float)
    s = np.asarray(stable, dtype=float)
    if len(s) < 2 or len(u) < 3:
        raise NotFoundError("not enough curve samples")
    seg = s[1:] - s[:-1]
    seg_len2 = np.einsum("ij,ij->i", seg, seg)
    rel = u[:, None, :] - s[None, :-1, :]
    t = np.clip(np.einsum("kij,ij->ki", rel, seg) / seg_len2[None, :], 0.0, 1.0)
    foot = s[None, :-1, :] + t[..., None] * seg[None, :, :]
    dist2 = np.sum((u[:, None, :] - foot) ** 2, axis=2)
    j = np.argmin(dist2, axis=1)
    tj = t[np.arange(len(u)), j]
    interior = ~(((j == 0) & (tj <= 0.0)) | ((j == len(seg) - 1) & (tj >= 1.0)))
    tang = seg[j]
    rvec = u - foot[np.arange(len(u)), j]
    sd = (tang[:, 0] * rvec[:, 1] - tang[:, 1] * rvec[:, 0]) / np.sqrt(seg_len2[j])
    best = None
    for i in range(1, len(u) - 1):
        if not (interior[i - 1] and interior[i] and interior[i + 1]):
            continue
        a, b, c = sd[i - 1], sd[i], sd[i + 1]
        if (b - a) * (c - b) > 0 or (b == a and c == b):
            continue
        denom = a - 2 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
        shift = max(-1.0, min(1.0, shift))
        value = b - 0.25 * (a - c) * shift
        if best is None or abs(value) < abs(best[0]):
            best = (value, i)
    if best is None:
        raise NotFoundError("no interior approach between the curves")
    value, i = best
    order = _contact_order(sd, i, value)
    return Clearance(float(value), (float(u[i, 0]), float(u[i, 1])), order)


def _contact_order(sd, i, value):
    n = len(sd)
    for h in (4, 2, 1):
        if i - 2 * h >= 0 and i + 2 * h < n:
            d1 = 0.5 * (abs(sd[i - h] - value) + abs(sd[i + h] - value))
            d2 = 0.5 * (abs(sd[i - 2 * h] - value) + abs(sd[i + 2 * h] - value))
            if d1 > 0 and d2 > 0:
                return float(math.log(d2 / d1) / math.log(2.0))
    return None


@dataclass(frozen=True)
class TangencyRecord:
    a_star: float
    bracket: tuple
    point: tuple
    contact_order: float | None
    clearance: float
    curves: tuple = (UNSTABLE, STABLE)

    def to_dict(self) -> dict:
        return {"a_star": self.a_star, "bracket": list(self.bracket), "point": list(self.point),
                "contact_order": self.contact_order, "clearance": self.clearance, "curves": list(self.curves)}


def validate_tangency(record: TangencyRecord, clearance_fn: Callable[[float], Clearance], tol: float) -> bool:
    try:
        lo, hi = (clearance_fn(v).value for v in record.bracket)
        mid = clearance_fn(record.a_star).value
    except BlenderLabError:
        return False
    return abs(mid) <= tol and lo * hi < 0


def tangency_scan(clearance_fn: Callable[[float], Clearance], a_range: tuple[float, float], steps: int,
                  tol: float = 1e-6, bisect_tol: float = BISECT_TOL, log: list | None = None) -> list[TangencyRecord]:
    """Bracket sign changes of the clearance on a grid and bisect each to ``bisect_tol``.

    Parameters where the clearance cannot be computed are skipped (and
    appended to ``log``).  Only records passing :func:`validate_tangency`
    are returned.
    """
    grid = np.linspace(a_range[0], a_range[1], steps + 1)
    vals = []
    for a in grid:
        try:
            vals.append(clearance_fn(float(a)).value)
        except BlenderLabError as exc:
            vals.append(None)
            if log is not None:
                log.append({"a": float(a), "error": type(exc).__name__, "message": str(exc)})
    records = []
    for k in range(steps):
        v0, v1 = vals[k], vals[k + 1]
        if v0 is None or v1 is None or v0 * v1 > 0 or (v0 == 0 and v1 == 0):
            continue
        lo, hi = float(grid[k]), float(grid[k + 1])
        flo = v0
        if v0 == 0:
            hi = lo
        elif v1 == 0:
            lo = hi
        try:
            while hi - lo > bisect_tol:
                mid = 0.5 * (lo + hi)
                fm = clearance_fn(mid).value
                if fm == 0:
                    lo = hi = mid
                    break
                if (fm < 0) == (flo < 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
        except BlenderLabError:
            continue
        a_star = 0.5 * (lo + hi)
        if lo == hi:
            bracket = (lo - bisect_tol, hi + bisect_tol)
        else:
            bracket = (lo, hi)
        try:
            c = clearance_fn(a_star)
        except BlenderLabError:
            continue
        rec = TangencyRecord(a_star, bracket, c.point, c.contact_order, c.value)
        if validate_tangency(rec, clearance_fn, tol):
            records.append(rec)
    return records


def globalize_unstable(fmap, curve, iterations: int, radius: float | None = None, max_gap: float = 0.01,
                       max_points: int = 20000, samples: int = 201) -> np.ndarray:
    """Image of the local unstable segment under ``f^(period * iterations)``, refined until gaps are small."""
    r = curve.validity_radius if radius is None else radius
    period = curve.orbit.period
    times = period * iterations

    def image(t):
        return iterate(fmap, curve.evaluate(float(t)), times)

    ts = list(np.linspace(-r, r, samples))
    pts = [tuple(float(v) for v in image(t)) for t in ts]
    changed = True
    while changed and len(ts) < max_points:
        changed = False
        new_ts, new_pts = [ts[0]], [pts[0]]
        for i in range(1, len(ts)):
            p, q = pts[i - 1], pts[i]
            if math.hypot(q[0] - p[0], q[1] - p[1]) > max_gap and len(ts) + len(new_ts) < max_points:
                tm = 0.5 * (ts[i - 1] + ts[i])
                new_ts.append(tm)
                new_pts.append(tuple(float(v) for v in image(tm)))
                changed = True
            new_ts.append(ts[i])
            new_pts.append(q)
        ts, pts = new_ts, new_pts
    arr = np.array(pts)
    return arr[np.all(np.isfinite(arr), axis=1)]


@dataclass(frozen=True)
class ManifoldClearance:
    """Clearance between ``W^u`` (globalized) and local ``W^s`` of a saddle, as a function of ``a``."""

    family: PlanarMapExpr
    seed: tuple
    period: int = 1
    iterations: int = 4
    order: int = 10
    max_gap: float = 0.01
    stable_samples: int = 401

    def __call__(self, a: float) -> Clearance:
        fmap = self.family.with_params(a=a)
        orbit = find_periodic_orbit(fmap, self.period, self.seed)
        if orbit.kind != SADDLE:
            raise PreconditionError("orbit is not a saddle at this parameter", a=a, kind=orbit.kind)
        wu = local_manifold(fmap, orbit, UNSTABLE, self.order)
        ws = local_manifold(fmap, orbit, STABLE, self.order)
        unstable = globalize_unstable(fmap, wu, self.iterations, max_gap=self.max_gap)
        stable = ws.sample(self.stable_samples)
        tx, ty = ws.tangent
        if tx < 0 or (tx == 0 and ty < 0):
            stable = stable[::-1]  # orientation fixes the sign convention along the sweep
        return signed_clearance(unstable, stable)


def detect_tangency(family, saddle_seed, a_range: tuple[float, float], steps: int, period: int = 1,
                    iterations: int = 4, tol: float = 1e-6, bisect_tol: float = BISECT_TOL,
                    log: list | None = None) -> list[TangencyRecord]:
    """Homoclinic tangencies of a saddle continued over ``a_range``.

    ``family`` is either a :class:`PlanarMapExpr` with parameter ``a`` or a
    callable returning a :class:`Clearance` for each parameter.
    """
    if isinstance(family, PlanarMapExpr):
        fn = ManifoldClearance(family, tuple(saddle_seed), period, iterations)
    else:
        fn = family
    return tangency_scan(fn, a_range, steps, tol, bisect_tol, log)


# ---------------------------------------------------------------------------
# Sink census
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SinkRecord:
    a: float
    period: int
    point: tuple
    multipliers: tuple
    basin_radius: float

    def row(self) -> list:
        m1, m2 = (complex(m) for m in self.multipliers)
        return [self.a, self.period, self.point[0], self.point[1], m1.real, m1.imag, m2.real, m2.imag,
                self.basin_radius]

    def to_dict(self) -> dict:
        return {"a": self.a, "period": self.period, "point": list(self.point),
                "multipliers": [[complex(m).real, complex(m).imag] for m in self.multipliers],
                "basin_radius": self.basin_radius}


CENSUS_HEADER = ["a", "period", "x", "y", "mu1_re", "mu1_im", "mu2_re", "mu2_im", "basin_radius"]


def basin_probe(fmap, orbit: PeriodicOrbit, radius: float = BASIN_RADIUS, probes: int = BASIN_PROBES,
                iterations: int = BASIN_ITERS, seed: int = 2024, tol: float = 1e-6) -> bool:
    """All ``probes`` starts within ``radius`` of the orbit return to it within ``iterations``."""
    rng = LCG(seed)
    p0 = orbit.points[0]
    for _ in range(probes):
        ang = 2 * math.pi * rng.uniform()
        z = (p0[0] + radius * math.cos(ang), p0[1] + radius * math.sin(ang))
        ok = False
        try:
            for it in range(iterations):
                z = tuple(float(v) for v in fmap.evaluate(z))
                if not all(math.isfinite(v) for v in z):
                    break
                if (it + 1) % orbit.period == 0 and math.hypot(z[0] - p0[0], z[1] - p0[1]) <= tol:
                    ok = True
                    break
        except (BlenderLabError, OverflowError):
            ok = False
        if not ok:
            return False
    return True


def enters_exclusion(fmap, orbit: PeriodicOrbit, exclusion: float) -> bool:
    return exclusion > 0 and any(abs(p[0]) < exclusion for p in orbit.points)


def _census_at(a: float, family: PlanarMapExpr, periods: tuple, seeds: tuple, exclusion: float,
               radius: float, probes: int, probe_iters: int, probe_seed: int) -> list[SinkRecord]:
    fmap = family.with_params(a=a)
    found = search_orbits(fmap, periods, seeds)
    out = []
    for orb in found:
        if orb.kind != SINK or enters_exclusion(fmap, orb, exclusion):
            continue
        if not basin_probe(fmap, orb, radius, probes, probe_iters, probe_seed):
            continue
        mults = tuple(sorted(orb.multipliers, key=lambda m: (abs(m), m.real, m.imag)))
        out.append(SinkRecord(float(a), orb.period, tuple(orb.points[0]), mults, radius))
    out.sort(key=lambda r: (r.period, r.point))
    return out


@dataclass(frozen=True)
class CensusResult:
    records: tuple
    counts: tuple  # (a, number of sinks)

    def csv(self) -> str:
        return csv_text(CENSUS_HEADER, [r.row() for r in self.records])

    def to_dict(self) -> dict:
        return {"records": [r.to_dict() for r in self.records], "counts": [list(c) for c in self.counts]}


def _as_family(family) -> PlanarMapExpr:
    return family.fmap if isinstance(family, ExampleFamily) else family


def sink_census(family: PlanarMapExpr, a_grid: Sequence[float], max_period: int, seed_grid: Sequence,
                workers: int = 1, exclusion: float = 0.0, radius: float = BASIN_RADIUS, probes: int = BASIN_PROBES,
                probe_iters: int = BASIN_ITERS, probe_seed: int = 2024) -> CensusResult:
    """Sinks of period ``<= max_period`` for each parameter; parallel over parameters, merged in grid order."""
    task = partial(_census_at, family=_as_family(family), periods=tuple(range(1, max_period + 1)),
                   seeds=tuple(tuple(float(v) for v in s) for s in seed_grid), exclusion=exclusion,
                   radius=radius, probes=probes, probe_iters=probe_iters, probe_seed=probe_seed)
    per_a = ordered_map(task, [float(a) for a in a_grid], workers)
    records = tuple(r for rs in per_a for r in rs)
    counts = tuple((float(a), len(rs)) for a, rs in zip(a_grid, per_a))
    return CensusResult(records, counts)


def revalidate_sink(family: PlanarMapExpr, record: SinkRecord) -> bool:
    """Re-run the classification and the basin probe for a stored record."""
    fmap = _as_family(family).with_params(a=record.a)
    try:
        orb = find_periodic_orbit(fmap, record.period, record.point)
    except BlenderLabError:
        return False
    return classify(orb.multipliers) == SINK and basin_probe(fmap, orb, record.basin_radius)


__all__ = [
    "CENSUS_HEADER",
    "CensusResult",
    "Clearance",
    "ExampleFamily",
    "ManifoldClearance",
    "MisiurewiczReport",
    "SinkRecord",
    "TangencyRecord",
    "basin_probe",
    "build_bicycle_family",
    "build_rho",
    "critical_orbit",
    "detect_tangency",
    "globalize_unstable",
    "misiurewicz_check",
    "revalidate_sink",
    "signed_clearance",
    "sink_census",
    "tangency_scan",
    "validate_tangency",
]
