"""Covering certificates for nearly affine blenders and parablenders.

Affine normal form: the two expanding branches act on the second coordinate
as ``y -> Delta y - (Delta - 1)`` (fixes ``+1``) and ``y -> Delta y + (Delta - 1)``
(fixes ``-1``).  A point of the activation interval is covered when some
branch sends it back into ``[-1, 1]``; equivalently the inverse contractions
``y -> (y - 1)/Delta + 1`` and ``y -> (y + 1)/Delta - 1`` map ``[-1, 1]`` onto
intervals whose union contains the activation interval.

Margins are signed: positive is the overlap half-width, negative is the
half-width of the gap.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from blenderlab.dynamics.poly import PolyMap
from blenderlab.errors import InconclusiveError, PreconditionError
from blenderlab.numerics.interval import Box2, Interval

COVERED = "covered"
GAP = "gap"
MAX_CELLS = 200_000
MAX_DEPTH = 40  # bisections per coordinate
RECHECK_TOL = 1e-12

LCG_A = 1664525
LCG_C = 1013904223
LCG_M = 2 ** 32


def robust_requirement(delta: float, Delta: float, lip_x: float = 0.0) -> float:
    """Margin needed to survive a ``delta``-perturbation of an affine IFS with expansion ``Delta``.

    A perturbed fixed point moves by at most ``delta / (Delta - 1)``; the
    image endpoints move by ``delta`` on top of that.
    """
    return delta * (1.0 + 1.0 / (Delta - 1.0) + lip_x)


@dataclass(frozen=True)
class CoveringCertificate:
    kind: str  # "1d", "2d", "jets"
    target: Any  # Interval, Box2, or JetBox
    pieces: tuple  # (branch id, piece) pairs; piece is an Interval, Box2 or list of [lo, hi]
    margin: float
    verdict: str
    witness: tuple | None = None
    delta: float = 0.0
    requirement: float = 0.0
    constants: Mapping[str, Any] = field(default_factory=dict)

    @property
    def covered(self) -> bool:
        return self.verdict == COVERED

    @property
    def robust(self) -> bool:
        if not self.covered:
            return False
        if self.delta > 0:
            return self.margin > 0 and self.margin >= self.requirement
        return self.margin >= 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "target": _ser(self.target),
            "pieces": [{"branch": b, "piece": _ser(p)} for b, p in self.pieces],
            "margin": float(self.margin),
            "verdict": self.verdict,
            "witness": None if self.witness is None else [float(v) for v in self.witness],
            "delta": self.delta,
            "requirement": self.requirement,
            "robust": self.robust,
            "constants": {k: _ser(v) for k, v in self.constants.items()},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "CoveringCertificate":
        kind = d["kind"]
        if kind == "1d":
            target = Interval(*d["target"])
            pieces = tuple((p["branch"], Interval(*p["piece"])) for p in d["pieces"])
        elif kind == "2d":
            target = Box2.from_list(d["target"])
            pieces = tuple((p["branch"], Box2.from_list(p["piece"])) for p in d["pieces"])
        elif kind == "jets":
            target = JetBox.from_dict(d["target"])
            pieces = tuple((p["branch"], [tuple(iv) for iv in p["piece"]]) for p in d["pieces"])
        else:
            raise ValueError(f"unknown certificate kind {kind!r}")
        witness = None if d.get("witness") is None else tuple(d["witness"])
        return cls(kind, target, pieces, float(d["margin"]), d["verdict"], witness, float(d.get("delta", 0.0)),
                   float(d.get("requirement", 0.0)), dict(d.get("constants", {})))

    def piece_rows(self) -> list[list]:
        """Flat rows ``(branch, lo..., hi...)`` for CSV output."""
        rows = []
        for b, p in self.pieces:
            if isinstance(p, Interval):
                rows.append([b, p.lo, p.hi])
            elif isinstance(p, Box2):
                rows.append([b, p.x.lo, p.y.lo, p.x.hi, p.y.hi])
            else:
                rows.append([b] + [float(lo) for lo, _ in p] + [float(hi) for _, hi in p])
        return rows


def _ser(v):
    if isinstance(v, (Interval, Box2)):
        return v.to_list()
    if isinstance(v, JetBox):
        return v.to_dict()
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, (list, tuple)):
        return [_ser(x) for x in v]
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


# ---------------------------------------------------------------------------
# One-dimensional criterion
# ---------------------------------------------------------------------------


def _cover_1d(pieces: Sequence[tuple[str, float, float]], lo: float, hi: float):
    """Signed margin and gap midpoint for two intervals covering ``[lo, hi]``."""
    (_, a_lo, a_hi), (_, b_lo, b_hi) = sorted(pieces, key=lambda p: (p[1], p[2]))
    overlap = (a_hi - b_lo) / 2.0
    witness = None
    covered = a_lo <= lo and max(a_hi, b_hi) >= hi and b_lo <= a_hi
    if not covered:
        if a_lo > lo:
            witness = lo
        elif max(a_hi, b_hi) < hi:
            witness = hi
        else:
            witness = (a_hi + b_lo) / 2.0
    return covered, overlap, witness


def verify_blender_1d(Delta: float, delta: float = 0.0, eta: float = 0.0) -> CoveringCertificate:
    """Check that the two inverse contractions cover ``[-1 + eta, 1 - eta]``.

    The images of ``[-1, 1]`` are ``[1 - 2/Delta, 1]`` and ``[-1, 2/Delta - 1]``,
    so the overlap half-width is ``2/Delta - 1`` and coverage holds iff
    ``Delta <= 2``.
    """
    if not Delta > 1:
        raise PreconditionError("Delta must exceed 1", Delta=Delta)
    if delta < 0 or not 0 <= eta < 1:
        raise PreconditionError("need delta >= 0 and 0 <= eta < 1", delta=delta, eta=eta)
    up = (1.0 - 2.0 / Delta, 1.0)  # (y - 1)/Delta + 1
    down = (-1.0, 2.0 / Delta - 1.0)  # (y + 1)/Delta - 1
    target = Interval(-1.0 + eta, 1.0 - eta)
    covered, overlap, wit = _cover_1d([("g+", *up), ("g-", *down)], target.lo, target.hi)
    margin = 2.0 / Delta - 1.0
    return CoveringCertificate(
        "1d", target, (("g+", Interval(*up)), ("g-", Interval(*down))), margin,
        COVERED if covered else GAP, None if covered else (wit,), float(delta),
        robust_requirement(delta, Delta), {"Delta": Delta, "eta": eta},
    )


# ---------------------------------------------------------------------------
# Two-dimensional reduction
# ---------------------------------------------------------------------------


def _branch_maps(pair) -> dict[str, Any]:
    if hasattr(pair, "plus") and hasattr(pair, "minus"):
        return {"+": pair.plus, "-": pair.minus}
    if isinstance(pair, Mapping):
        return {"+": pair["+"], "-": pair["-"]}
    plus, minus = pair
    return {"+": plus, "-": minus}


def _polymap(branch) -> PolyMap:
    return branch.fmap if hasattr(branch, "fmap") else branch


def _remainder_bound(poly, box: Box2, cells: int = 16) -> float:
    """Interval-arithmetic bound of ``|poly|`` over ``box``."""
    worst = 0.0
    for cell in box.split(cells, cells):
        v = poly.eval(cell.x, cell.y)
        v = v if isinstance(v, Interval) else Interval.point(float(v))
        worst = max(worst, v.mag())
    return worst


def verify_blender_2d(Rg_pair, activation: Box2, delta: float, targets: Mapping | None = None,
                      domain: Box2 | None = None) -> CoveringCertificate:
    """Reduce the covering of ``activation`` by two nearly affine branches to one dimension.

    Each branch's second coordinate is written as ``a_s y + b_s + e_s(x, y)``
    with ``|e_s| <= rho_s`` on the domain (interval bound).  The set of ``y``
    sent into ``[-1, 1]`` for every ``x`` contains
    ``[(-1 + rho_s - b_s)/a_s, (1 - rho_s - b_s)/a_s]``; these two intervals
    are then checked as in one dimension.
    """
    from blenderlab.renorm import RENORM_BOX, AffineTarget, cr_distance

    branches = _branch_maps(Rg_pair)
    box = RENORM_BOX if domain is None else domain
    if not box.contains(activation):
        raise PreconditionError("activation domain must lie in the branch domain", activation=activation.to_list(),
                                domain=box.to_list())
    maps = {s: _polymap(b) for s, b in branches.items()}
    if targets is None:
        if hasattr(Rg_pair, "plan"):
            D = float(Rg_pair.plan.delta_minus)
        else:
            D = sum(float(m.py.coeff(0, 1)) for m in maps.values()) / 2
        targets = {s: AffineTarget(float(maps[s].px.coeff(0, 0)), D, s) for s in maps}
    measured = max(cr_distance(maps[s], targets[s], 1, box=box).overall for s in maps)
    if measured > delta:
        raise PreconditionError(f"measured C^1 distance {measured:.3g} exceeds delta = {delta}", measured=measured,
                                delta=delta)
    constants: dict[str, Any] = {"measured_distance": measured}
    intervals = []
    lip_x = 0.0
    for s in ("+", "-"):
        py = maps[s].py
        a = float(py.coeff(0, 1))
        b = float(py.coeff(0, 0))
        if not a > 1:
            raise PreconditionError(f"branch {s} is not expanding in y", slope=a)
        rest = type(py)({k: v for k, v in py.terms.items() if k not in ((0, 0), (0, 1))})
        rho = _remainder_bound(rest, box) if rest.terms else 0.0
        dx = py.partial(0)
        lip = _remainder_bound(dx, box) if dx.terms else 0.0
        lip_x = max(lip_x, lip)
        lo, hi = (-1.0 + rho - b) / a, (1.0 - rho - b) / a
        constants[f"slope{s}"] = a
        constants[f"constant{s}"] = b
        constants[f"remainder{s}"] = rho
        intervals.append((f"Rg{s}", lo, hi))
    constants["lip_x"] = lip_x
    covered, overlap, wit = _cover_1d(intervals, activation.y.lo, activation.y.hi)
    D = min(constants["slope+"], constants["slope-"])
    pieces = tuple((name, Box2(activation.x, Interval(lo, hi))) for name, lo, hi in intervals)
    witness = None if covered else (activation.x.mid, wit)
    return CoveringCertificate("2d", activation, pieces, overlap,
                               COVERED if covered else GAP, witness, float(delta),
                               robust_requirement(delta, D, lip_x), constants)


# ---------------------------------------------------------------------------
# Jet-space criterion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JetBox:
    """``[-A, A] x [-B_1, B_1] x ... x [-B_r, B_r]``; values may be Fractions."""

    A: Any
    B: tuple

    def __post_init__(self):
        if not self.A > 0 or any(not b > 0 for b in self.B):
            raise PreconditionError("jet box half-widths must be positive", A=float(self.A),
                                    B=[float(b) for b in self.B])
        object.__setattr__(self, "B", tuple(self.B))

    @property
    def r(self) -> int:
        return len(self.B)

    @property
    def half_widths(self) -> tuple:
        return (self.A,) + self.B

    @classmethod
    def sufficient(cls, Delta, A, r: int) -> "JetBox":
        """``B_k = B_{k-1} k / (Delta - 1)`` with ``B_0 = A``, computed exactly."""
        D = Fraction(Delta)
        bs = []
        prev = Fraction(A)
        for k in range(1, r + 1):
            prev = prev * k / (D - 1)
            bs.append(prev)
        return cls(Fraction(A), tuple(bs))

    def with_B(self, k: int, value) -> "JetBox":
        bs = list(self.B)
        bs[k - 1] = value
        return JetBox(self.A, tuple(bs))

    def scaled(self, k: int, factor) -> "JetBox":
        if k == 0:
            return JetBox(self.A * Fraction(factor), self.B)
        return self.with_B(k, self.B[k - 1] * Fraction(factor))

    def contains(self, z: Sequence) -> bool:
        return all(abs(Fraction(v)) <= Fraction(w) for v, w in zip(z, self.half_widths))

    def to_dict(self) -> dict:
        return {"A": float(self.A), "B": [float(b) for b in self.B]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "JetBox":
        return cls(float(d["A"]), tuple(float(b) for b in d["B"]))


def jet_map(Delta, sign: str, y: Sequence):
    """``J^s``: ``y_0 -> Delta y_0 + s (Delta - 1)``, ``y_k -> Delta y_k + k y_{k-1}``."""
    s = 1 if sign == "+" else -1
    out = [Delta * y[0] + s * (Delta - 1)]
    for k in range(1, len(y)):
        out.append(Delta * y[k] + k * y[k - 1])
    return out


def jet_preimage(Delta, sign: str, z: Sequence):
    s = 1 if sign == "+" else -1
    y = [(z[0] - s * (Delta - 1)) / Delta]
    for k in range(1, len(z)):
        y.append((z[k] - k * y[k - 1]) / Delta)
    return y


def _preimage_rows(D: Fraction, dim: int):
    """Rows of the lower-triangular inverse and the constants for each sign."""
    rows = []
    consts = {"+": [], "-": []}
    for k in range(dim):
        row = [Fraction(0)] * dim
        row[k] = 1 / D
        if k:
            for j in range(dim):
                row[j] -= k * rows[k - 1][j] / D
        rows.append(row)
        for sign, s in (("+", 1), ("-", -1)):
            c = -s * (D - 1) / D if k == 0 else -k * consts[sign][k - 1] / D
            consts[sign].append(c)
    return rows, consts


def _ranges(rows, const, center, half):
    out = []
    for row, c in zip(rows, const):
        mid = c + sum(a * z for a, z in zip(row, center))
        rad = sum(abs(a) * h for a, h in zip(row, half))
        out.append((mid - rad, mid + rad))
    return out


def _point_covered(rows, consts, widths, z) -> bool:
    for sign in ("+", "-"):
        if all(abs(consts[sign][k] + sum(a * v for a, v in zip(rows[k], z))) <= widths[k] for k in range(len(z))):
            return True
    return False


def verify_parablender_jets(Delta, r: int, delta: float, box: JetBox,
                            max_cells: int = MAX_CELLS) -> CoveringCertificate:
    """Certify ``box`` is contained in ``J^+(box) U J^-(box)`` by exact branch and bound.

    Preimages are affine in the jet, so each cell's preimage ranges are exact
    (rational arithmetic).  Leaves record the branch whose preimage of the
    cell lies in ``box``; the margin is the smallest preimage slack.
    """
    D = Fraction(Delta)
    if not D > 1:
        raise PreconditionError("Delta must exceed 1", Delta=float(Delta))
    if box.r != r:
        raise PreconditionError(f"box has order {box.r}, expected {r}")
    dim = r + 1
    widths = [Fraction(w) for w in box.half_widths]
    rows, consts = _preimage_rows(D, dim)
    # largest cells first, so a gap of positive volume is reached before
    # refinement stalls at a touching corner
    heap = [(-1, 0, 0, [-w for w in widths], list(widths))]
    seq = 1
    pieces = []
    unresolved = 0
    margin = None
    cells = 0
    while heap:
        _, _, depth, lo, hi = heapq.heappop(heap)
        cells += 1
        if cells > max_cells:
            raise InconclusiveError("cell budget exhausted before deciding the covering", cells=max_cells)
        center = [(a + b) / 2 for a, b in zip(lo, hi)]
        half = [(b - a) / 2 for a, b in zip(lo, hi)]
        best = None
        excluded = 0
        for sign in ("+", "-"):
            rng = _ranges(rows, consts[sign], center, half)
            slack = min(w - max(-a, b) for (a, b), w in zip(rng, widths))
            if slack >= 0 and (best is None or slack > best[1]):
                best = (sign, slack)
            if any(a > w or b < -w for (a, b), w in zip(rng, widths)):
                excluded += 1
        if best is not None:
            pieces.append((f"J{best[0]}", [(a, b) for a, b in zip(lo, hi)]))
            margin = best[1] if margin is None else min(margin, best[1])
            continue
        if excluded == 2 or not _point_covered(rows, consts, widths, center):
            return CoveringCertificate("jets", box, tuple(pieces), -1.0, GAP, tuple(float(c) for c in center),
                                       float(delta), robust_requirement(delta, float(D)),
                                       {"Delta": float(D), "r": r, "cells": cells,
                                        "witness_exact": [str(c) for c in center]})
        if depth >= MAX_DEPTH * dim:
            unresolved += 1
            continue
        # split where the preimage ranges are most sensitive relative to the box
        score = [max(abs(rows[k][j]) / widths[k] for k in range(dim)) * (hi[j] - lo[j]) for j in range(dim)]
        j = max(range(dim), key=lambda i: (score[i], -i))
        m = (lo[j] + hi[j]) / 2
        left_hi = list(hi)
        left_hi[j] = m
        right_lo = list(lo)
        right_lo[j] = m
        size = -Fraction(1, 2 ** (depth + 1))
        for child in ((list(lo), left_hi), (right_lo, list(hi))):
            heapq.heappush(heap, (size, seq, depth + 1, *child))
            seq += 1
    if unresolved:
        raise InconclusiveError("covering not decided on cells at the refinement limit", unresolved=unresolved)
    return CoveringCertificate("jets", box, tuple(pieces), float(margin), COVERED, None, float(delta),
                               robust_requirement(delta, float(D)), {"Delta": float(D), "r": r, "cells": cells})


def grid_oracle_covered(Delta: float, box: JetBox, z: Sequence[float], samples: int = 10_000) -> bool:
    """Forward-only coverage test of the jet ``z`` on a dense grid.

    For each sign, grid values of ``y_0`` whose image is within grid
    resolution of ``z_0`` are kept; each survivor is paired with grid values
    of the next coordinate, and so on.  No inverse formula is used.
    """
    D = float(Delta)
    widths = [float(w) for w in box.half_widths]
    for s in (1.0, -1.0):
        grid0 = np.linspace(-widths[0], widths[0], samples)
        tol0 = D * (grid0[1] - grid0[0]) + 1e-12
        img0 = D * grid0 + s * (D - 1)
        alive = grid0[np.abs(img0 - z[0]) <= tol0]
        for k in range(1, len(z)):
            if alive.size == 0:
                break
            grid = np.linspace(-widths[k], widths[k], samples)
            tol = D * (grid[1] - grid[0]) + k * tol0 / D + 1e-12
            img = D * grid[None, :] + k * alive[:, None]
            ok = np.abs(img - z[k]) <= tol
            rows_ok, cols_ok = np.nonzero(ok)
            alive = np.unique(grid[cols_ok])
            tol0 = tol
        if alive.size:
            return True
    return False


# ---------------------------------------------------------------------------
# Independent re-check
# ---------------------------------------------------------------------------


def recheck(cert: CoveringCertificate, tol: float = RECHECK_TOL) -> bool:
    """Re-validate a certificate from its own pieces with outward-rounded intervals."""
    if cert.kind in ("1d", "2d"):
        if cert.kind == "1d":
            target = cert.target
            ivs = sorted([p for _, p in cert.pieces], key=lambda iv: iv.lo)
        else:
            target = cert.target.y
            ivs = sorted([p.y for _, p in cert.pieces], key=lambda iv: iv.lo)
        union_ok = ivs[0].lo <= target.lo and max(iv.hi for iv in ivs) >= target.hi and ivs[1].lo <= ivs[0].hi
        if cert.covered:
            return union_ok and abs((ivs[0].hi - ivs[1].lo) / 2 - cert.margin) <= tol
        w = cert.witness[-1]
        return not any(iv.contains(w) for iv in ivs) and target.contains(w)
    box = cert.target
    D = Interval.point(cert.constants["Delta"])
    widths = [float(w) for w in box.half_widths]
    if not cert.covered:
        z = [Fraction(v) for v in cert.constants["witness_exact"]]
        return box.contains(z) and not grid_free_covered(cert.constants["Delta"], box, z)
    total = Fraction(0)
    for branch, cell in cert.pieces:
        lo = [Fraction(a) for a, _ in cell]
        hi = [Fraction(b) for _, b in cell]
        vol = Fraction(1)
        for a, b, w in zip(lo, hi, box.half_widths):
            if a < -Fraction(w) or b > Fraction(w):
                return False
            vol *= b - a
        total += vol
        zs = [Interval(float(a), float(b)) if a != b else Interval.point(float(a)) for a, b in zip(lo, hi)]
        ys = jet_preimage(D, branch[1], zs)
        for y, w in zip(ys, widths):
            if y.lo < -w * (1 + tol) - tol or y.hi > w * (1 + tol) + tol:
                return False
    full = Fraction(1)
    for w in box.half_widths:
        full *= 2 * Fraction(w)
    return total == full


def grid_free_covered(Delta, box: JetBox, z: Sequence) -> bool:
    """Exact rational test of a single jet (used for witnesses)."""
    D = Fraction(Delta)
    for sign in ("+", "-"):
        if box.contains(jet_preimage(D, sign, [Fraction(v) for v in z])):
            return True
    return False


# ---------------------------------------------------------------------------
# Chaos game
# ---------------------------------------------------------------------------


class LCG:
    """``state <- (1664525 state + 1013904223) mod 2^32``."""

    def __init__(self, seed: int):
        self.state = int(seed) % LCG_M

    def next(self) -> int:
        self.state = (LCG_A * self.state + LCG_C) % LCG_M
        return self.state

    def index(self, n: int) -> int:
        """Uniform index in ``range(n)`` from the high bits."""
        return (self.next() * n) >> 32

    def uniform(self) -> float:
        return self.next() / LCG_M


def _as_callable(m) -> tuple[Callable, int]:
    if isinstance(m, tuple) and len(m) == 2 and all(isinstance(v, (int, float)) for v in m):
        a, b = m
        return (lambda p, a=a, b=b: (a * p[0] + b,)), 1
    if isinstance(m, PolyMap) or hasattr(m, "evaluate"):
        return (lambda p, m=m: tuple(float(v) for v in m.evaluate((p[0], p[1])))), 2
    if callable(m):
        return m, 0
    raise TypeError(f"cannot use {m!r} as a contraction")


def sampled_lipschitz(fn: Callable, dim: int, box: Sequence[tuple[float, float]], samples: int = 64,
                      seed: int = 12345) -> float:
    rng = LCG(seed)
    worst = 0.0
    for _ in range(samples):
        p = [lo + (hi - lo) * rng.uniform() for lo, hi in box[:dim]]
        q = [lo + (hi - lo) * rng.uniform() for lo, hi in box[:dim]]
        dp = max(abs(a - b) for a, b in zip(p, q))
        if dp == 0:
            continue
        fp, fq = fn(tuple(p)), fn(tuple(q))
        worst = max(worst, max(abs(a - b) for a, b in zip(fp, fq)) / dp)
    return worst


def ifs_attract(contractions: Sequence, iterations: int, seed: int, burn_in: int = 20,
                box: Sequence[tuple[float, float]] | None = None, start: Sequence[float] | None = None) -> np.ndarray:
    """Chaos-game cloud of ``iterations - burn_in`` points (rows), deterministic in ``seed``.

    Maps are ``(a, b)`` pairs for ``y -> a y + b``, objects with ``evaluate``
    (two-dimensional), or callables on tuples.
    """
    if not contractions:
        raise PreconditionError("need at least one map")
    if iterations <= burn_in:
        raise PreconditionError("iterations must exceed burn_in", iterations=iterations, burn_in=burn_in)
    fns = [_as_callable(m) for m in contractions]
    dims = {d for _, d in fns if d}
    dim = dims.pop() if len(dims) == 1 else (2 if not dims else None)
    if dim is None:
        raise PreconditionError("maps mix one- and two-dimensional inputs")
    box = list(box) if box is not None else [(-2.0, 2.0)] * dim
    for i, (fn, _) in enumerate(fns):
        lip = sampled_lipschitz(fn, dim, box)
        if lip >= 1.0:
            raise PreconditionError(f"map {i} is not a contraction on the box (sampled Lipschitz {lip:.3g})",
                                    index=i, lipschitz=lip)
    rng = LCG(seed)
    p = tuple(float(v) for v in (start if start is not None else [0.0] * dim))
    out = np.empty((iterations - burn_in, dim))
    for it in range(iterations):
        fn, _ = fns[rng.index(len(fns))]
        p = tuple(float(v) for v in fn(p))
        if it >= burn_in:
            out[it - burn_in] = p
    return out


__all__ = [
    "COVERED",
    "CoveringCertificate",
    "GAP",
    "JetBox",
    "LCG",
    "grid_free_covered",
    "grid_oracle_covered",
    "ifs_attract",
    "jet_map",
    "jet_preimage",
    "recheck",
    "robust_requirement",
    "verify_blender_1d",
    "verify_blender_2d",
    "verify_parablender_jets",
]
