"""Cone-field certificates for inverse branches.

The cone is ``C = {(u, v): |u| <= eta |v|}`` around the vertical axis.  A
branch (a contraction) certifies hyperbolicity of the expanding return map
when its derivative sends the closed cone into the open cone and shrinks
every cone vector.  Derivatives are enclosed by interval jets over each grid
cell, so a cell's bound covers every base point in the cell.
"""

from __future__ import annotations

from dataclasses import dataclass

from blenderlab.dynamics.words import interval_jacobian
from blenderlab.errors import ConeFailure, DomainError
from blenderlab.numerics.interval import Box2


@dataclass(frozen=True)
class ConeCertificate:
    box: Box2
    eta: float
    contraction_ratio: float  # sup of |u'| / (eta |v'|) over the cone boundary
    expansion_lower_bound: float  # inf of |w| / |Dw| over cone vectors (sup norm)
    cells: int

    def to_dict(self) -> dict:
        return {
            "box": self.box.to_list(),
            "eta": self.eta,
            "contraction_ratio": self.contraction_ratio,
            "expansion_lower_bound": self.expansion_lower_bound,
            "cells": self.cells,
        }


def _cell_bounds(jac, eta: float):
    (a, b), (c, d) = jac
    worst_ratio = 0.0
    worst_dir = (eta, 1.0)
    # |v'| >= |v| (|d| - eta |c|) over the whole cone
    v_low = d.mig() - eta * c.mag()
    for s in (1.0, -1.0):
        u = a * (s * eta) + b
        if v_low <= 0:
            return float("inf"), (s * eta, 1.0), 0.0
        ratio = u.mag() / (eta * v_low)
        if ratio > worst_ratio:
            worst_ratio, worst_dir = ratio, (s * eta, 1.0)
    u_norm = a.mag() * eta + b.mag()
    v_norm = c.mag() * eta + d.mag()
    norm = max(u_norm, v_norm)
    # sup norm of a cone vector with v = 1 is max(1, eta) >= 1
    expansion = float("inf") if norm == 0 else 1.0 / norm
    return worst_ratio, worst_dir, expansion


def certify_cone(word, box: Box2, eta: float, samples: int = 16) -> ConeCertificate:
    """Certify that ``D word`` maps the closed cone into the open cone on ``box``.

    Raises :class:`ConeFailure` with the worst cell center and boundary
    direction when the cone is not preserved or vectors are not contracted.
    """
    if eta <= 0:
        raise ValueError("cone aperture eta must be positive")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    ratio = 0.0
    expansion = float("inf")
    witness = None
    for cell in box.split(samples, samples):
        try:
            jac = interval_jacobian(word, cell)
        except DomainError as exc:
            raise ConeFailure("word not evaluable on a grid cell", cell=cell.to_list(),
                              reason=str(exc)) from exc
        r, direction, e = _cell_bounds(jac, eta)
        if witness is None or r > ratio:
            ratio, witness = r, (cell.center, direction)
        expansion = min(expansion, e)
    if ratio >= 1.0 or expansion <= 1.0:
        point, direction = witness
        raise ConeFailure(
            "cone not preserved" if ratio >= 1.0 else "cone vectors not contracted",
            point=list(point), direction=list(direction), ratio=ratio, expansion=expansion,
        )
    return ConeCertificate(box, float(eta), float(ratio), float(expansion), samples * samples)


def sampled_cone_ratio(word, box: Box2, eta: float, points: int = 32, directions: int = 64) -> float:
    """Point-sampled ratio without interval inflation (an independent estimate)."""
    import numpy as np

    worst = 0.0
    for x in np.linspace(box.x.lo, box.x.hi, points):
        for y in np.linspace(box.y.lo, box.y.hi, points):
            jac = interval_jacobian(word, Box2.point(float(x), float(y)))
            m = np.array([[jac[i][j].mid for j in range(2)] for i in range(2)])
            for u in np.linspace(-eta, eta, directions):
                w = m @ np.array([u, 1.0])
                worst = max(worst, abs(w[0]) / (eta * abs(w[1])))
    return worst

