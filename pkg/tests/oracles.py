"""Independent reference computations shared by the tests.

Nothing here imports the library's jet or interval code.
"""

from __future__ import annotations

import math
import random

import mpmath

# one-dimensional central stencils on offsets -2..2 (error O(h^2))
STENCILS = {
    0: {0: 1.0},
    1: {1: 0.5, -1: -0.5},
    2: {1: 1.0, 0: -2.0, -1: 1.0},
    3: {2: 0.5, 1: -1.0, -1: 1.0, -2: -0.5},
}


def random_poly2(rng: random.Random, degree: int, scale: float = 1.0) -> dict:
    """Random polynomial ``{(i, j): c}`` of total degree <= ``degree``."""
    return {(i, j): rng.uniform(-scale, scale) for i in range(degree + 1) for j in range(degree + 1 - i)}


def eval_poly2(poly: dict, x, y):
    return sum(c * x ** i * y ** j for (i, j), c in poly.items())


def eval_poly2_cached(poly: dict, x, y):
    """Same value as :func:`eval_poly2`, with powers built by repeated multiplication."""
    deg = max(i + j for i, j in poly)
    xp, yp = [1], [1]
    for _ in range(deg):
        xp.append(xp[-1] * x)
        yp.append(yp[-1] * y)
    return sum(c * xp[i] * yp[j] for (i, j), c in poly.items())


def fd_partials_2d(fn, point, order: int, h: float = 1e-5, dps: int = 40, components: int | None = None):
    """All partial derivatives of ``fn(s, t)`` with ``i + j <= order`` by central differences in mpmath.

    With ``components`` set, ``fn`` returns a tuple and one dict per entry is returned.
    """
    with mpmath.workdps(dps):
        hs = mpmath.mpf(h)
        s0, t0 = mpmath.mpf(point[0]), mpmath.mpf(point[1])
        # only the offsets some stencil product actually touches
        needed = {(p, q) for i in range(order + 1) for j in range(order + 1 - i)
                  for p in STENCILS[i] for q in STENCILS[j]}
        vals = {}
        for p, q in sorted(needed):
            v = fn(s0 + p * hs, t0 + q * hs)
            vals[(p, q)] = (v,) if components is None else tuple(v)
        outs = []
        for k in range(1 if components is None else components):
            out = {}
            for i in range(order + 1):
                for j in range(order + 1 - i):
                    acc = mpmath.mpf(0)
                    for p, wp in STENCILS[i].items():
                        for q, wq in STENCILS[j].items():
                            acc += wp * wq * vals[(p, q)][k]
                    out[(i, j)] = float(acc / hs ** (i + j))
            outs.append(out)
        return outs[0] if components is None else outs


def fd_derivatives_1d(fn, point: float, order: int, h: float = 1e-5, dps: int = 40) -> list[float]:
    with mpmath.workdps(dps):
        hs = mpmath.mpf(h)
        t0 = mpmath.mpf(point)
        vals = {p: fn(t0 + p * hs) for p in range(-2, 3)}
        return [float(sum(w * vals[p] for p, w in STENCILS[k].items()) / hs ** k) for k in range(order + 1)]


def exhaustive_band_pairs(sigma_u: float, lam: float, lo: float, hi: float, m_max: int):
    """All ``(n, m)`` with ``m <= m_max`` and ``lam^m sigma_u^n`` in ``[lo, hi]``, by brute force."""
    out = []
    for m in range(1, m_max + 1):
        for n in range(1, 4 * m_max + 10):
            v = lam ** m * sigma_u ** n
            if lo <= v <= hi:
                out.append((n, m))
    return out


def relclose(a: float, b: float, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(1.0, abs(b))


def quadratic_eigs(a: float, b: float, c: float, d: float) -> tuple[complex, complex]:
    """Eigenvalues of ``[[a, b], [c, d]]`` by the quadratic formula."""
    tr, det = a + d, a * d - b * c
    disc = tr * tr - 4 * det
    r = math.sqrt(disc) if disc >= 0 else 1j * math.sqrt(-disc)
    return ((tr + r) / 2, (tr - r) / 2)
