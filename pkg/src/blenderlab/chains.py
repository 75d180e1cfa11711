"""Flatness boosting along a chain of two heterocycles.

Chart conventions (all quantities are jets in the parameter ``a`` at 0):

* at the saddle ``P``: inverse branch ``(x, y) -> (sigma x, lam y)``;
* at the source ``S``: inverse branch ``(x, y) -> (sigma_uu x, sigma_u y)``;
* ``H_a = (0, h_a)`` in the saddle chart, and the transition satisfies
  ``T_a(H_a + w) = (z_a, 0) + T(w)`` with ``T(0) = 0``;
* ``S'_a = (x_a, y_a)`` is the preimage of the second source, and
  ``W^u(P^1)`` is the graph ``y = gamma_a(x)`` in the source chart.

Following the composition argument, ``S'_a`` is first moved to
``(x_a, y_a + lam_a^-m h_a)`` so that ``P^m`` lands at ``H_a`` plus a small
displacement.  The mismatch is ``eta_a = gamma_a(p_x Z_a) - p_y Z_a`` for
``Z_a = S^n T_a P^m (S'_a)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Mapping

import numpy as np

from blenderlab.dynamics.poly import PolyMap
from blenderlab.errors import ConfigError, PreconditionError, SearchExhaustedError
from blenderlab.hetero_model import small_rational
from blenderlab.numerics.jet import Jet, substitute

MAGNITUDE_LIMIT = 10.0
DEFAULT_TOL = 0.02
DEFAULT_CAP = 200


def _jet1(v, order: int) -> Jet:
    if isinstance(v, Jet):
        if v.num_vars != 1:
            raise ConfigError("parameter jets must be one-variable")
        if v.order < order:
            c = np.zeros(order + 1)
            c[: v.order + 1] = v.coeffs
            return Jet(c, 1, order)
        return v.truncate(order)
    if isinstance(v, (int, float)):
        return Jet.constant(float(v), 1, order)
    c = np.zeros(order + 1)
    vals = [float(x) for x in v]
    c[: min(len(vals), order + 1)] = vals[: order + 1]
    return Jet(c, 1, order)


def _gamma_jet(v, order: int) -> Jet:
    """Two-variable jet in ``(x, a)``; dicts use ``"i,j"`` keys for ``x^i a^j``."""
    if isinstance(v, Jet):
        if v.num_vars != 2:
            raise ConfigError("gamma must be a jet in (x, a)")
        return v
    terms = {}
    for key, c in dict(v).items():
        i, j = (int(s) for s in str(key).split(","))
        terms[(i, j)] = float(c)
    return Jet.from_dict(terms, 2, order)


@dataclass(frozen=True)
class ChainModel:
    sigma: Jet
    lam: Jet
    sigma_uu: Jet
    sigma_u: Jet
    h: Jet
    z: Jet
    x: Jet
    y: Jet
    gamma: Jet  # in (x, a)
    T: PolyMap  # centred at H, T(0) = 0
    d: int = 0

    @property
    def order(self) -> int:
        return self.d + 1

    @property
    def Delta(self) -> float:
        return float(self.T.py.coeff(0, 1))

    def validate(self, tol: float = 1e-14) -> "ChainModel":
        if self.T.px.coeff(0, 0) != 0 or self.T.py.coeff(0, 0) != 0:
            raise ConfigError("the transition must satisfy T(0) = 0 (the constant lives in z_a)")
        if self.Delta == 0:
            raise ConfigError("Delta = d_y T_y(H) must be nonzero")
        for k in range(self.d + 1):
            if abs(self.y.coeffs[k]) > tol or abs(self.gamma.coeff((0, k))) > tol:
                raise ConfigError(f"order-{k} jets of y_a and gamma_a(0) must vanish for flatness order d = {self.d}",
                                  order=k)
        return self

    def gamma_leading(self) -> float:
        return float(self.gamma.derivative((0, self.d + 1)))

    def y_leading(self) -> float:
        return float(self.y.derivative(self.d + 1)) if self.y.order > self.d else 0.0

    def translate_gamma(self, shift: Jet) -> "ChainModel":
        """``gamma_a(x) -> gamma_a(x) - shift(a)``."""
        terms = {}
        for k in range(shift.order + 1):
            terms[(0, k)] = -float(shift.coeffs[k])
        delta = Jet.from_dict(terms, 2, self.gamma.order)
        return replace(self, gamma=self.gamma + delta)

    def to_dict(self) -> dict:
        def arr(j):
            return [float(c) for c in j.coeffs]

        gamma = {f"{i},{j}": float(self.gamma.coeff((i, j))) for (i, j) in self.gamma.indices
                 if self.gamma.coeff((i, j)) != 0}
        return {
            "sigma": arr(self.sigma), "lambda": arr(self.lam), "sigma_uu": arr(self.sigma_uu),
            "sigma_u": arr(self.sigma_u), "h": arr(self.h), "z": arr(self.z), "x": arr(self.x), "y": arr(self.y),
            "gamma": gamma, "gamma_order": self.gamma.order, "T": self.T.to_tables(), "d": self.d,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ChainModel":
        d = int(data.get("d", 0))
        order = d + 1
        T = PolyMap.from_tables(data["T"]["x"], data["T"]["y"], "T")
        g = _gamma_jet(data["gamma"], int(data.get("gamma_order", order)))
        return cls(_jet1(data["sigma"], order), _jet1(data["lambda"], order), _jet1(data["sigma_uu"], order),
                   _jet1(data["sigma_u"], order), _jet1(data.get("h", 0.5), order), _jet1(data.get("z", 0.0), order),
                   _jet1(data.get("x", 0.0), order), _jet1(data["y"], order), g, T, d).validate()


def synthetic_chain(lam=-3.0, sigma_u=0.5, dy=2.0, dgamma=0.25, Delta=1.0, d=0, sigma=0.3, sigma_uu=0.2,
                    h=0.5, z=0.1, x=0.05, T_extra: Mapping | None = None, gamma_slope=0.0) -> ChainModel:
    """Chain whose only ``a``-dependence is ``y_a`` and ``gamma_a(0)`` at order ``d + 1``."""
    order = d + 1
    fact = math.factorial(order)
    y = np.zeros(order + 1)
    y[order] = dy / fact
    tx = {"y": 0.0, "x": 1.0}
    ty = {"y": Delta}
    if T_extra:
        for k, v in T_extra.get("x", {}).items():
            tx[k] = v
        for k, v in T_extra.get("y", {}).items():
            ty[k] = v
    gamma = {(0, order): dgamma / fact}
    if gamma_slope:
        gamma[(1, 0)] = gamma_slope
    return ChainModel(
        _jet1(sigma, order), _jet1(lam, order), _jet1(sigma_uu, order), _jet1(sigma_u, order),
        _jet1(h, order), _jet1(z, order), _jet1(x, order), Jet(y, 1, order),
        Jet.from_dict(gamma, 2, order), PolyMap.from_tables(tx, ty, "T"), d,
    ).validate()


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


def _pow(j: Jet, k: int) -> Jet:
    return j ** k if k >= 0 else (j ** (-k)).reciprocal()


def composed_point(chain: ChainModel, n: int, m: int) -> tuple[Jet, Jet]:
    """Exact jets of ``S^n T_a P^m`` applied to the moved ``S'_a``."""
    lam_m = _pow(chain.lam, m)
    moved_y = chain.y + _pow(chain.lam, -m) * chain.h
    # P^m lands at H_a + (sigma^m x_a, lam^m y_a); T is centred at H_a
    wx = _pow(chain.sigma, m) * chain.x
    wy = lam_m * moved_y - chain.h
    tx, ty = chain.T.evaluate((wx, wy))
    X = chain.z + tx
    Y = ty
    return _pow(chain.sigma_uu, n) * X, _pow(chain.sigma_u, n) * Y


def mismatch(chain: ChainModel, n: int, m: int) -> Jet:
    px, py = composed_point(chain, n, m)
    a = Jet.variable(0, 0.0, 1, px.order)
    return substitute(chain.gamma, [px, a]) - py


def _poly_at(j: Jet, a: float) -> float:
    return float(j.polynomial_value([a]))


def mismatch_scalar(chain: ChainModel, n: int, m: int, a: float) -> float:
    """The same mismatch evaluated pointwise (the model's functions are the jet polynomials)."""
    lam, sig = _poly_at(chain.lam, a), _poly_at(chain.sigma, a)
    suu, su = _poly_at(chain.sigma_uu, a), _poly_at(chain.sigma_u, a)
    h, z, x, y = (_poly_at(j, a) for j in (chain.h, chain.z, chain.x, chain.y))
    wx = sig ** m * x
    wy = lam ** m * (y + lam ** (-m) * h) - h
    tx, ty = chain.T.evaluate((wx, wy))
    X, Y = suu ** n * (z + float(tx)), su ** n * float(ty)
    return float(chain.gamma.polynomial_value([X, a])) - Y


def fd_derivatives(fn, order: int, step: float = 1e-4) -> list[float]:
    """Central differences with one Richardson step; entry ``k`` approximates the ``k``-th derivative."""
    def central(h):
        out = [fn(0.0)]
        for k in range(1, order + 1):
            total = 0.0
            for i in range(k + 1):
                total += (-1) ** i * math.comb(k, i) * fn((k / 2 - i) * h)
            out.append(total / h ** k)
        return out

    coarse, fine = central(2 * step), central(step)
    return [fine[0]] + [(4 * f - c) / 3 for f, c in zip(fine[1:], coarse[1:])]


@dataclass(frozen=True)
class CompositionReport:
    n: int
    m: int
    exact: tuple  # (x jet, y jet)
    predicted: tuple  # (x jet, y jet)
    deviation: float  # max over orders <= d + 1 of the derivative gap

    def to_dict(self) -> dict:
        return {
            "n": self.n, "m": self.m,
            "exact": [[float(c) for c in j.coeffs] for j in self.exact],
            "predicted": [[float(c) for c in j.coeffs] for j in self.predicted],
            "deviation": self.deviation,
        }


def product_magnitude(chain: ChainModel, n: int, m: int) -> float:
    su0, lam0 = float(chain.sigma_u.value), float(chain.lam.value)
    log_p = n * math.log(abs(su0)) + m * math.log(abs(lam0))
    return math.exp(log_p) if log_p < 700 else math.inf


def compose_asymptotic(chain: ChainModel, n: int, m: int) -> CompositionReport:
    """Exact composed jet next to the leading-term prediction ``(0, sigma_u^n Delta lam^m y^(d+1) a^(d+1)/(d+1)!)``."""
    prod = product_magnitude(chain, n, m)
    if prod > MAGNITUDE_LIMIT:
        raise PreconditionError(f"|sigma_u^n lam^m| = {prod:.4g} exceeds {MAGNITUDE_LIMIT}", product=prod, n=n, m=m)
    ex = composed_point(chain, n, m)
    order = chain.order
    su0, lam0 = float(chain.sigma_u.value), float(chain.lam.value)
    c = np.zeros(order + 1)
    c[order] = su0 ** n * chain.Delta * lam0 ** m * chain.y_leading() / math.factorial(order)
    pred = (Jet.constant(0.0, 1, order), Jet(c, 1, order))
    dev = 0.0
    for e, p in zip(ex, pred):
        dev = max(dev, float(np.max(np.abs((e - p).derivatives()))))
    return CompositionReport(n, m, ex, pred, dev)


# ---------------------------------------------------------------------------
# Flatness boost
# ---------------------------------------------------------------------------


def log_distance(chain: ChainModel, n: int, m: int) -> float:
    """``|n log|sigma_u| + m log|lam| + log|Delta| + log|y^(d+1)| - log|gamma^(d+1)(0)||``.

    ``Delta`` enters with a plus sign: the composed point scales ``y_a`` by
    ``sigma_u^n Delta lam^m``.
    """
    su0, lam0 = float(chain.sigma_u.value), float(chain.lam.value)
    return abs(n * math.log(abs(su0)) + m * math.log(abs(lam0)) + math.log(abs(chain.Delta))
               + math.log(abs(chain.y_leading())) - math.log(abs(chain.gamma_leading())))


def _sign_ok(chain: ChainModel, n: int, m: int) -> bool:
    su0, lam0 = float(chain.sigma_u.value), float(chain.lam.value)
    s = math.copysign(1.0, su0) ** n * math.copysign(1.0, lam0) ** m * math.copysign(1.0, chain.Delta)
    s *= math.copysign(1.0, chain.y_leading())
    return s == math.copysign(1.0, chain.gamma_leading())


def select_flat_pair(chain: ChainModel, tol: float = DEFAULT_TOL, cap: int = DEFAULT_CAP) -> tuple[int, int, float]:
    """Smallest ``m`` (then ``n``) with the matching sign and log-distance within ``tol``."""
    su0, lam0 = float(chain.sigma_u.value), float(chain.lam.value)
    target = math.log(abs(chain.gamma_leading())) - math.log(abs(chain.Delta)) - math.log(abs(chain.y_leading()))
    best = (math.inf, None)
    for m in range(1, cap + 1):
        base = round((target - m * math.log(abs(lam0))) / math.log(abs(su0)))
        for n in sorted({max(1, base - 1), max(1, base), max(1, base + 1)}):
            if not _sign_ok(chain, n, m):
                continue
            dist = log_distance(chain, n, m)
            if dist <= tol:
                return n, m, dist
            best = min(best, (dist, (n, m)))
    raise SearchExhaustedError(f"no (n, m) with m <= {cap} within log-distance {tol}", cap=cap,
                               best_pair=best[1], best_log_distance=best[0])


@dataclass(frozen=True)
class FlatnessReport:
    n: int
    m: int
    parity: str
    log_distance: float
    eta_before: Jet
    eta_after: Jet
    translation: Jet
    achieved_order: int
    tol: float
    chain: ChainModel  # after translation

    def to_dict(self) -> dict:
        return {
            "n": self.n, "m": self.m, "parity": self.parity, "log_distance": self.log_distance,
            "eta_before": [float(c) for c in self.eta_before.coeffs],
            "eta_after": [float(c) for c in self.eta_after.coeffs],
            "eta_after_derivatives": [float(c) for c in self.eta_after.derivatives()],
            "translation": [float(c) for c in self.translation.coeffs],
            "achieved_order": self.achieved_order, "tol": self.tol,
        }


def achieved_order(eta: Jet, tol: float) -> int:
    """Largest ``k`` with every derivative of order ``<= k`` below ``tol`` (``-1`` if none)."""
    k = -1
    for v in eta.derivatives():
        if abs(float(v)) > tol:
            break
        k += 1
    return k


def boost_flatness(chain: ChainModel, tol: float = DEFAULT_TOL, cap: int = DEFAULT_CAP,
                   full_translation: bool = False) -> FlatnessReport:
    """Choose ``(n, m)`` matching the leading jets, then translate ``gamma`` to cancel the low orders.

    The translation subtracts the order ``<= d`` part of ``eta_a`` (a
    parameter-dependent shift of the graph, small because those orders are
    only disturbed by ``sigma_uu^n`` and ``sigma^m`` terms).  The order
    ``d + 1`` coefficient keeps the matching residual.  With
    ``full_translation`` the whole jet is subtracted.
    """
    if not float(chain.lam.value) < 0:
        raise PreconditionError("flatness boosting needs lambda < 0 to choose the sign by parity",
                                lam=float(chain.lam.value))
    if chain.gamma_leading() == 0:
        raise PreconditionError(f"d^{chain.d + 1}_a gamma_a(0) vanishes", order=chain.d + 1)
    if chain.y_leading() == 0:
        raise PreconditionError(f"d^{chain.d + 1}_a y_a vanishes", order=chain.d + 1)
    ratio = math.log(abs(float(chain.sigma_u.value))) / math.log(abs(float(chain.lam.value)))
    frac = small_rational(ratio)
    if frac is not None:
        raise PreconditionError(f"log|sigma_u|/log|lambda| = {ratio} is close to {frac}", ratio=ratio)
    n, m, dist = select_flat_pair(chain, tol, cap)
    before = mismatch(chain, n, m)
    keep = before.order if full_translation else chain.d
    c = np.zeros(before.order + 1)
    c[: keep + 1] = before.coeffs[: keep + 1]
    shift = Jet(c, 1, before.order)
    moved = chain.translate_gamma(shift)
    after = mismatch(moved, n, m)
    return FlatnessReport(n, m, "even" if m % 2 == 0 else "odd", dist, before, after, shift,
                          achieved_order(after, tol), tol, moved)


# ---------------------------------------------------------------------------
# Chain lengths
# ---------------------------------------------------------------------------


def chain_length(r: int, k: int) -> int:
    """Number of monomials of degree ``1..r`` in ``k`` parameters, ``C(r + k, k) - 1``."""
    if r < 0 or k < 1:
        raise ValueError("need r >= 0 and k >= 1")
    return math.comb(r + k, k) - 1


def chain_length_doubling(d: int) -> int:
    if d < 0:
        raise ValueError("need d >= 0")
    return 2 ** d


__all__ = [
    "ChainModel",
    "CompositionReport",
    "FlatnessReport",
    "achieved_order",
    "boost_flatness",
    "chain_length",
    "chain_length_doubling",
    "compose_asymptotic",
    "composed_point",
    "fd_derivatives",
    "log_distance",
    "mismatch",
    "mismatch_scalar",
    "product_magnitude",
    "select_flat_pair",
    "synthetic_chain",
]
