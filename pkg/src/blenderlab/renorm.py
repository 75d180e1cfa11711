"""Renormalization of a strong heterocycle into a nearly affine blender.

The inverse branches ``g = T_S S^n T_Q Q^m`` are conjugated by the rescaling
``H(x, y) = (x, eps |lam|^-m+ y)``.  The exponents are tens of millions for
realistic tolerances, so scalings like ``3^-2.4e7`` are far below double
range.  The composition is therefore done exactly on sparse polynomials with
mpmath coefficients, and only the final, order-one coefficients are rounded
to doubles.  Exponent searches work with logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Mapping, Sequence

import mpmath
import numpy as np

from blenderlab.dynamics.poly import Poly2, PolyMap
from blenderlab.errors import (
    ConfigError,
    DegenerateError,
    DomainError,
    InfeasibleError,
    PreconditionError,
    SearchExhaustedError,
)
from blenderlab.hetero_model import HeterocycleModel, ModelFamily, log_ratio, small_rational, unfold
from blenderlab.io import decode_number, encode_number
from blenderlab.numerics.interval import Box2, Interval
from blenderlab.numerics.jet import Jet, invert_series, substitute

PREC_BITS = 160
RENORM_BOX = Box2.from_bounds(-2.0, 2.0, -2.0, 2.0)
DEFAULT_GRID = 33
DEFAULT_CAP = 10 ** 9
DEFAULT_SCAN = 2_000_000


def _mpf(v) -> mpmath.mpf:
    return v if isinstance(v, mpmath.mpf) else mpmath.mpf(v)


# ---------------------------------------------------------------------------
# Exponent selection
# ---------------------------------------------------------------------------


def check_irrational_ratio(sigma_u: float, lam_abs: float) -> float:
    ratio = log_ratio(sigma_u, lam_abs)
    frac = small_rational(ratio)
    if frac is not None:
        raise ConfigError(f"log sigma_u / log |lambda| = {ratio} is (numerically) the small rational {frac}",
                          ratio=ratio, fraction=str(frac))
    return ratio


def convergents(value: float, count: int = 40) -> list[Fraction]:
    """Continued-fraction convergents of a positive real."""
    out = []
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    x = value
    for _ in range(count):
        a = math.floor(x)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        out.append(Fraction(h1, k1))
        frac = x - a
        if frac < 1e-15:
            break
        x = 1.0 / frac
    return out


def _parity_ok(m: int, parity: str | None) -> bool:
    return parity is None or (parity == "even" and m % 2 == 0) or (parity == "odd" and m % 2 == 1)


def _band_log_distance(n: int, m: int, log_su: float, log_l: float, eps: float) -> float:
    """How far ``lam^m sigma_u^n`` is outside the band, in log units (<= 0 inside)."""
    v = m * log_l + n * log_su  # log of the product
    lo, hi = math.log1p(-eps / 10), math.log1p(eps / 10)
    return max(lo - v, v - hi)


def select_base_pair(sigma_u: float, lambda_abs: float, eps: float, cap: int = 100,
                     parity: str | None = None) -> tuple[int, int]:
    """Smallest-``m`` pair with ``lambda_abs^m sigma_u^n`` in ``[1 - eps/10, 1 + eps/10]``.

    Convergents of ``log lambda_abs / log(1/sigma_u)`` give a candidate fast;
    the scan over smaller ``m`` then confirms that nothing earlier qualifies.
    """
    if not (0 < sigma_u < 1 < lambda_abs):
        raise PreconditionError("need 0 < sigma_u < 1 < lambda_abs", sigma_u=sigma_u, lambda_abs=lambda_abs)
    if eps <= 0:
        raise PreconditionError("eps must be positive", eps=eps)
    check_irrational_ratio(sigma_u, lambda_abs)
    log_su, log_l = math.log(sigma_u), math.log(lambda_abs)
    slope = log_l / -log_su
    candidate = None
    for c in convergents(slope):
        n, m = c.numerator, c.denominator
        if m > cap:
            break
        if n >= 1 and _parity_ok(m, parity) and _band_log_distance(n, m, log_su, log_l, eps) <= 0:
            candidate = (n, m)
            break
    limit = candidate[1] if candidate else cap
    best = (math.inf, None)
    for m in range(1, limit + 1):
        if not _parity_ok(m, parity):
            continue
        n = max(1, round(m * slope))
        dist = _band_log_distance(n, m, log_su, log_l, eps)
        if dist <= 0:
            return (n, m)
        best = min(best, (dist, (n, m)))
    if candidate:
        return candidate
    raise SearchExhaustedError(f"no pair with m <= {cap} in the band", cap=cap, best_pair=best[1],
                               best_log_distance=best[0])


@dataclass(frozen=True)
class RenormPlan:
    n_minus: int
    m_minus: int
    n_plus: int
    m_plus: int
    eps: float
    Delta: float
    d: float
    order: int
    sigma_u: float
    lam: float
    sigma_uu: float
    sigma: float
    tuned: tuple | None = None  # (s_y, q_y) as mpf

    @property
    def lam_abs(self) -> float:
        return abs(self.lam)

    @property
    def base_pair(self) -> tuple[int, int]:
        return (self.n_plus - self.n_minus, self.m_plus - self.m_minus)

    @property
    def parity(self) -> str:
        return "even" if self.m_minus % 2 == 0 else "odd"

    @property
    def H_scale(self) -> mpmath.mpf:
        with mpmath.workprec(PREC_BITS):
            return _mpf(self.eps) * _mpf(self.lam_abs) ** (-self.m_plus)

    def delta_pm(self, sign: str) -> mpmath.mpf:
        """``Delta_pm = sigma_u^n lam^m d`` (signed) at working precision."""
        n, m = (self.n_plus, self.m_plus) if sign == "+" else (self.n_minus, self.m_minus)
        with mpmath.workprec(PREC_BITS):
            return _mpf(self.sigma_u) ** n * _mpf(self.lam) ** m * _mpf(self.d)

    @property
    def delta_minus(self) -> float:
        return float(self.delta_pm("-"))

    @property
    def delta_plus(self) -> float:
        return float(self.delta_pm("+"))

    @property
    def kappa(self) -> float:
        return max(self.sigma_u, self.sigma_uu, self.sigma_uu / self.sigma_u, 1.0 / self.lam_abs, self.sigma)

    def invariants(self) -> dict[str, bool]:
        """Each plan condition re-checked from the stored integers at high precision."""
        eps = self.eps
        with mpmath.workprec(PREC_BITS):
            e = _mpf(eps)
            hypo1 = (self.n_plus > self.n_minus >= 1 / eps) and (self.m_plus > self.m_minus >= 1 / eps)
            dm, dp = self.delta_pm("-"), self.delta_pm("+")
            hypo3 = all(self.Delta - e <= v <= self.Delta + e for v in (dm, dp))
            su_gap = _mpf(self.sigma_u) ** (self.n_plus - self.n_minus)
            lam_gap = _mpf(self.lam_abs) ** (self.m_plus - self.m_minus)
            hypo2 = su_gap <= e and lam_gap <= e * e * min(self.n_minus, self.m_minus)
            k = _mpf(self.kappa)
            kappa_ok = k ** self.n_minus < _mpf(self.n_minus) ** (-(self.order + 4))
        return {"hypo1": bool(hypo1), "hypo2": bool(hypo2), "hypo3": bool(hypo3), "kappa": bool(kappa_ok)}

    def printed_hypo2_holds(self) -> bool:
        """The inequality as printed, ``1/eps <= sigma_u^(n+ - n-)``; false whenever sigma_u < 1."""
        with mpmath.workprec(PREC_BITS):
            return bool(1 / _mpf(self.eps) <= _mpf(self.sigma_u) ** (self.n_plus - self.n_minus))

    def validate(self) -> "RenormPlan":
        bad = [k for k, ok in self.invariants().items() if not ok]
        if bad:
            raise InfeasibleError(f"plan violates {', '.join(bad)}", violated=bad)
        return self

    def to_dict(self) -> dict:
        out = {
            "n_minus": self.n_minus, "m_minus": self.m_minus, "n_plus": self.n_plus, "m_plus": self.m_plus,
            "eps": self.eps, "Delta": self.Delta, "d": self.d, "order": self.order,
            "sigma_u": self.sigma_u, "lambda": self.lam, "sigma_uu": self.sigma_uu, "sigma": self.sigma,
            "parity": self.parity,
            "base_pair": list(self.base_pair),
            "delta_minus": self.delta_minus, "delta_plus": self.delta_plus,
            "H_scale": encode_number(self.H_scale),
            "invariants": self.invariants(),
            "printed_hypo2_holds": self.printed_hypo2_holds(),
        }
        if self.tuned is not None:
            out["tuned"] = {"s_y": encode_number(self.tuned[0]), "q_y": encode_number(self.tuned[1])}
        return out

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RenormPlan":
        tuned = None
        if "tuned" in d:
            tuned = (decode_number(d["tuned"]["s_y"]), decode_number(d["tuned"]["q_y"]))
        return cls(int(d["n_minus"]), int(d["m_minus"]), int(d["n_plus"]), int(d["m_plus"]), float(d["eps"]),
                   float(d["Delta"]), float(d["d"]), int(d["order"]), float(d["sigma_u"]), float(d["lambda"]),
                   float(d["sigma_uu"]), float(d["sigma"]), tuned)


def required_min_exponent(eps: float, lam_abs: float, m_base: int) -> int:
    """Lower bound on ``min(n-, m-)``.

    Combines ``n-, m- >= 1/eps``, the explicit ``eps^-3`` floor, and the
    second half of the corrected gap condition ``|lam|^(m+ - m-) <= eps^2 min(n-, m-)``.
    """
    floor1 = math.ceil(1 / eps - 1e-12)
    floor3 = math.ceil(eps ** -3 - 1e-9)
    floor_gap = math.ceil(lam_abs ** m_base / (eps * eps) - 1e-9)
    return max(floor1, floor3, floor_gap, 1)


def select_exponents(model: HeterocycleModel, Delta: float, eps: float, cap: int = DEFAULT_CAP,
                     order: int = 3, base_cap: int = 100, max_scan: int = DEFAULT_SCAN) -> RenormPlan:
    """Exponents ``n-, m-, n+, m+`` satisfying every plan condition.

    ``cap`` bounds ``m-``; the inner band is ``Delta +- eps/10``.
    """
    if not model.strong:
        raise PreconditionError("exponent selection needs a strong heterocycle (T_Q present)")
    if not Delta > 1:
        raise PreconditionError("Delta must exceed 1", Delta=Delta)
    if not 0 < eps < 1:
        raise PreconditionError("eps must lie in (0, 1)", eps=eps)
    d = model.d
    if d == 0:
        raise InfeasibleError("d_y Y^S(0) = 0: the branches are degenerate", d=d)
    if model.lam > 0 and Delta * d <= 0:
        raise InfeasibleError("sign: Delta * d_y Y^S(0) must be positive for lambda > 0", Delta=Delta, d=d)
    base_parity = "even" if model.lam < 0 else None
    n_b, m_b = select_base_pair(model.sigma_u, model.lam_abs, eps, base_cap, base_parity)
    log_su, log_l = math.log(model.sigma_u), math.log(model.lam_abs)
    if n_b * log_su > math.log(eps):
        raise InfeasibleError("sigma_u^(n+ - n-) <= eps fails for the base pair", base_pair=[n_b, m_b])
    start = required_min_exponent(eps, model.lam_abs, m_b)
    if start > cap:
        raise SearchExhaustedError(f"inner search needs m- >= {start} but cap = {cap}", required=start, cap=cap,
                                   best_band_distance=None)
    want_sign = 1 if Delta > 0 else -1
    log_target = math.log(Delta) - math.log(abs(d))
    best = (math.inf, None)
    m = start
    scanned = 0
    while m <= cap and scanned < max_scan:
        scanned += 1
        sign = (1 if d > 0 else -1) * (1 if model.lam > 0 or m % 2 == 0 else -1)
        if sign == want_sign:
            n = round((m * log_l - log_target) / -log_su)
            if n >= start:
                value = math.exp(n * log_su + m * log_l - log_target) * Delta  # |Delta_-|
                dist = abs(value - Delta)
                if dist <= eps / 10:
                    plan = RenormPlan(n, m, n + n_b, m + m_b, float(eps), float(Delta), float(d), int(order),
                                      model.sigma_u, model.lam, model.sigma_uu, model.sigma)
                    bad = [k for k, ok in plan.invariants().items() if not ok]
                    if not bad:
                        return plan
                    best = min(best, (dist, (n, m)))
                else:
                    best = min(best, (dist, (n, m)))
        m += 1
    raise SearchExhaustedError(f"no (n-, m-) with m- <= {min(cap, m)} meets all conditions", cap=cap,
                               best_pair=best[1], best_band_distance=best[0])


# ---------------------------------------------------------------------------
# Tuning
# ---------------------------------------------------------------------------


def tuning_constants(plan: RenormPlan, Delta: float | None = None) -> tuple[mpmath.mpf, mpmath.mpf]:
    """Unfolding constants ``(s_y, q_y)`` placing the branch constants at ``-(Delta-1)`` and near ``+(Delta-1)``.

    ``Delta`` defaults to the achieved ``Delta_-`` so that the minus branch
    becomes exactly affine.  The ``q_y`` sign is the one that makes the literal
    composition produce those constants.
    """
    D = plan.delta_pm("-") if Delta is None else _mpf(Delta)
    with mpmath.workprec(PREC_BITS):
        scale = _mpf(plan.eps) * _mpf(plan.lam_abs) ** (-plan.m_plus)
        s_y = scale * (D - 1)
        q_y = -2 * (D - 1) * scale * _mpf(plan.sigma_u) ** (-plan.n_minus) / _mpf(plan.d)
    return s_y, q_y


def tune_unfolding(plan: RenormPlan, model: HeterocycleModel, Delta: float | None = None
                   ) -> tuple[RenormPlan, HeterocycleModel]:
    s_y, q_y = tuning_constants(plan, Delta)
    return replace(plan, tuned=(s_y, q_y)), unfold(model, s_y=s_y, q_y=q_y)


# ---------------------------------------------------------------------------
# Renormalized branches
# ---------------------------------------------------------------------------


def _diag(sx, sy, name: str) -> PolyMap:
    return PolyMap(Poly2({(1, 0): sx}), Poly2({(0, 1): sy}), name)


def _mp_map(pm: PolyMap) -> PolyMap:
    return pm.map_coeffs(_mpf)


@dataclass(frozen=True)
class Stage:
    name: str
    fmap: PolyMap
    domain: Box2 | None
    repeat: int = 1
    diagonal: tuple | None = None


@dataclass(frozen=True, eq=False)
class RenormalizedBranch:
    """``H^-1 T_S S^n T_Q Q^m H`` for one sign, evaluable on ``[-2, 2]^2``."""

    sign: str
    n: int
    m: int
    exact: PolyMap  # mpf coefficients
    fmap: PolyMap  # double coefficients
    stages: tuple  # innermost first
    domain: Box2 = RENORM_BOX

    @property
    def name(self) -> str:
        return f"Rg{self.sign}"

    def _check(self, z) -> None:
        if isinstance(z, Box2):
            ok = self.domain.contains(z)
        else:
            x, y = (v.value if isinstance(v, Jet) else v for v in z)
            if isinstance(x, Interval) or isinstance(y, Interval):
                ok = self.domain.contains(Box2(Interval.point(x) if not isinstance(x, Interval) else x,
                                               Interval.point(y) if not isinstance(y, Interval) else y))
            else:
                ok = self.domain.contains_point((float(x), float(y)))
        if not ok:
            raise DomainError(f"{self.name} evaluated outside B = [-2, 2]^2", branch=self.name)

    def evaluate(self, z, env=None):
        self._check(z)
        return self.fmap.evaluate(z)

    def __call__(self, x, y):
        return self.evaluate((x, y))

    def jets(self, point, order: int = 1):
        jx, jy = Jet.variables((float(point[0]), float(point[1])), order)
        return self.evaluate((jx, jy))

    def evaluate_staged(self, point) -> tuple[mpmath.mpf, mpmath.mpf]:
        """Independent route: push one point through every stage in mpmath."""
        with mpmath.workprec(PREC_BITS):
            z = (_mpf(point[0]), _mpf(point[1]))
            for st in self.stages:
                if st.diagonal is not None:
                    dx, dy = st.diagonal
                    z = (z[0] * _mpf(dx) ** st.repeat, z[1] * _mpf(dy) ** st.repeat)
                else:
                    z = (st.fmap.px.eval(z[0], z[1]), st.fmap.py.eval(z[0], z[1]))
            return z

    @property
    def y_constant(self) -> mpmath.mpf:
        return self.exact.py.coeff(0, 0)

    @property
    def y_slope(self) -> mpmath.mpf:
        return self.exact.py.coeff(0, 1)

    def affine_part(self) -> PolyMap:
        keep = {(0, 0), (1, 0), (0, 1)}
        return PolyMap(Poly2({k: v for k, v in self.fmap.px.terms.items() if k in keep}),
                       Poly2({k: v for k, v in self.fmap.py.terms.items() if k in keep}), f"affine({self.name})")

    def to_dict(self) -> dict:
        return {
            "sign": self.sign,
            "n": self.n,
            "m": self.m,
            "x": {f"{i},{j}": encode_number(c) for (i, j), c in sorted(self.exact.px.terms.items())},
            "y": {f"{i},{j}": encode_number(c) for (i, j), c in sorted(self.exact.py.terms.items())},
        }


@dataclass(frozen=True, eq=False)
class RenormalizedPair:
    plus: RenormalizedBranch
    minus: RenormalizedBranch
    plan: RenormPlan
    chain: tuple  # domain-chain report: (stage name, interval image) pairs

    def __iter__(self):
        return iter((self.plus, self.minus))

    def to_dict(self) -> dict:
        return {
            "plan": self.plan.to_dict(),
            "plus": self.plus.to_dict(),
            "minus": self.minus.to_dict(),
            "domain_chain": [{"stage": s, "image": img} for s, img in self.chain],
        }


def _stages(model: HeterocycleModel, plan: RenormPlan, n: int, m: int) -> tuple[Stage, ...]:
    with mpmath.workprec(PREC_BITS):
        hs = plan.H_scale
        return (
            Stage("H", _diag(_mpf(1), hs, "H"), RENORM_BOX),
            Stage("Q", _diag(_mpf(model.sigma), _mpf(model.lam), "Q"), model.box("V_Q"), m,
                  (model.sigma, model.lam)),
            Stage("T_Q", _mp_map(model.T_Q), model.box("V2_Q")),
            Stage("S", _diag(_mpf(model.sigma_uu), _mpf(model.sigma_u), "S"), model.box("V_S"), n,
                  (model.sigma_uu, model.sigma_u)),
            Stage("T_S", _mp_map(model.T_S), model.box("V2_S")),
            Stage("H^-1", _diag(_mpf(1), 1 / hs, "H^-1"), None),
        )


def _compose_stages(stages: Sequence[Stage]) -> PolyMap:
    with mpmath.workprec(PREC_BITS):
        acc = PolyMap(Poly2({(1, 0): _mpf(1)}), Poly2({(0, 1): _mpf(1)}), "id")
        for st in stages:
            if st.diagonal is not None:
                dx, dy = st.diagonal
                acc = PolyMap(acc.px * (_mpf(dx) ** st.repeat), acc.py * (_mpf(dy) ** st.repeat), acc.name)
            else:
                acc = st.fmap.compose(acc, acc.name)
        return acc


def _iv(v):
    return mpmath.iv.mpf(v) if not isinstance(v, mpmath.iv.mpf) else v


def _iv_poly(p: Poly2, x, y):
    total = _iv(0)
    for (i, j), c in p.terms.items():
        term = _iv(c)
        if i:
            term = term * x ** i
        if j:
            term = term * y ** j
        total = total + term
    return total


def _iv_inside(box: Box2, x, y) -> bool:
    return (mpmath.mpf(x.a) >= box.x.lo and mpmath.mpf(x.b) <= box.x.hi
            and mpmath.mpf(y.a) >= box.y.lo and mpmath.mpf(y.b) <= box.y.hi)


def _iv_str(x, y) -> list:
    return [[mpmath.nstr(mpmath.mpf(x.a), 8), mpmath.nstr(mpmath.mpf(x.b), 8)],
            [mpmath.nstr(mpmath.mpf(y.a), 8), mpmath.nstr(mpmath.mpf(y.b), 8)]]


def check_domain_chain(stages: Sequence[Stage], box: Box2 = RENORM_BOX) -> list:
    """Interval images of ``box`` through every stage, checked against each stage's domain.

    Diagonal powers move monotonically, so checking the input of the first
    and the last application covers every intermediate one.
    """
    report = []
    old = mpmath.iv.prec
    mpmath.iv.prec = PREC_BITS
    try:
        x = mpmath.iv.mpf([box.x.lo, box.x.hi])
        y = mpmath.iv.mpf([box.y.lo, box.y.hi])
        for st in stages:
            if st.domain is not None and not _iv_inside(st.domain, x, y):
                raise DomainError(f"stage {st.name} input leaves its domain", stage=st.name,
                                  image=_iv_str(x, y), domain=st.domain.to_list())
            if st.diagonal is not None:
                dx, dy = (_iv(_mpf(v)) for v in st.diagonal)
                if st.repeat > 1:
                    xl, yl = x * dx ** (st.repeat - 1), y * dy ** (st.repeat - 1)
                    if st.domain is not None and not _iv_inside(st.domain, xl, yl):
                        raise DomainError(f"stage {st.name}^{st.repeat}: last application leaves its domain",
                                          stage=st.name, image=_iv_str(xl, yl), domain=st.domain.to_list())
                x, y = x * dx ** st.repeat, y * dy ** st.repeat
            else:
                x, y = _iv_poly(st.fmap.px, x, y), _iv_poly(st.fmap.py, x, y)
            report.append((st.name if st.repeat == 1 else f"{st.name}^{st.repeat}", _iv_str(x, y)))
    finally:
        mpmath.iv.prec = old
    return report


def _to_float_map(exact: PolyMap, name: str) -> PolyMap:
    def conv(c):
        f = float(c)
        if not math.isfinite(f):
            raise DomainError(f"renormalized coefficient {mpmath.nstr(c, 5)} is outside double range")
        return f

    return PolyMap(exact.px.map_coeffs(conv), exact.py.map_coeffs(conv), name)


def renormalize(model: HeterocycleModel, plan: RenormPlan) -> RenormalizedPair:
    """Both renormalized branches, after checking the domain chain on ``[-2, 2]^2``."""
    if not model.strong:
        raise PreconditionError("renormalization needs T_Q")
    plan.validate()
    branches = {}
    chain = ()
    for sign, n, m in (("+", plan.n_plus, plan.m_plus), ("-", plan.n_minus, plan.m_minus)):
        stages = _stages(model, plan, n, m)
        rep = check_domain_chain(stages)
        if sign == "-":
            chain = tuple(rep)
        exact = _compose_stages(stages)
        branches[sign] = RenormalizedBranch(sign, n, m, exact, _to_float_map(exact, f"Rg{sign}"), stages)
    return RenormalizedPair(branches["+"], branches["-"], plan, chain)


def predicted_affine_y(plan: RenormPlan, model: HeterocycleModel, sign: str) -> tuple[mpmath.mpf, mpmath.mpf]:
    """Closed-form ``(slope, constant)`` of the y-part for identity-linear affine transitions."""
    n = plan.n_plus if sign == "+" else plan.n_minus
    with mpmath.workprec(PREC_BITS):
        dpm = plan.delta_pm(sign)
        const = (1 / plan.H_scale) * (_mpf(model.s_y) + _mpf(model.sigma_u) ** n * _mpf(model.d) * _mpf(model.q_y))
    return dpm, const


# ---------------------------------------------------------------------------
# Distance to affine targets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineTarget:
    """``(x, y) -> (x0, Delta y + s (Delta - 1))`` with ``s = +1`` or ``-1``.

    ``Delta y - (Delta - 1) = Delta (y - 1) + 1`` fixes ``y = 1``; the ``+``
    target fixes ``y = -1``.
    """

    x0: float
    Delta: float
    shift_sign: str

    def __post_init__(self):
        if self.shift_sign not in "+-" or len(self.shift_sign) != 1:
            raise ValueError("shift_sign must be '+' or '-'")

    @property
    def shift(self) -> float:
        return (self.Delta - 1) if self.shift_sign == "+" else -(self.Delta - 1)

    def to_polymap(self) -> PolyMap:
        return PolyMap(Poly2({(0, 0): float(self.x0)}), Poly2({(0, 0): self.shift, (0, 1): float(self.Delta)}),
                       f"A{self.shift_sign}")

    def evaluate(self, z, env=None):
        return self.to_polymap().evaluate(z)

    def inverse_y(self, y: float) -> float:
        return (y - self.shift) / self.Delta

    def to_dict(self) -> dict:
        return {"x0": self.x0, "Delta": self.Delta, "shift_sign": self.shift_sign}


def targets_for(plan: RenormPlan, model: HeterocycleModel) -> dict[str, AffineTarget]:
    D = plan.delta_minus
    x0 = float(model.s_x)
    return {"+": AffineTarget(x0, D, "+"), "-": AffineTarget(x0, D, "-")}


@dataclass(frozen=True)
class CrDistanceReport:
    order: int
    grid: int
    per_order: tuple  # sup over grid and components of |d^alpha (Rg - target)|, |alpha| = k
    overall: float
    box: Box2 = RENORM_BOX

    def to_dict(self) -> dict:
        return {"order": self.order, "grid": self.grid, "per_order": list(self.per_order), "overall": self.overall,
                "box": self.box.to_list()}


def cr_distance(branch, target, r: int = 2, grid: int = DEFAULT_GRID, box: Box2 = RENORM_BOX) -> CrDistanceReport:
    """Per-derivative-order sup norms of ``branch - target`` on a ``grid x grid`` lattice of ``box``."""
    fmap = branch.fmap if hasattr(branch, "fmap") else branch
    tmap = target.to_polymap() if isinstance(target, AffineTarget) else (target.fmap if hasattr(target, "fmap") else target)
    diff = (fmap.px - tmap.px, fmap.py - tmap.py)
    xs = np.linspace(box.x.lo, box.x.hi, grid)
    ys = np.linspace(box.y.lo, box.y.hi, grid)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    per = []
    for k in range(r + 1):
        worst = 0.0
        for i in range(k, -1, -1):
            j = k - i
            for comp in diff:
                p = comp
                for _ in range(i):
                    p = p.partial(0)
                for _ in range(j):
                    p = p.partial(1)
                p = p.map_coeffs(float)
                vals = p.eval(X, Y) if p.terms else np.zeros_like(X)
                vals = np.broadcast_to(np.asarray(vals, dtype=float), X.shape)
                worst = max(worst, float(np.max(np.abs(vals))))
        per.append(worst)
    return CrDistanceReport(r, grid, tuple(per), max(per), box)


# ---------------------------------------------------------------------------
# Sign fix for a negative transition derivative
# ---------------------------------------------------------------------------


def flip_transition_sign(model: HeterocycleModel, n: int, m: int) -> HeterocycleModel:
    """Replace ``T_S`` by ``T_S S^n T_Q Q^m T_S`` and recheck the sign of ``d_y Y^S(0)``.

    For identity-like transitions the new derivative is ``d^2 sigma_u^n lam^m``,
    positive whenever ``lam^m > 0``.  The constant term is restored to the old
    ``S'`` by translation afterwards.
    """
    if not model.strong:
        raise PreconditionError("the sign fix needs T_Q")
    Q = _diag(model.sigma ** m, model.lam ** m, "Q^m")
    S = _diag(model.sigma_uu ** n, model.sigma_u ** n, "S^n")
    new = model.T_S.compose(S.compose(model.T_Q.compose(Q.compose(model.T_S))), "T_S")
    new = new.with_constant(model.s_x, model.s_y)
    out = replace(model, T_S=new)
    if not out.d > 0:
        raise InfeasibleError("substituted transition still has d_y Y^S(0) <= 0", d=out.d)
    return out.validate()


# ---------------------------------------------------------------------------
# Parameter families
# ---------------------------------------------------------------------------


def log_delta_jet(family: ModelFamily, n: int, m: int) -> Jet:
    """Jet of ``log |Delta(a)| = m log|lam(a)| + log|d(a)| + n log sigma_u(a)``."""
    lam = family.lam if float(family.lam.value) > 0 else -family.lam
    d = family.d if float(family.d.value) > 0 else -family.d
    return lam.log() * m + d.log() + family.sigma_u.log() * n


@dataclass(frozen=True, eq=False)
class AlphaFamily:
    family: ModelFamily  # every field now a jet in alpha
    alpha: Jet  # alpha(a)
    inverse: Jet  # a(alpha)
    da_dalpha: float
    delta_minus0: float
    n_minus: int
    ratio_derivative: float  # d/da (log sigma_u / log |lam|) at a = 0

    def to_dict(self) -> dict:
        return {
            "alpha": [float(c) for c in self.alpha.coeffs],
            "inverse": [float(c) for c in self.inverse.coeffs],
            "da_dalpha": self.da_dalpha,
            "n_minus_times_da_dalpha": self.n_minus * self.da_dalpha,
            "delta_minus0": self.delta_minus0,
            "ratio_derivative": self.ratio_derivative,
        }


def reparametrize_alpha(family: ModelFamily, plan: RenormPlan, tol: float = 1e-12) -> AlphaFamily:
    """Recompose the family through ``a(alpha)`` where ``alpha(a) = Delta_-(a) - Delta_-(0)``."""
    L = log_delta_jet(family, plan.n_minus, plan.m_minus)
    # Delta_-(a) = Delta_-(0) exp(L(a) - L(0)); the constant is taken at full precision
    d0 = float(plan.delta_pm("-"))
    growth = L.without_constant().exp()
    alpha = (growth - 1.0) * d0
    alpha = alpha.with_constant(0.0)
    slope = alpha.coeffs[1] if alpha.order >= 1 else 0.0
    lam_abs = family.lam if float(family.lam.value) > 0 else -family.lam
    ratio = family.sigma_u.log() / lam_abs.log()
    ratio_der = float(ratio.coeffs[1]) if ratio.order >= 1 else 0.0
    if family.order < 1 or abs(slope) <= tol * max(1.0, abs(d0)):
        raise DegenerateError("d alpha / da = 0 at a = 0: reparametrization is not a local diffeomorphism",
                              slope=float(slope) if family.order >= 1 else 0.0, ratio_derivative=ratio_der)
    inv = invert_series(alpha)
    fields = {}
    for k in ("sigma", "lam", "sigma_u", "sigma_uu", "d", "s_y", "q_y"):
        fields[k] = substitute(getattr(family, k), [inv])
    fam = replace(family, parameter="alpha", **fields)
    return AlphaFamily(fam, alpha, inv, float(inv.coeffs[1]), d0, plan.n_minus, ratio_der)


def para_tune(family: ModelFamily, plan: RenormPlan, tol: float = 1e-15, Delta: float | None = None) -> ModelFamily:
    """Give ``s_y`` the jet of ``alpha -> eps |lam(alpha)|^-m+ (Delta - 1)`` and ``q_y`` its tuned constant."""
    bad = [(k, float(c)) for k, c in enumerate(family.s_y.coeffs) if abs(float(c)) > tol]
    if bad:
        raise PreconditionError("incoming s_y jet does not vanish", offending=[{"order": k, "coeff": c} for k, c in bad])
    D = plan.delta_pm("-") if Delta is None else _mpf(Delta)
    lam0 = float(family.lam.value)
    with mpmath.workprec(PREC_BITS):
        scale = _mpf(plan.eps) * _mpf(abs(lam0)) ** (-plan.m_plus) * (D - 1)
    rel = (family.lam * (1.0 / lam0)).power(-float(plan.m_plus))  # (lam(alpha)/lam0)^-m+
    coeffs = np.empty(family.order + 1, dtype=object)
    with mpmath.workprec(PREC_BITS):
        for k, c in enumerate(rel.coeffs):
            coeffs[k] = scale * _mpf(float(c))
    s_jet = Jet(coeffs, 1, family.order)
    _, q_y = tuning_constants(plan, Delta)
    qc = np.empty(family.order + 1, dtype=object)
    qc[:] = _mpf(0)
    qc[0] = q_y
    return replace(family, s_y=s_jet, q_y=Jet(qc, 1, family.order))


__all__ = [
    "AffineTarget",
    "AlphaFamily",
    "CrDistanceReport",
    "RenormPlan",
    "RenormalizedBranch",
    "RenormalizedPair",
    "check_domain_chain",
    "check_irrational_ratio",
    "convergents",
    "cr_distance",
    "flip_transition_sign",
    "para_tune",
    "predicted_affine_y",
    "renormalize",
    "reparametrize_alpha",
    "required_min_exponent",
    "select_base_pair",
    "select_exponents",
    "targets_for",
    "tune_unfolding",
    "tuning_constants",
]
