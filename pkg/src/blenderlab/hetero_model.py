"""Chart-glued model dynamics around a heterocycle.

Charts:

* source chart around ``S`` with inverse branch ``S(x, y) = (sigma_uu x, sigma_u y)``;
  ``x`` is the strong unstable direction and ``W^uu_loc(S) = {y = 0}``;
* saddle chart around ``P = Q`` with inverse branch ``Q(x, y) = (sigma x, lam y)``;
  ``W^u_loc = {y = 0}`` and ``W^s_loc = {x = 0}``.

Transitions are polynomial maps: ``T_S`` (source chart -> saddle chart, sends
``S`` to ``S' = (s_x, s_y)``), optional ``T_Q`` (saddle chart -> source chart,
sends ``Q`` to ``Q' = (q_x, q_y)``; present iff the heterocycle is strong) and
optional ``T_H`` (saddle chart near ``H = (0, h)`` -> source chart).  ``T_H`` is
stored in coordinates centred at ``H``: ``T_H(x, y) = P_H(x, y - h)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

from blenderlab.dynamics.orbits import find_periodic_orbit
from blenderlab.dynamics.poly import Poly2, PolyMap, format_monomial, parse_monomial
from blenderlab.dynamics.words import Branch, BranchWord
from blenderlab.errors import ConfigError, ConstructionError, NotFoundError, PreconditionError
from blenderlab.io import decode_number, encode_number
from blenderlab.numerics.interval import Box2, Interval
from blenderlab.numerics.jet import Jet

MAX_TRANSITION_DEGREE = 6
SMALL_DENOMINATOR = 64
FLAG_TOL = 1e-12
HORSESHOE_THRESHOLD = 10.0

BOX_NAMES = ("V_S", "V1_S", "V2_S", "V_Q", "V1_Q", "V2_Q", "V_H")


def small_rational(value: float, max_den: int = SMALL_DENOMINATOR, tol: float = 1e-9) -> Fraction | None:
    """The fraction ``p/q`` with ``q <= max_den`` within ``tol`` of ``value``, if any."""
    frac = Fraction(value).limit_denominator(max_den)
    return frac if abs(float(frac) - value) < tol else None


def log_ratio(sigma_u: float, lam_abs: float) -> float:
    return math.log(sigma_u) / math.log(lam_abs)


@dataclass(frozen=True)
class TransversalityFlags:
    t1: bool | None  # T_H image of W^s(P) transverse to W^uu_loc(S); None without T_H
    t2: bool  # T_S pulls W^u(P) back transverse to E^cu, i.e. d_y Y^S(0) != 0
    t3: bool  # same for E^uu, i.e. d_x Y^S(0) != 0
    h_positive: bool | None  # which of the two geometric cases the sign of h selects

    @property
    def all_true(self) -> bool:
        return bool(self.t2 and self.t3 and self.t1 is not False)

    def to_dict(self) -> dict:
        return {"T1": self.t1, "T2": self.t2, "T3": self.t3, "h_positive": self.h_positive}


@dataclass(frozen=True, eq=False)
class HeterocycleModel:
    sigma: float
    lam: float
    sigma_uu: float
    sigma_u: float
    T_S: PolyMap
    T_Q: PolyMap | None = None
    T_H: PolyMap | None = None  # centred at H
    h: float = 0.0
    box_overrides: Mapping[str, Box2] = field(default_factory=dict)

    # ---- constants --------------------------------------------------------
    @property
    def s_x(self):
        return self.T_S.px.coeff(0, 0)

    @property
    def s_y(self):
        return self.T_S.py.coeff(0, 0)

    @property
    def q_x(self):
        return self.T_Q.px.coeff(0, 0) if self.T_Q is not None else None

    @property
    def q_y(self):
        return self.T_Q.py.coeff(0, 0) if self.T_Q is not None else None

    @property
    def strong(self) -> bool:
        return self.T_Q is not None

    @property
    def d(self) -> float:
        """``d_y Y^S(0)``."""
        return float(self.T_S.py.coeff(0, 1))

    @property
    def lam_abs(self) -> float:
        return abs(self.lam)

    @property
    def kappa(self) -> float:
        return max(self.sigma_u, self.sigma_uu, self.sigma_uu / self.sigma_u, 1.0 / self.lam_abs, self.sigma)

    # ---- boxes --------------------------------------------------------
    def box(self, name: str) -> Box2:
        if name in self.box_overrides:
            return self.box_overrides[name]
        la = self.lam_abs
        if name == "V_S":
            return Box2.from_bounds(-2.0, 2.0, -2.0, 2.0)
        if name == "V1_S":
            return Box2.from_bounds(-2 * self.sigma_uu, 2 * self.sigma_uu, -2 * self.sigma_u, 2 * self.sigma_u)
        if name == "V2_S":
            return self.box("V1_S")
        if name == "V_Q":
            return Box2.from_bounds(-2.0, 2.0, -2.0 / la, 2.0 / la)
        if name == "V1_Q":
            return Box2.from_bounds(-2 * self.sigma, 2 * self.sigma, -2.0, 2.0)
        if name == "V2_Q":
            return self.box("V1_Q")
        if name == "V_H":
            r = self.h_radius
            return Box2.from_bounds(-r, r, float(self.h) - r, float(self.h) + r)
        raise KeyError(name)

    @property
    def h_radius(self) -> float:
        """Half-width of the default ``V_H``: inside ``[-sigma, sigma] x [-1, 1]``."""
        return min(self.sigma, max(1.0 - abs(float(self.h)), 1e-3))

    def boxes(self) -> dict[str, Box2]:
        return {name: self.box(name) for name in BOX_NAMES}

    # ---- branches -----------------------------------------------------
    def T_H_global(self) -> PolyMap:
        """``T_H`` in saddle-chart coordinates."""
        if self.T_H is None:
            raise PreconditionError("model has no T_H transition")
        shift = PolyMap(Poly2.x(), Poly2.y() - self.h, "shift")
        return self.T_H.compose(shift, "T_H")

    def branches(self) -> dict[str, Branch]:
        out = {
            "S": Branch("S", PolyMap(Poly2({(1, 0): self.sigma_uu}), Poly2({(0, 1): self.sigma_u}), "S"),
                        self.box("V_S"), (self.sigma_uu, self.sigma_u)),
            "Q": Branch("Q", PolyMap(Poly2({(1, 0): self.sigma}), Poly2({(0, 1): self.lam}), "Q"),
                        self.box("V_Q"), (self.sigma, self.lam)),
            "T_S": Branch("T_S", self.T_S, self.box("V2_S")),
        }
        out["P"] = Branch("P", out["Q"].fmap, out["Q"].domain, out["Q"].diagonal)
        if self.T_Q is not None:
            out["T_Q"] = Branch("T_Q", self.T_Q, self.box("V2_Q"))
        if self.T_H is not None:
            out["T_H"] = Branch("T_H", self.T_H_global(), self.box("V_H"))
        return out

    def word(self, text: str, extra: Mapping[str, Branch] | None = None) -> BranchWord:
        branches = self.branches()
        if extra:
            branches.update(extra)
        return BranchWord.parse(text, branches, text)

    # ---- checks -------------------------------------------------------
    def flags(self) -> TransversalityFlags:
        t1 = None
        if self.T_H is not None:
            t1 = abs(float(self.T_H.py.coeff(0, 1))) > FLAG_TOL
        t2 = abs(float(self.T_S.py.coeff(0, 1))) > FLAG_TOL
        t3 = abs(float(self.T_S.py.coeff(1, 0))) > FLAG_TOL
        hp = None if self.T_H is None else float(self.h) > 0
        return TransversalityFlags(t1, t2, t3, hp)

    def validate(self) -> "HeterocycleModel":
        if not 0 < self.sigma < 1:
            raise ConfigError("saddle contraction sigma must lie in (0, 1)", sigma=self.sigma)
        if not self.lam_abs > 1:
            raise ConfigError("saddle eigenvalue must satisfy |lambda| > 1", lam=self.lam)
        if not 0 < self.sigma_uu < self.sigma_u < 1:
            raise ConfigError("source contractions must satisfy 0 < sigma_uu < sigma_u < 1",
                              sigma_uu=self.sigma_uu, sigma_u=self.sigma_u)
        for name, t in (("T_S", self.T_S), ("T_Q", self.T_Q), ("T_H", self.T_H)):
            if t is not None and t.degree > MAX_TRANSITION_DEGREE:
                raise ConfigError(f"{name} has degree {t.degree} > {MAX_TRANSITION_DEGREE}")
        if self.T_Q is not None:
            dq = float(self.T_Q.py.coeff(0, 1))
            if abs(dq - 1.0) > FLAG_TOL:
                raise ConfigError(f"normalization d_y Y^Q(0) = 1 violated: got {dq}", d_y_YQ=dq)
        ratio = log_ratio(self.sigma_u, self.lam_abs)
        frac = small_rational(ratio)
        if frac is not None:
            raise ConfigError(f"log sigma_u / log |lambda| = {ratio} is close to {frac}",
                              ratio=ratio, fraction=str(frac))
        return self

    def jet_equal(self, other: "HeterocycleModel", tol: float = 0.0) -> bool:
        def eq(a, b):
            if a is None or b is None:
                return a is None and b is None
            return a.equals(b, tol)

        return (
            (self.sigma, self.lam, self.sigma_uu, self.sigma_u) == (other.sigma, other.lam, other.sigma_uu, other.sigma_u)
            and eq(self.T_S, other.T_S) and eq(self.T_Q, other.T_Q) and eq(self.T_H, other.T_H)
            and float(self.h) == float(other.h)
        )

    # ---- serialization --------------------------------------------------
    def to_config(self) -> dict:
        transitions = {"T_S": _tables(self.T_S, drop_constant=True)}
        if self.T_Q is not None:
            transitions["T_Q"] = _tables(self.T_Q, drop_constant=True)
        if self.T_H is not None:
            transitions["T_H"] = _tables(self.T_H, drop_constant=False)
        constants = {"s_x": encode_number(self.s_x), "s_y": encode_number(self.s_y), "h": encode_number(self.h)}
        if self.T_Q is not None:
            constants["q_x"] = encode_number(self.q_x)
            constants["q_y"] = encode_number(self.q_y)
        doc = {
            "eigenvalues": {"sigma": self.sigma, "lambda": self.lam, "sigma_u": self.sigma_u,
                            "sigma_uu": self.sigma_uu},
            "transitions": transitions,
            "constants": constants,
        }
        if self.box_overrides:
            doc["boxes"] = {k: v.to_list() for k, v in sorted(self.box_overrides.items())}
        return doc


def _tables(pm: PolyMap, drop_constant: bool) -> dict:
    def table(p: Poly2) -> dict:
        items = sorted(p.terms.items(), key=lambda kv: (sum(kv[0]), -kv[0][0]))
        return {format_monomial(m): encode_number(c) for m, c in items if not (drop_constant and m == (0, 0))}

    return {"x": table(pm.px), "y": table(pm.py)}


def _poly_from_table(table: Mapping[str, Any], name: str, allow_constant: bool) -> Poly2:
    terms: dict = {}
    for key, value in table.items():
        m = parse_monomial(key)
        if m == (0, 0) and not allow_constant:
            raise ConfigError(f"{name}: constant terms belong in 'constants', not the coefficient table")
        terms[m] = decode_number(value)
    return Poly2(terms)


def build_model(config: Mapping[str, Any]) -> HeterocycleModel:
    """Validated model from a configuration document (see module docstring)."""
    try:
        eig = config["eigenvalues"]
        sigma, lam = float(eig["sigma"]), float(eig["lambda"])
        sigma_u, sigma_uu = float(eig["sigma_u"]), float(eig["sigma_uu"])
        trans = config["transitions"]
        ts = trans["T_S"]
    except KeyError as exc:
        raise ConfigError(f"missing configuration field {exc}") from None
    const = dict(config.get("constants", {}))
    T_S = PolyMap(
        _poly_from_table(ts.get("x", {}), "T_S.x", False) + decode_number(const.get("s_x", 0.0)),
        _poly_from_table(ts.get("y", {}), "T_S.y", False) + decode_number(const.get("s_y", 0.0)),
        "T_S",
    )
    T_Q = None
    if trans.get("T_Q") is not None:
        tq = trans["T_Q"]
        T_Q = PolyMap(
            _poly_from_table(tq.get("x", {}), "T_Q.x", False) + decode_number(const.get("q_x", 0.0)),
            _poly_from_table(tq.get("y", {}), "T_Q.y", False) + decode_number(const.get("q_y", 0.0)),
            "T_Q",
        )
    elif "q_x" in const or "q_y" in const:
        raise ConfigError("constants q_x/q_y given without a T_Q transition")
    T_H = None
    if trans.get("T_H") is not None:
        th = trans["T_H"]
        T_H = PolyMap(_poly_from_table(th.get("x", {}), "T_H.x", True),
                      _poly_from_table(th.get("y", {}), "T_H.y", True), "T_H")
    boxes = {}
    for name, data in (config.get("boxes") or {}).items():
        if name not in BOX_NAMES:
            raise ConfigError(f"unknown box {name!r}; expected one of {BOX_NAMES}")
        boxes[name] = Box2.from_list(data)
    model = HeterocycleModel(sigma, lam, sigma_uu, sigma_u, T_S, T_Q, T_H, decode_number(const.get("h", 0.0)), boxes)
    return model.validate()


def affine_model(sigma=0.25, lam=3.0, sigma_uu=0.2, sigma_u=0.5, s_x=0.5, s_y=0.0, q_x=0.0, q_y=0.0,
                 h=0.5, t_h=0.5, strong=True, with_h=True) -> HeterocycleModel:
    """Fully affine model with identity linear parts in every transition."""
    cfg: dict = {
        "eigenvalues": {"sigma": sigma, "lambda": lam, "sigma_u": sigma_u, "sigma_uu": sigma_uu},
        "transitions": {"T_S": {"x": {"x": 1.0}, "y": {"y": 1.0}}},
        "constants": {"s_x": s_x, "s_y": s_y, "h": h},
    }
    if strong:
        cfg["transitions"]["T_Q"] = {"x": {"x": 1.0}, "y": {"y": 1.0}}
        cfg["constants"].update(q_x=q_x, q_y=q_y)
    if with_h:
        cfg["transitions"]["T_H"] = {"x": {"1": t_h, "x": 1.0}, "y": {"y": 1.0}}
    return build_model(cfg)


def unfold(model: HeterocycleModel, s_y=None, q_y=None) -> HeterocycleModel:
    """Replace the second-coordinate constants of ``T_S`` and ``T_Q``; nothing else changes."""
    T_S = model.T_S if s_y is None else model.T_S.with_constant(cy=s_y)
    T_Q = model.T_Q
    if q_y is not None:
        if T_Q is None:
            if q_y != 0:
                raise ConfigError("cannot set q_y on a model without T_Q")
        else:
            T_Q = T_Q.with_constant(cy=q_y)
    return replace(model, T_S=T_S, T_Q=T_Q)


# ---------------------------------------------------------------------------
# Expanding Cantor set
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CantorPair:
    word1: BranchWord
    word2: BranchWord
    domain: Box2
    image1: Box2
    image2: Box2
    margin: float  # Chebyshev gap between the two images
    inner_margin1: float  # distance of image1 to the boundary of W
    inner_margin2: float
    n: int
    N: int

    def to_dict(self) -> dict:
        return {
            "word1": str(self.word1),
            "word2": str(self.word2),
            "n": self.n,
            "N": self.N,
            "domain": self.domain.to_list(),
            "image1": self.image1.to_list(),
            "image2": self.image2.to_list(),
            "margin": self.margin,
            "inner_margin1": self.inner_margin1,
            "inner_margin2": self.inner_margin2,
        }


def _inner_margin(outer: Box2, inner: Box2) -> float:
    return min(inner.x.lo - outer.x.lo, outer.x.hi - inner.x.hi, inner.y.lo - outer.y.lo, outer.y.hi - inner.y.hi)


def build_cantor_pair(model: HeterocycleModel, n: int, N: int, radius: float | None = None) -> CantorPair:
    """Contractions ``S1 = S^N T_H P^n T~_S`` and ``S2 = S^N`` on a square ``W`` around ``S``.

    ``T~_S`` is ``T_S`` with its second constant moved to ``lam^-n h`` so that
    ``P^n`` lands on ``H``.  Raises :class:`ConstructionError` when an image
    leaves ``W``, the images overlap, or ``P^n T~_S (W)`` misses ``V_H``.
    """
    if model.T_H is None:
        raise PreconditionError("the Cantor pair needs a T_H transition")
    if n < 1:
        raise PreconditionError("n must be >= 1", n=n)
    W_radius = radius if radius is not None else 0.5 * model.h_radius * model.lam_abs ** (-n)
    W = Box2.from_bounds(-W_radius, W_radius, -W_radius, W_radius)
    if N < 1:
        raise ConstructionError("S2 = S^0 is the identity: its image equals W, not strictly inside",
                                domain=W.to_list(), N=N)
    shifted = model.T_S.with_constant(cy=model.lam ** (-n) * float(model.h))
    tilde = Branch("Tt_S", PolyMap(shifted.px, shifted.py, "Tt_S"), model.box("V1_S"))
    branches = model.branches()
    branches["Tt_S"] = tilde
    stage = BranchWord(((("P", n)), ("Tt_S", 1)), branches, "P^n Tt_S")
    landing = stage.evaluate(W)
    if not model.box("V_H").contains(landing):
        raise ConstructionError("P^n T~_S (W) is not inside V_H; increase n", image=landing.to_list(),
                                V_H=model.box("V_H").to_list())
    word1 = BranchWord((("S", N), ("T_H", 1), ("P", n), ("Tt_S", 1)), branches, "S1")
    word2 = BranchWord((("S", N),), branches, "S2")
    img1 = word1.evaluate(W)
    img2 = word2.evaluate(W)
    m1, m2 = _inner_margin(W, img1), _inner_margin(W, img2)
    if m1 <= 0 or m2 <= 0:
        raise ConstructionError("an image is not strictly inside W", image1=img1.to_list(),
                                image2=img2.to_list(), domain=W.to_list(), inner_margins=[m1, m2])
    gap = img1.separation(img2)
    if gap <= 0:
        raise ConstructionError("the two images overlap", image1=img1.to_list(), image2=img2.to_list())
    return CantorPair(word1, word2, W, img1, img2, gap, m1, m2, n, N)


# ---------------------------------------------------------------------------
# Horseshoe
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HorseshoeReport:
    box: Box2
    image: Box2
    stable_boundary_margin: float  # gap between G2(B) and the vertical sides of B
    unstable_boundary_margin: float  # gap between B and G2 of the horizontal sides
    threshold_value: float
    saddle: Any
    vertical_multiplier: float
    jet_vertical_derivative: float
    predicted_vertical: float
    n: int
    N: int
    eps: float
    bottom_image: Box2 = None
    top_image: Box2 = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "eps": self.eps,
            "threshold_value": self.threshold_value,
            "box": self.box.to_list(),
            "image": self.image.to_list(),
            "box_corners": [list(c) for c in self.box.corners()],
            "image_corners": [list(c) for c in self.image.corners()],
            "stable_boundary_margin": self.stable_boundary_margin,
            "unstable_boundary_margin": self.unstable_boundary_margin,
            "saddle": self.saddle.to_dict(),
            "vertical_multiplier": self.vertical_multiplier,
            "jet_vertical_derivative": self.jet_vertical_derivative,
            "predicted_vertical": self.predicted_vertical,
        }


def horseshoe_word(model: HeterocycleModel, n: int, N: int) -> BranchWord:
    return BranchWord((("T_S", 1), ("S", n), ("T_H", 1), ("P", N)), model.branches(), "G2")


def build_horseshoe(model: HeterocycleModel, n: int, N: int, eps: float,
                    threshold: float = HORSESHOE_THRESHOLD) -> HorseshoeReport:
    """Markov crossing of ``B`` by ``G2 = T_S S^n T_H P^N`` and its saddle fixed point."""
    if model.T_H is None:
        raise PreconditionError("the horseshoe needs a T_H transition")
    value = eps * model.sigma_u ** n * model.lam_abs ** N
    if not eps > 0:
        raise PreconditionError(f"eps must be positive (box B is empty); eps*sigma_u^n*|lam|^N = {value}",
                                value=value)
    if value < threshold:
        raise PreconditionError(f"eps*sigma_u^n*|lam|^N = {value:.6g} < {threshold}", value=value,
                                threshold=threshold)
    h = float(model.h)
    lamN = model.lam ** N
    ends = sorted(((h - eps) / lamN, (h + eps) / lamN))
    B = Box2.from_bounds(-1.0, 1.0, ends[0], ends[1])
    G2 = horseshoe_word(model, n, N)
    img = G2.evaluate(B)
    bottom = G2.evaluate(Box2(B.x, Interval.point(B.y.lo)))
    top = G2.evaluate(Box2(B.x, Interval.point(B.y.hi)))
    s_margin = min(img.x.lo + 1.0, 1.0 - img.x.hi)
    if s_margin <= 0:
        raise ConstructionError("G2(B) meets the vertical boundary of B", image=img.to_list(), box=B.to_list())
    if not img.intersects(B):
        raise ConstructionError("G2(B) misses B", image=img.to_list(), box=B.to_list())
    below = [e for e in (bottom, top) if e.y.hi < B.y.lo]
    above = [e for e in (bottom, top) if e.y.lo > B.y.hi]
    if len(below) != 1 or len(above) != 1:
        raise ConstructionError("B meets the image of its horizontal boundary", bottom=bottom.to_list(),
                                top=top.to_list(), box=B.to_list())
    u_margin = min(B.y.lo - below[0].y.hi, above[0].y.lo - B.y.hi)
    seed = (img.x.mid, B.y.mid)
    try:
        saddle = find_periodic_orbit(G2, 1, seed)
    except NotFoundError as exc:
        raise ConstructionError(f"Newton failed to locate the saddle: {exc}") from exc
    jy = G2.jets(saddle.points[0], 1)
    jet_dy = float(jy[1].coeff((0, 1)))
    mult = max(saddle.multipliers, key=abs).real
    th = model.T_H_global()
    predicted = (model.sigma_u ** n * lamN * float(model.T_S.py.coeff(0, 1)) * float(th.py.coeff(0, 1)))
    return HorseshoeReport(B, img, s_margin, u_margin, value, saddle, mult, jet_dy, predicted, n, N, eps,
                           bottom, top)


# ---------------------------------------------------------------------------
# Parameter families
# ---------------------------------------------------------------------------


def _const_jet(v: float, order: int) -> Jet:
    return Jet.constant(float(v), 1, order)


@dataclass(frozen=True, eq=False)
class ModelFamily:
    """A model whose eigenvalues and unfolding data depend on a parameter.

    Every field is a one-variable jet in the parameter at the base value.
    ``d`` is ``d_y Y^S_a(0)``; ``s_y`` and ``q_y`` are the unfolding constants.
    """

    base: HeterocycleModel
    order: int
    sigma: Jet
    lam: Jet
    sigma_u: Jet
    sigma_uu: Jet
    d: Jet
    s_y: Jet
    q_y: Jet
    parameter: str = "a"

    @classmethod
    def constant(cls, model: HeterocycleModel, order: int, **jets) -> "ModelFamily":
        fields = {
            "sigma": _const_jet(model.sigma, order),
            "lam": _const_jet(model.lam, order),
            "sigma_u": _const_jet(model.sigma_u, order),
            "sigma_uu": _const_jet(model.sigma_uu, order),
            "d": _const_jet(model.d, order),
            "s_y": _const_jet(model.s_y, order),
            "q_y": _const_jet(model.q_y or 0.0, order),
        }
        for key, val in jets.items():
            if key not in fields:
                raise ConfigError(f"unknown family field {key!r}")
            fields[key] = val if isinstance(val, Jet) else Jet(np.asarray(val, dtype=float), 1, order)
            if fields[key].order != order:
                raise ConfigError(f"jet {key} has order {fields[key].order}, expected {order}")
        fam = cls(model, order, **fields)
        fam.check_base()
        return fam

    def check_base(self) -> None:
        b = self.base_model()
        m = self.base
        checks = {
            "sigma": (b.sigma, m.sigma), "lam": (b.lam, m.lam), "sigma_u": (b.sigma_u, m.sigma_u),
            "sigma_uu": (b.sigma_uu, m.sigma_uu), "d": (b.d, m.d),
        }
        for key, (x, y) in checks.items():
            if abs(x - y) > 1e-15 * max(1.0, abs(y)):
                raise ConfigError(f"family base value of {key} ({x}) differs from the base model ({y})")

    def base_model(self) -> HeterocycleModel:
        m = self.base
        T_S = m.T_S.with_constant(cy=self.s_y.value)
        T_S = PolyMap(T_S.px, Poly2({**T_S.py.terms, (0, 1): float(self.d.value)}), "T_S")
        T_Q = m.T_Q.with_constant(cy=self.q_y.value) if m.T_Q is not None else None
        out = replace(m, sigma=float(self.sigma.value), lam=float(self.lam.value),
                      sigma_u=float(self.sigma_u.value), sigma_uu=float(self.sigma_uu.value), T_S=T_S, T_Q=T_Q)
        return out.validate()

    def with_jets(self, **jets) -> "ModelFamily":
        return replace(self, **jets)

    def to_dict(self) -> dict:
        return {
            "base": self.base.to_config(),
            "order": self.order,
            "parameter": self.parameter,
            **{k: [encode_number(c) for c in getattr(self, k).coeffs]
               for k in ("sigma", "lam", "sigma_u", "sigma_uu", "d", "s_y", "q_y")},
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ModelFamily":
        order = int(doc["order"])
        base = build_model(doc["base"])
        jets = {}
        for k in ("sigma", "lam", "sigma_u", "sigma_uu", "d", "s_y", "q_y"):
            coeffs = [decode_number(c) for c in doc[k]]
            dtype = object if any(not isinstance(c, float) for c in coeffs) else float
            jets[k] = Jet(np.array(coeffs, dtype=dtype), 1, order)
        return cls(base, order, parameter=doc.get("parameter", "a"), **jets)


__all__ = [
    "BOX_NAMES",
    "CantorPair",
    "HeterocycleModel",
    "HorseshoeReport",
    "ModelFamily",
    "TransversalityFlags",
    "affine_model",
    "build_cantor_pair",
    "build_horseshoe",
    "build_model",
    "horseshoe_word",
    "log_ratio",
    "small_rational",
    "unfold",
]
