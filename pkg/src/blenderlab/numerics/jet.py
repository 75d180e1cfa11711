"""Dense truncated multivariate Taylor jets.

A jet in ``num_vars`` variables of order ``r`` stores the Taylor coefficients
``c_alpha = d^alpha f(base) / alpha!`` for every multi-index with
``|alpha| <= r``.  Coefficients are laid out degree by degree; inside a degree
the multi-indices are in descending lexicographic order, so for two variables
the layout is ``1, x, y, x^2, xy, y^2, x^3, ...``.

Coefficients are float64 by default.  Object arrays are also accepted so that
the same code path serves interval-valued and mpmath-valued jets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from blenderlab.errors import DomainError, ShapeError

MAX_VARS = 3


def multi_indices(num_vars: int, order: int) -> list[tuple[int, ...]]:
    """Graded, descending-lexicographic multi-indices of total degree <= order."""
    out: list[tuple[int, ...]] = []
    for deg in range(order + 1):
        out.extend(_of_degree(num_vars, deg))
    return out


def _of_degree(num_vars: int, deg: int) -> list[tuple[int, ...]]:
    if num_vars == 1:
        return [(deg,)]
    out = []
    for first in range(deg, -1, -1):
        for rest in _of_degree(num_vars - 1, deg - first):
            out.append((first,) + rest)
    return out


def coefficient_count(num_vars: int, order: int) -> int:
    return math.comb(num_vars + order, num_vars)


@dataclass(frozen=True)
class _Layout:
    indices: tuple
    position: dict
    degrees: np.ndarray
    factorials: np.ndarray
    mul_a: np.ndarray
    mul_b: np.ndarray
    mul_out: np.ndarray
    groups: tuple


@lru_cache(maxsize=None)
def _layout(num_vars: int, order: int) -> _Layout:
    idx = multi_indices(num_vars, order)
    pos = {m: k for k, m in enumerate(idx)}
    degrees = np.array([sum(m) for m in idx], dtype=int)
    facts = np.array([math.prod(math.factorial(e) for e in m) for m in idx], dtype=float)
    ia, ib, ic = [], [], []
    groups: list[list[tuple[int, int]]] = [[] for _ in idx]
    for i, ma in enumerate(idx):
        da = degrees[i]
        for j, mb in enumerate(idx):
            if da + degrees[j] > order:
                continue
            k = pos[tuple(p + q for p, q in zip(ma, mb))]
            ia.append(i)
            ib.append(j)
            ic.append(k)
            groups[k].append((i, j))
    return _Layout(
        indices=tuple(idx),
        position=pos,
        degrees=degrees,
        factorials=facts,
        mul_a=np.array(ia, dtype=int),
        mul_b=np.array(ib, dtype=int),
        mul_out=np.array(ic, dtype=int),
        groups=tuple(tuple(g) for g in groups),
    )


class Jet:
    """Truncated Taylor expansion of a scalar quantity."""

    __slots__ = ("num_vars", "order", "coeffs", "base")
    __array_priority__ = 1000

    def __init__(self, coeffs, num_vars: int, order: int, base: Sequence[float] | None = None):
        if not 1 <= num_vars <= MAX_VARS:
            raise ShapeError(f"num_vars must be in 1..{MAX_VARS}, got {num_vars}")
        if order < 0:
            raise ShapeError(f"order must be >= 0, got {order}")
        arr = np.asarray(coeffs)
        if arr.dtype != object:
            arr = arr.astype(float)
        if arr.shape != (coefficient_count(num_vars, order),):
            raise ShapeError(
                f"expected {coefficient_count(num_vars, order)} coefficients for "
                f"{num_vars} vars / order {order}, got shape {arr.shape}"
            )
        self.num_vars = num_vars
        self.order = order
        self.coeffs = arr
        self.base = None if base is None else tuple(float(b) for b in base)

    # ---- constructors ------------------------------------------------
    @classmethod
    def constant(cls, value, num_vars: int, order: int, base=None) -> "Jet":
        c = _zeros_like_value(value, coefficient_count(num_vars, order))
        c[0] = value
        return cls(c, num_vars, order, base)

    @classmethod
    def variable(cls, k: int, value, num_vars: int, order: int, base=None) -> "Jet":
        """The jet of the coordinate function ``t_k`` expanded at ``value``."""
        if not 0 <= k < num_vars:
            raise ShapeError(f"variable index {k} out of range for {num_vars} vars")
        c = _zeros_like_value(value, coefficient_count(num_vars, order))
        c[0] = value
        if order >= 1:
            unit = [0] * num_vars
            unit[k] = 1
            c[_layout(num_vars, order).position[tuple(unit)]] = 1.0
        return cls(c, num_vars, order, base)

    @classmethod
    def variables(cls, point: Sequence, order: int) -> tuple["Jet", ...]:
        """Independent coordinate jets at ``point`` (one variable per entry)."""
        nv = len(point)
        base = None
        if all(isinstance(p, (int, float, np.floating)) for p in point):
            base = tuple(float(p) for p in point)
        return tuple(cls.variable(k, point[k], nv, order, base) for k in range(nv))

    @classmethod
    def from_dict(cls, terms: dict, num_vars: int, order: int, base=None) -> "Jet":
        c = np.zeros(coefficient_count(num_vars, order))
        pos = _layout(num_vars, order).position
        for m, v in terms.items():
            m = tuple(m) if not isinstance(m, int) else (m,)
            if sum(m) <= order:
                c[pos[m]] += v
        return cls(c, num_vars, order, base)

    # ---- structure ---------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.num_vars, self.order)

    @property
    def indices(self) -> tuple:
        return _layout(self.num_vars, self.order).indices

    @property
    def value(self):
        return self.coeffs[0]

    def coeff(self, alpha) -> float:
        alpha = (alpha,) if isinstance(alpha, int) else tuple(alpha)
        if sum(alpha) > self.order:
            return 0.0
        return self.coeffs[_layout(self.num_vars, self.order).position[alpha]]

    def derivative(self, alpha):
        alpha = (alpha,) if isinstance(alpha, int) else tuple(alpha)
        return self.coeff(alpha) * math.prod(math.factorial(a) for a in alpha)

    def derivatives(self) -> np.ndarray:
        """All partial derivatives, in layout order."""
        return self.coeffs * _layout(self.num_vars, self.order).factorials

    def degree_slice(self, deg: int) -> np.ndarray:
        lay = _layout(self.num_vars, self.order)
        return self.coeffs[lay.degrees == deg]

    def gradient(self) -> list:
        out = []
        for k in range(self.num_vars):
            unit = [0] * self.num_vars
            unit[k] = 1
            out.append(self.coeff(tuple(unit)) if self.order >= 1 else 0.0)
        return out

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ShapeError("cannot raise the order of a jet by truncation")
        n = coefficient_count(self.num_vars, order)
        return Jet(self.coeffs[:n].copy(), self.num_vars, order, self.base)

    def without_constant(self) -> "Jet":
        c = self.coeffs.copy()
        c[0] = c[0] * 0
        return Jet(c, self.num_vars, self.order, self.base)

    def with_constant(self, value) -> "Jet":
        c = self.coeffs.copy()
        c[0] = value
        return Jet(c, self.num_vars, self.order, self.base)

    def astype_float(self) -> "Jet":
        return Jet(np.array([float(v) for v in self.coeffs]), self.num_vars, self.order, self.base)

    def polynomial_value(self, displacement: Sequence[float]) -> float:
        """Evaluate the Taylor polynomial at ``base + displacement``."""
        total = 0.0
        for c, m in zip(self.coeffs, self.indices):
            term = c
            for d, e in zip(displacement, m):
                if e:
                    term = term * d ** e
            total = total + term
        return total

    # ---- arithmetic --------------------------------------------------
    def _check(self, other: "Jet") -> None:
        if other.num_vars != self.num_vars or other.order != self.order:
            raise ShapeError(
                f"jet shape mismatch: {self.shape} vs {other.shape} (num_vars, order)"
            )
        if self.base is not None and other.base is not None and self.base != other.base:
            raise ShapeError(f"jet base mismatch: {self.base} vs {other.base}")

    def _base_with(self, other: "Jet") -> tuple | None:
        return self.base if self.base is not None else other.base

    def _wrap(self, coeffs, base=None) -> "Jet":
        return Jet(coeffs, self.num_vars, self.order, self.base if base is None else base)

    def __neg__(self) -> "Jet":
        return self._wrap(-self.coeffs)

    def __pos__(self) -> "Jet":
        return self

    def __add__(self, other) -> "Jet":
        if isinstance(other, Jet):
            self._check(other)
            return self._wrap(self.coeffs + other.coeffs, self._base_with(other))
        if _is_scalar(other):
            c = self.coeffs.copy()
            c[0] = c[0] + other
            return self._wrap(c)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        if isinstance(other, Jet):
            self._check(other)
            return self._wrap(self.coeffs - other.coeffs, self._base_with(other))
        if _is_scalar(other):
            c = self.coeffs.copy()
            c[0] = c[0] - other
            return self._wrap(c)
        return NotImplemented

    def __rsub__(self, other) -> "Jet":
        if _is_scalar(other):
            c = -self.coeffs
            c[0] = c[0] + other
            return self._wrap(c)
        return NotImplemented

    def __mul__(self, other) -> "Jet":
        if isinstance(other, Jet):
            self._check(other)
            return self._wrap(_truncated_product(self.coeffs, other.coeffs, self.num_vars, self.order),
                              self._base_with(other))
        if _is_scalar(other):
            return self._wrap(self.coeffs * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self * other.reciprocal()
        if _is_scalar(other):
            return self._wrap(self.coeffs * (1.0 / other) if not _is_object(other) else self.coeffs / other)
        return NotImplemented

    def __rtruediv__(self, other) -> "Jet":
        if _is_scalar(other):
            return self.reciprocal() * other
        return NotImplemented

    def __pow__(self, k: int) -> "Jet":
        if not isinstance(k, (int, np.integer)) or k < 0:
            return NotImplemented
        result = Jet.constant(self.coeffs[0] * 0 + 1, self.num_vars, self.order, self.base)
        base = self
        k = int(k)
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # ---- elementary functions ----------------------------------------
    def compose_univariate(self, taylor: Sequence) -> "Jet":
        """``f(jet)`` where ``taylor[k] = f^(k)(c) / k!`` at the constant term ``c``."""
        u = self.without_constant()
        terms = list(taylor)[: self.order + 1]
        while len(terms) < self.order + 1:
            terms.append(0.0)
        result = Jet.constant(terms[-1], self.num_vars, self.order, self.base)
        for t in reversed(terms[:-1]):
            result = result * u + t
        return result

    def reciprocal(self) -> "Jet":
        c = self.coeffs[0]
        if _is_zero(c):
            raise DomainError("reciprocal of a jet with zero constant term", value=c)
        inv = 1.0 / c
        taylor, p = [], inv
        for k in range(self.order + 1):
            taylor.append(p if k % 2 == 0 else -p)
            p = p * inv
        return self.compose_univariate(taylor)

    def exp(self) -> "Jet":
        c = self.coeffs[0]
        e = _exp(c)
        return self.compose_univariate([e / math.factorial(k) for k in range(self.order + 1)])

    def log(self) -> "Jet":
        c = self.coeffs[0]
        if not c > 0:
            raise DomainError("log of a jet with non-positive constant term", value=c)
        taylor = [_log(c)]
        inv = 1.0 / c
        p = inv
        for k in range(1, self.order + 1):
            taylor.append((p if k % 2 == 1 else -p) / k)
            p = p * inv
        return self.compose_univariate(taylor)

    def power(self, alpha: float) -> "Jet":
        """Real power ``jet ** alpha`` for a positive constant term."""
        c = self.coeffs[0]
        if not c > 0:
            raise DomainError("real power of a jet with non-positive constant term", value=c)
        taylor = []
        coef = 1.0
        for k in range(self.order + 1):
            taylor.append(coef * c ** (alpha - k))
            coef = coef * (alpha - k) / (k + 1)
        return self.compose_univariate(taylor)

    # ---- comparison helpers ------------------------------------------
    def allclose(self, other: "Jet", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        self._check(other)
        return bool(np.allclose(self.coeffs.astype(float), other.coeffs.astype(float), atol=atol, rtol=rtol))

    def __repr__(self) -> str:
        return f"Jet(num_vars={self.num_vars}, order={self.order}, coeffs={list(self.coeffs)!r})"

    def to_dict(self) -> dict:
        return {
            "num_vars": self.num_vars,
            "order": self.order,
            "coeffs": [float(c) for c in self.coeffs],
            "base": list(self.base) if self.base is not None else None,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Jet":
        return cls(np.array(data["coeffs"], dtype=float), data["num_vars"], data["order"], data.get("base"))


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    """Binary jet arithmetic by name (``add``, ``sub`` or ``mul``)."""
    if not isinstance(a, Jet) or not isinstance(b, Jet):
        raise ShapeError("jet_arith expects two jets")
    a._check(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown jet operation {op!r}")


def substitute(outer: Jet, args: Sequence[Jet]) -> Jet:
    """Evaluate the Taylor polynomial of ``outer`` (about its base) at jets ``base + args``.

    ``args[i]`` is the displacement of variable ``i`` from the outer base point, as a
    jet in the inner variables.  The result is exact through the order of ``args``
    when the displacements have zero constant term.
    """
    if len(args) != outer.num_vars:
        raise ShapeError(f"outer jet has {outer.num_vars} variables, got {len(args)} arguments")
    first = args[0]
    for a in args[1:]:
        first._check(a)
    r = outer.order
    pows = []
    for a in args:
        table = [Jet.constant(1.0, first.num_vars, first.order, first.base)]
        for _ in range(r):
            table.append(table[-1] * a)
        pows.append(table)
    result = Jet.constant(0.0, first.num_vars, first.order, first.base)
    acc = np.zeros_like(result.coeffs, dtype=object if _any_object(outer, args) else float)
    for c, m in zip(outer.coeffs, outer.indices):
        if _is_zero(c):
            continue
        term = None
        for var, e in enumerate(m):
            if e:
                term = pows[var][e] if term is None else term * pows[var][e]
        if term is None:
            acc[0] = acc[0] + c
        else:
            acc = acc + term.coeffs * c
    return Jet(acc, first.num_vars, first.order, first.base)


def jet_compose(outer, inner: Sequence[Jet], domain=None) -> tuple[Jet, ...]:
    """Jets of ``outer ∘ inner``.

    ``outer`` is either a sequence of jets (expansions about a common base point)
    or an object with an ``evaluate`` method / a callable accepting jets.
    ``domain`` optionally restricts where the image base point may lie.
    """
    inner = tuple(inner)
    if domain is not None:
        point = [float(j.value) for j in inner]
        if not domain.contains_point(point):
            raise DomainError("constant term of inner jets lies outside the outer domain",
                              point=point, domain=domain)
    if isinstance(outer, (list, tuple)) and outer and isinstance(outer[0], Jet):
        base = outer[0].base or tuple(0.0 for _ in range(outer[0].num_vars))
        args = [j - b for j, b in zip(inner, base)]
        return tuple(substitute(o, args) for o in outer)
    if hasattr(outer, "evaluate"):
        return tuple(outer.evaluate(inner))
    if callable(outer):
        return tuple(outer(*inner))
    raise ShapeError("outer must be a jet sequence, an evaluable map, or a callable")


def jacobian(jets: Sequence[Jet]) -> np.ndarray:
    """First-derivative matrix of a tuple of jets of order >= 1."""
    return np.array([[float(v) for v in j.gradient()] for j in jets])


def invert_series(jet: Jet) -> Jet:
    """Compositional inverse of a one-variable jet with zero constant term.

    Returns ``g`` with ``jet ∘ g = id`` through the jet order.
    """
    if jet.num_vars != 1:
        raise ShapeError("series inversion needs a one-variable jet")
    if not _is_zero(jet.coeffs[0]):
        raise DomainError("series inversion needs zero constant term", value=jet.coeffs[0])
    r = jet.order
    if r == 0:
        return Jet.constant(0.0, 1, 0)
    a1 = jet.coeffs[1]
    if _is_zero(a1):
        raise DomainError("series inversion needs a nonzero linear coefficient")
    g = np.zeros(r + 1, dtype=jet.coeffs.dtype)
    g[1] = 1.0 / a1
    for k in range(2, r + 1):
        trial = Jet(g.copy(), 1, r)
        comp = substitute(jet, [trial])
        g[k] = -comp.coeffs[k] / a1
    return Jet(g, 1, r)


# ---- helpers -------------------------------------------------------------

def _truncated_product(a: np.ndarray, b: np.ndarray, num_vars: int, order: int) -> np.ndarray:
    lay = _layout(num_vars, order)
    if a.dtype != object and b.dtype != object:
        prod = a[lay.mul_a] * b[lay.mul_b]
        return np.bincount(lay.mul_out, weights=prod, minlength=len(lay.indices))
    out = np.empty(len(lay.indices), dtype=object)
    for k, group in enumerate(lay.groups):
        acc = None
        for i, j in group:
            ai, bj = a[i], b[j]
            if _is_zero(ai) or _is_zero(bj):
                continue
            t = ai * bj
            acc = t if acc is None else acc + t
        out[k] = 0.0 if acc is None else acc
    return out


def _zeros_like_value(value, n: int) -> np.ndarray:
    if _is_object(value):
        arr = np.empty(n, dtype=object)
        arr[:] = 0.0
        return arr
    return np.zeros(n)


def _is_scalar(v) -> bool:
    return not isinstance(v, (Jet, np.ndarray, list, tuple))


def _is_object(v) -> bool:
    return not isinstance(v, (int, float, np.floating, np.integer))


def _any_object(outer: Jet, args: Sequence[Jet]) -> bool:
    return outer.coeffs.dtype == object or any(a.coeffs.dtype == object for a in args)


def _is_zero(v) -> bool:
    try:
        return v == 0
    except Exception:  # interval-like values without a scalar comparison
        return False


def _exp(c):
    if isinstance(c, (int, float, np.floating)):
        return math.exp(c)
    import mpmath

    return mpmath.exp(c)


def _log(c):
    if isinstance(c, (int, float, np.floating)):
        return math.log(c)
    import mpmath

    return mpmath.log(c)


def map_jets(func: Callable, jets: Sequence[Jet]) -> tuple[Jet, ...]:
    return tuple(func(j) for j in jets)
