"""Named inverse branches and finite composition words over them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from blenderlab.errors import DomainError, ShapeError
from blenderlab.numerics.interval import Box2, Interval
from blenderlab.numerics.jet import Jet

# Repeats longer than this use the closed-form power of a diagonal branch.
_LOOP_LIMIT = 64


@dataclass(frozen=True)
class Branch:
    """A map together with the box on which it may be applied.

    ``diagonal`` marks an exactly linear branch ``(x, y) -> (dx*x, dy*y)``;
    such branches can be raised to large powers in closed form.
    """

    name: str
    fmap: Any
    domain: Box2 | None = None
    diagonal: tuple[float, float] | None = None

    @classmethod
    def linear(cls, name: str, dx: float, dy: float, domain: Box2 | None = None) -> "Branch":
        from blenderlab.dynamics.poly import Poly2, PolyMap

        fmap = PolyMap(Poly2({(1, 0): dx}), Poly2({(0, 1): dy}), name)
        return cls(name, fmap, domain, (float(dx), float(dy)))

    def admits(self, z) -> bool:
        if self.domain is None:
            return True
        return _inside(self.domain, z)

    def apply(self, z):
        if isinstance(z, Box2):
            return self.fmap.evaluate(z)
        return tuple(self.fmap.evaluate(tuple(z)))

    def evaluate(self, z, env=None):
        """Single application with the domain check."""
        return self.apply_power(z, 1)

    def apply_power(self, z, k: int):
        """``k`` applications with a domain check before each one."""
        if self.diagonal is None or k <= _LOOP_LIMIT:
            for step in range(k):
                if not self.admits(z):
                    raise DomainError(
                        f"branch {self.name} applied outside its domain (repeat {step + 1}/{k})",
                        branch=self.name, repeat=step + 1, partial=_describe(z), domain=self.domain,
                    )
                z = self.apply(z)
            return z
        dx, dy = self.diagonal
        if not self.admits(z):
            raise DomainError(f"branch {self.name} applied outside its domain (repeat 1/{k})",
                              branch=self.name, repeat=1, partial=_describe(z), domain=self.domain)
        before_last = _scale(z, dx ** (k - 1), dy ** (k - 1))
        if not self.admits(before_last):
            raise DomainError(f"branch {self.name} applied outside its domain (repeat {k}/{k})",
                              branch=self.name, repeat=k, partial=_describe(before_last), domain=self.domain)
        return _scale(z, dx ** k, dy ** k)


@dataclass(frozen=True)
class BranchWord:
    """Composition ``b1^k1 ∘ b2^k2 ∘ ... ∘ bn^kn``; the rightmost letter acts first."""

    letters: tuple
    branches: Mapping[str, Branch] = field(compare=False, hash=False)
    name: str = "word"

    def __post_init__(self) -> None:
        letters = tuple((str(b), int(k)) for b, k in self.letters)
        for b, k in letters:
            if k < 1:
                raise ShapeError(f"repeat counts must be >= 1 (got {b}^{k})")
            if b not in self.branches:
                raise ShapeError(f"unknown branch {b!r} in word")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def parse(cls, text: str, branches: Mapping[str, Branch], name: str = "word") -> "BranchWord":
        """Parse ``"T_S S^5 T_H P^8"`` (composition order, rightmost first)."""
        letters = []
        for token in text.replace("∘", " ").split():
            if "^" in token:
                b, k = token.split("^")
                letters.append((b, int(k)))
            else:
                letters.append((token, 1))
        return cls(tuple(letters), branches, name)

    @classmethod
    def identity(cls, branches: Mapping[str, Branch] | None = None) -> "BranchWord":
        return cls((), branches or {}, "id")

    def __str__(self) -> str:
        if not self.letters:
            return "id"
        return " ∘ ".join(b if k == 1 else f"{b}^{k}" for b, k in self.letters)

    def then(self, other: "BranchWord") -> "BranchWord":
        """``self ∘ other``."""
        merged = dict(other.branches)
        merged.update(self.branches)
        return BranchWord(self.letters + other.letters, merged, f"{self.name}∘{other.name}")

    def stages(self, z) -> list:
        """All partial images, starting with the input."""
        out = [z]
        for bname, k in reversed(self.letters):
            z = self.branches[bname].apply_power(z, k)
            out.append(z)
        return out

    def evaluate(self, z, env=None):
        for bname, k in reversed(self.letters):
            try:
                z = self.branches[bname].apply_power(z, k)
            except DomainError as exc:
                exc.details.setdefault("word", str(self))
                raise
        return z

    def __call__(self, x, y):
        return self.evaluate((x, y))

    def jets(self, point, order: int = 1) -> tuple[Jet, Jet]:
        jx, jy = Jet.variables((float(point[0]), float(point[1])), order)
        out = self.evaluate((jx, jy))
        return tuple(v if isinstance(v, Jet) else Jet.constant(v, 2, order, jx.base) for v in out)

    def jacobian(self, point) -> np.ndarray:
        jx, jy = self.jets(point, 1)
        return np.array([[jx.coeff((1, 0)), jx.coeff((0, 1))], [jy.coeff((1, 0)), jy.coeff((0, 1))]], dtype=float)

    def interval_jacobian(self, box: Box2) -> list[list[Interval]]:
        """Interval enclosure of the derivative over ``box``."""
        jx = _interval_jet(box.x, 0)
        jy = _interval_jet(box.y, 1)
        ox, oy = self.evaluate((jx, jy))
        return [[_ic(ox, (1, 0)), _ic(ox, (0, 1))], [_ic(oy, (1, 0)), _ic(oy, (0, 1))]]


def interval_jacobian(fmap, box: Box2) -> list[list[Interval]]:
    """Derivative enclosure of any evaluable map over ``box``."""
    jx = _interval_jet(box.x, 0)
    jy = _interval_jet(box.y, 1)
    ox, oy = fmap.evaluate((jx, jy))
    return [[_ic(ox, (1, 0)), _ic(ox, (0, 1))], [_ic(oy, (1, 0)), _ic(oy, (0, 1))]]


def _interval_jet(iv: Interval, k: int) -> Jet:
    c = np.empty(3, dtype=object)
    c[:] = 0.0
    c[0] = iv
    c[1 + k] = 1.0
    return Jet(c, 2, 1)


def _ic(j, alpha) -> Interval:
    if not isinstance(j, Jet):
        return Interval(0.0, 0.0)
    v = j.coeff(alpha)
    return v if isinstance(v, Interval) else Interval(float(v), float(v))


def _inside(domain: Box2, z) -> bool:
    if isinstance(z, Box2):
        return domain.contains(z)
    x, y = z
    return _coord_in(domain.x, x) and _coord_in(domain.y, y)


def _coord_in(iv: Interval, v) -> bool:
    if isinstance(v, Jet):
        v = v.value
    if isinstance(v, Interval):
        return iv.contains(v)
    return iv.lo <= float(v) <= iv.hi


def _scale(z, sx, sy):
    if isinstance(z, Box2):
        return Box2(z.x * sx, z.y * sy)
    x, y = z
    return (x * sx, y * sy)


def _describe(z):
    if isinstance(z, Box2):
        return z.to_list()
    out = []
    for v in z:
        if isinstance(v, Jet):
            v = v.value
        if isinstance(v, Interval):
            out.append(v.to_list())
        else:
            out.append(float(v))
    return out


def compose_maps(*maps: Any) -> "ComposedMap":
    return ComposedMap(tuple(maps))


@dataclass(frozen=True)
class ComposedMap:
    """``maps[0] ∘ maps[1] ∘ ...`` without domain bookkeeping."""

    maps: Sequence[Any]

    def evaluate(self, z, env=None):
        for m in reversed(self.maps):
            z = m.evaluate(z)
        return z

    def __call__(self, x, y):
        return self.evaluate((x, y))

    def jets(self, point, order: int = 1):
        jx, jy = Jet.variables((float(point[0]), float(point[1])), order)
        return self.evaluate((jx, jy))
