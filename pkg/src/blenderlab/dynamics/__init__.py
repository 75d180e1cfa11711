"""Planar maps, branch words, periodic orbits, manifolds and cone certificates."""

from blenderlab.dynamics.cones import ConeCertificate, certify_cone, sampled_cone_ratio
from blenderlab.dynamics.expr import (
    A,
    Bump,
    Const,
    Expr,
    PlanarMapExpr,
    Var,
    X,
    Y,
    henon,
    linear_map,
    quadratic_product,
    smoothstep5,
)
from blenderlab.dynamics.manifolds import FLAVORS, ManifoldCurve, invariance_residual, local_manifold
from blenderlab.dynamics.orbits import (
    KINDS,
    PeriodicOrbit,
    canonical,
    classify,
    cyclic_distance,
    dedupe,
    eigenvalues_2x2,
    find_periodic_orbit,
    iterate,
    period_jacobian,
    period_jets,
    search_orbits,
    seed_grid,
)
from blenderlab.dynamics.poly import Poly2, PolyMap, parse_monomial
from blenderlab.dynamics.words import Branch, BranchWord, ComposedMap, compose_maps, interval_jacobian


def evaluate(fmap, z):
    """Evaluate a map or word on a point, a jet pair or a :class:`Box2`."""
    return fmap.evaluate(z)


__all__ = [
    "A", "Branch", "BranchWord", "Bump", "ComposedMap", "ConeCertificate", "Const", "Expr", "FLAVORS",
    "KINDS", "ManifoldCurve", "PeriodicOrbit", "PlanarMapExpr", "Poly2", "PolyMap", "Var", "X", "Y",
    "canonical", "certify_cone", "classify", "compose_maps", "cyclic_distance", "dedupe",
    "eigenvalues_2x2", "evaluate", "find_periodic_orbit", "henon", "interval_jacobian",
    "invariance_residual", "iterate", "linear_map", "local_manifold", "parse_monomial",
    "period_jacobian", "period_jets", "quadratic_product", "sampled_cone_ratio", "search_orbits",
    "seed_grid", "smoothstep5",
]
