import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blenderlab.dynamics import (
    A,
    Branch,
    BranchWord,
    Bump,
    PlanarMapExpr,
    Poly2,
    PolyMap,
    X,
    Y,
    certify_cone,
    classify,
    dedupe,
    eigenvalues_2x2,
    find_periodic_orbit,
    henon,
    invariance_residual,
    linear_map,
    local_manifold,
    sampled_cone_ratio,
    search_orbits,
    seed_grid,
    smoothstep5,
)
from blenderlab.dynamics.manifolds import STABLE, STRONG_UNSTABLE, UNSTABLE, WEAK_UNSTABLE
from blenderlab.dynamics.orbits import PH_SOURCE, SADDLE, SINK, SOURCE, canonical, iterate, period_jacobian
from blenderlab.errors import (
    ConeFailure,
    DegenerateError,
    DomainError,
    NotFoundError,
    PreconditionError,
    ResonanceError,
    ShapeError,
    UnsupportedError,
)
from blenderlab.numerics import Box2, Interval, Jet

from oracles import quadratic_eigs

HENON_X = (-0.7 + math.sqrt(1.29)) / 0.4


def saddle_map():
    return PlanarMapExpr.build(X ** 2 - 2.0, 0.5 * Y, name="sq")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def test_quadratic_product_at_point():
    f = PlanarMapExpr.build(X ** 2 - 2.0, Y)
    assert f.evaluate((0.0, 1.0)) == (-2.0, 1.0)


def test_identity_word():
    w = BranchWord.identity()
    assert w.evaluate((0.3, -0.7)) == (0.3, -0.7)


def test_linear_branch_cubed():
    br = {"Q": Branch.linear("Q", 0.25, 0.4)}
    w = BranchWord((("Q", 3),), br)
    x, y = w.evaluate((1.0, 1.0))
    assert x == pytest.approx(0.015625, abs=1e-15) and y == pytest.approx(0.064, abs=1e-15)


def test_word_domain_violation_names_branch():
    br = {"Q": Branch.linear("Q", 3.0, 3.0, Box2.from_bounds(-1, 1, -1, 1))}
    w = BranchWord((("Q", 2),), br)
    with pytest.raises(DomainError) as err:
        w.evaluate((0.5, 0.5))
    assert err.value.details["branch"] == "Q"
    assert err.value.details["repeat"] == 2


def test_large_power_closed_form_matches_loop():
    br = {"Q": Branch.linear("Q", 0.9, 1.01)}
    w = BranchWord((("Q", 500),), br)
    x, y = w.evaluate((1.0, 1.0))
    assert x == pytest.approx(0.9 ** 500, rel=1e-12) and y == pytest.approx(1.01 ** 500, rel=1e-12)


def test_word_validation():
    br = {"Q": Branch.linear("Q", 0.5, 0.5)}
    with pytest.raises(ShapeError):
        BranchWord((("Q", 0),), br)
    with pytest.raises(ShapeError):
        BranchWord((("R", 1),), br)
    assert str(BranchWord.parse("Q^3 Q", br)) == "Q^3 ∘ Q"


def test_word_jets_and_intervals_agree_with_points():
    f = PolyMap(Poly2({(2, 0): 1.0, (0, 0): -0.5}), Poly2({(0, 1): 0.5, (1, 0): 0.1}), "f")
    br = {"f": Branch("f", f)}
    w = BranchWord((("f", 2),), br)
    p = (0.3, 0.2)
    jx, jy = w.jets(p, 2)
    val = w.evaluate(p)
    assert jx.value == pytest.approx(val[0]) and jy.value == pytest.approx(val[1])
    img = w.evaluate(Box2.from_bounds(0.2, 0.4, 0.1, 0.3))
    for x in np.linspace(0.2, 0.4, 5):
        for y in np.linspace(0.1, 0.3, 5):
            assert img.contains_point(w.evaluate((float(x), float(y))))


def test_order_zero_jet_equals_scalar():
    f = henon(1.2, 0.3)
    jx, jy = f.jets((0.4, -0.1), 0)
    assert (jx.value, jy.value) == f.evaluate((0.4, -0.1))


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.01, 0.5))
@settings(max_examples=60)
def test_interval_evaluation_encloses_points(cx, cy, r):
    fam = PlanarMapExpr.build(X ** 2 + A + 0.3 * Bump(X, 0.2, 0.1) * Y, (1 + 0.1 * Bump(X, -0.5, 0.1)) * Y, a=-1.0)
    box = Box2.from_bounds(cx - r, cx + r, cy - r, cy + r)
    img = fam.evaluate(box)
    for x in np.linspace(cx - r, cx + r, 7):
        for y in np.linspace(cy - r, cy + r, 7):
            assert img.contains_point(fam.evaluate((float(x), float(y))))


def test_smoothstep_and_bump_plateau():
    assert smoothstep5(0.0) == 0 and smoothstep5(1.0) == 1 and smoothstep5(0.5) == 0.5
    b = PlanarMapExpr.build(Bump(X, 2.0, 0.05), Y)
    assert b.evaluate((2.04, 0))[0] == 1.0
    assert b.evaluate((2.11, 0))[0] == 0.0
    assert 0 < b.evaluate((2.07, 0))[0] < 1


# ---------------------------------------------------------------------------
# periodic orbits
# ---------------------------------------------------------------------------


def test_henon_fixed_point_sink():
    f = henon(0.2, 0.3)
    orb = find_periodic_orbit(f, 1, (1.0, 0.0))
    x, y = orb.points[0]
    assert x == pytest.approx(HENON_X, abs=1e-12) and y == pytest.approx(0.3 * HENON_X, abs=1e-12)
    oracle = sorted(quadratic_eigs(-0.4 * x, 1.0, 0.3, 0.0), key=abs)
    for m, o in zip(orb.multipliers, oracle):
        assert abs(m - o) < 1e-9
    assert orb.kind == SINK
    z = (x + 0.01, 0.0)
    for _ in range(500):
        z = f.evaluate(z)
    assert math.hypot(z[0] - x, z[1] - y) < 1e-9


def test_square_map_saddle():
    orb = find_periodic_orbit(saddle_map(), 1, (2.1, 0.1))
    assert orb.points[0] == pytest.approx((2.0, 0.0), abs=1e-12)
    assert sorted(abs(m) for m in orb.multipliers) == pytest.approx([0.5, 4.0])
    assert orb.kind == SADDLE


def test_linear_source_is_projectively_hyperbolic():
    orb = find_periodic_orbit(linear_map(2.0, 3.0), 1, (0.01, 0.01))
    assert orb.points[0] == pytest.approx((0.0, 0.0), abs=1e-12)
    assert orb.kind == PH_SOURCE


def test_newton_failures():
    with pytest.raises(DegenerateError):
        find_periodic_orbit(linear_map(1.0, 0.5), 1, (0.3, 0.3))
    with pytest.raises(NotFoundError):
        find_periodic_orbit(PlanarMapExpr.build(X ** 2 + 1.0, Y * 0.5), 1, (0.0, 0.0))


def test_period_two_orbit_reduces_to_minimal_period():
    f = PlanarMapExpr.build(X ** 2 - 1.0, 0.2 * Y)
    orb = find_periodic_orbit(f, 2, (-0.05, 0.0))
    assert orb.period == 2
    pts = sorted(p[0] for p in orb.points)
    assert pts == pytest.approx([-1.0, 0.0], abs=1e-12)
    fixed = find_periodic_orbit(saddle_map(), 2, (2.05, 0.0))
    assert fixed.period == 1


def test_classify_examples():
    assert classify([0.37, -0.81]) == SINK
    assert classify([4, 0.5]) == SADDLE
    assert classify([1.1, 1.100001], theta_gap=1e-3) == SOURCE
    assert classify([2, 3]) == PH_SOURCE
    assert classify([complex(1.5, 0.5), complex(1.5, -0.5)]) == SOURCE
    assert classify([1.0, 0.5]) == "non-hyperbolic"


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_eigenvalues_match_quadratic_formula(a, b, c, d):
    mus = eigenvalues_2x2(np.array([[a, b], [c, d]]))
    tr, det = a + d, a * d - b * c
    assert abs(sum(mus) - tr) <= 1e-9 * max(1, abs(tr), abs(det))
    assert abs(mus[0] * mus[1] - det) <= 1e-9 * max(1, abs(det), tr * tr)


def test_classification_conjugacy_invariant():
    f = henon(1.4, 0.3)
    seeds = seed_grid(Box2.from_bounds(-1.5, 1.5, -0.5, 0.5), 6)
    orbits = search_orbits(f, [4], seeds)
    assert orbits
    for orb in orbits:
        for k in range(orb.period):
            mus = eigenvalues_2x2(period_jacobian(f, orb.points[k], orb.period))
            assert classify(mus) == orb.kind
            for m, n in zip(sorted(mus, key=abs), sorted(orb.multipliers, key=abs)):
                assert abs(m - n) < 1e-9 * max(1, abs(n))


def test_newton_interval_post_check():
    f = henon(1.4, 0.3)
    for orb in search_orbits(f, [1, 2], seed_grid(Box2.from_bounds(-1.5, 1.5, -0.5, 0.5), 4)):
        img = iterate(f, Box2.point(*orb.points[0]), orb.period)
        assert max(abs(img.x.mid - orb.points[0][0]), abs(img.y.mid - orb.points[0][1])) <= 1e-11


def test_search_is_deduplicated_and_canonical():
    f = henon(1.4, 0.3)
    seeds = seed_grid(Box2.from_bounds(-1.5, 1.5, -0.5, 0.5), 5)
    found = search_orbits(f, [1, 2], seeds)
    assert len(dedupe(found)) == len(found)
    for o in found:
        assert canonical(f, o).points == o.points


def test_search_parallel_matches_serial():
    f = henon(1.4, 0.3)
    seeds = seed_grid(Box2.from_bounds(-1.5, 1.5, -0.5, 0.5), 4)
    a = search_orbits(f, [1, 2, 3], seeds, workers=1)
    b = search_orbits(f, [1, 2, 3], seeds, workers=3)
    assert [o.to_dict() for o in a] == [o.to_dict() for o in b]


def test_periodic_orbit_round_trip():
    orb = find_periodic_orbit(henon(0.2, 0.3), 1, (1.0, 0.0))
    from blenderlab.dynamics.orbits import PeriodicOrbit

    assert PeriodicOrbit.from_dict(orb.to_dict()) == orb


# ---------------------------------------------------------------------------
# manifolds
# ---------------------------------------------------------------------------


def test_linear_strong_and_weak_unstable_axes():
    f = linear_map(2.0, 3.0)
    orb = find_periodic_orbit(f, 1, (0.01, 0.01))
    strong = local_manifold(f, orb, STRONG_UNSTABLE, 6)
    weak = local_manifold(f, orb, WEAK_UNSTABLE, 6)
    assert strong.tangent == pytest.approx((0.0, 1.0), abs=1e-14)
    assert weak.tangent == pytest.approx((1.0, 0.0), abs=1e-14)
    assert np.allclose(strong.taylor[0], 0) and np.allclose(strong.taylor[1][2:], 0)
    assert strong.multiplier == pytest.approx(3.0)


def test_square_map_stable_manifold_is_vertical():
    f = saddle_map()
    orb = find_periodic_orbit(f, 1, (2.1, 0.1))
    curve = local_manifold(f, orb, STABLE, 10)
    assert curve.tangent == pytest.approx((0.0, 1.0), abs=1e-14)
    assert np.allclose(curve.taylor[0][1:], 0, atol=1e-14)
    assert np.allclose(curve.taylor[1][2:], 0, atol=1e-14)


def test_unstable_rejected_at_sink():
    f = henon(0.2, 0.3)
    orb = find_periodic_orbit(f, 1, (1.0, 0.0))
    with pytest.raises(PreconditionError):
        local_manifold(f, orb, UNSTABLE)


def test_strong_unstable_needs_projective_source():
    f = saddle_map()
    orb = find_periodic_orbit(f, 1, (2.1, 0.1))
    with pytest.raises(PreconditionError):
        local_manifold(f, orb, STRONG_UNSTABLE)


def test_resonance_detected():
    # mu = 2 on x, other = 4 on y: mu^2 = other
    f = PlanarMapExpr.build(2.0 * X, 4.0 * Y + X ** 2)
    orb = find_periodic_orbit(f, 1, (0.01, 0.01))
    with pytest.raises(ResonanceError):
        local_manifold(f, orb, WEAK_UNSTABLE, 4)


def test_complex_multiplier_unsupported():
    f = PlanarMapExpr.build(1.5 * X - 1.0 * Y, 1.0 * X + 1.5 * Y)
    orb = find_periodic_orbit(f, 1, (0.01, 0.01))
    with pytest.raises(UnsupportedError):
        local_manifold(f, orb, UNSTABLE)


@pytest.mark.parametrize("a,flavor", [(1.4, UNSTABLE), (1.4, STABLE), (1.0, UNSTABLE), (1.0, STABLE)])
def test_henon_manifold_invariance(a, flavor):
    f = henon(a, 0.3)
    b = 0.3
    x = ((b - 1) + math.sqrt((1 - b) ** 2 + 4 * a)) / (2 * a)
    orb = find_periodic_orbit(f, 1, (x, b * x))
    curve = local_manifold(f, orb, flavor, 10)
    assert invariance_residual(f, curve, curve.validity_radius) <= 1e-8
    jac = period_jacobian(f, orb.points[0], 1)
    v = np.array(curve.tangent)
    assert np.allclose(jac @ v, curve.multiplier * v, atol=1e-10)
    assert curve.evaluate(0.0) == pytest.approx(orb.points[0])


# ---------------------------------------------------------------------------
# cones
# ---------------------------------------------------------------------------


def word_of(px: Poly2, py: Poly2) -> BranchWord:
    return BranchWord((("g", 1),), {"g": Branch("g", PolyMap(px, py, "g"))})


def test_cone_diagonal():
    w = word_of(Poly2({(1, 0): 0.2}), Poly2({(0, 1): 0.5}))
    cert = certify_cone(w, Box2.from_bounds(-1, 1, -1, 1), 0.5)
    assert cert.contraction_ratio == pytest.approx(0.4, abs=1e-12)
    assert cert.expansion_lower_bound == pytest.approx(2.0, abs=1e-12)


def test_cone_quadratic_term():
    w = word_of(Poly2({(1, 0): 0.2, (0, 2): 0.01}), Poly2({(0, 1): 0.5}))
    box = Box2.from_bounds(-1, 1, -1, 1)
    cert = certify_cone(w, box, 0.5)
    sampled = sampled_cone_ratio(w, box, 0.5, points=41, directions=41)
    # boundary direction (0.5, 1) at y = 1: |0.1 + 0.02| / (0.5 * 0.5)
    assert sampled == pytest.approx(0.48, abs=1e-9)
    assert sampled <= cert.contraction_ratio <= 0.48 + 1e-6
    assert cert.contraction_ratio < 1


def test_cone_failure_has_witness():
    w = word_of(Poly2({(1, 0): 0.6}), Poly2({(0, 1): 0.5}))
    with pytest.raises(ConeFailure) as err:
        certify_cone(w, Box2.from_bounds(-1, 1, -1, 1), 0.5)
    assert err.value.details["ratio"] == pytest.approx(1.2)
    assert abs(err.value.details["direction"][0]) == 0.5


@given(st.floats(0.3, 0.99))
@settings(max_examples=25)
def test_cone_monotone_in_eta(eta2):
    w = word_of(Poly2({(1, 0): 0.2}), Poly2({(0, 1): 0.5}))
    box = Box2.from_bounds(-1, 1, -1, 1)
    certify_cone(w, box, 0.3, samples=2)
    cert = certify_cone(w, box, eta2, samples=2)
    assert cert.contraction_ratio < 1
