import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blenderlab.dynamics import certify_cone
from blenderlab.dynamics.orbits import SADDLE, iterate
from blenderlab.errors import ConfigError, ConstructionError, PreconditionError
from blenderlab.hetero_model import (
    ModelFamily,
    affine_model,
    build_cantor_pair,
    build_horseshoe,
    build_model,
    log_ratio,
    small_rational,
    unfold,
)
from blenderlab.numerics import Box2, Jet


def test_affine_model_valid():
    m = affine_model()
    assert m.strong
    flags = m.flags()
    assert flags.t1 and flags.t2
    # identity T_S has no x-dependence in Y^S, so the E^uu transversality flag is off
    assert flags.t3 is False


def test_normalization_violation_reports_value():
    cfg = affine_model().to_config()
    cfg["transitions"]["T_Q"]["y"] = {"y": 2.0}
    with pytest.raises(ConfigError) as err:
        build_model(cfg)
    assert err.value.details["d_y_YQ"] == 2.0


def test_swapped_transition_turns_t2_off():
    cfg = affine_model().to_config()
    cfg["transitions"]["T_S"] = {"x": {"y": 1.0}, "y": {"x": 1.0}}
    m = build_model(cfg)
    assert m.flags().t2 is False and m.flags().t3 is True


@pytest.mark.parametrize("bad", [
    {"sigma": 1.2}, {"lambda": 0.5}, {"sigma_u": 0.1, "sigma_uu": 0.2}, {"sigma_u": 0.25, "lambda": 4.0},
])
def test_eigenvalue_checks(bad):
    cfg = affine_model().to_config()
    cfg["eigenvalues"].update(bad)
    with pytest.raises(ConfigError):
        build_model(cfg)


def test_small_rational_proxy():
    assert small_rational(log_ratio(0.25, 4.0)) == -1
    assert small_rational(log_ratio(0.5, 3.0)) is None


def test_missing_field():
    with pytest.raises(ConfigError):
        build_model({"eigenvalues": {"sigma": 0.25}})


def test_negative_lambda_allowed():
    m = affine_model(lam=-3.0)
    assert m.lam == -3.0 and m.lam_abs == 3.0


def test_config_round_trip_is_bit_exact():
    cfg = affine_model(s_x=0.1 + 0.2, s_y=1e-4 / 3, q_x=-0.3, q_y=2.0 ** -60).to_config()
    cfg["transitions"]["T_Q"]["y"]["y^2"] = 0.1
    cfg["transitions"]["T_S"]["x"]["x*y"] = math.pi
    m = build_model(json.loads(json.dumps(cfg)))
    assert m.to_config() == build_model(cfg).to_config()
    assert build_model(m.to_config()).jet_equal(m)


def test_chart_branches_are_linear():
    m = affine_model()
    br = m.branches()
    for name in ("S", "Q"):
        jx, jy = br[name].fmap.jets((0.1, 0.2), 3)
        assert all(np.all(j.coeffs[3:] == 0) for j in (jx, jy))


def test_unfold_changes_only_constants():
    m = affine_model()
    assert unfold(m, 0.0, 0.0).jet_equal(m)
    u = unfold(m, 1e-4, 2e-3)
    assert u.s_y == 1e-4 and u.T_S.py.coeff(0, 0) == 1e-4
    for before, after in ((m.T_S, u.T_S), (m.T_Q, u.T_Q)):
        for p, q in ((before.px, after.px), (before.py, after.py)):
            diff = {k for k in set(p.terms) | set(q.terms) if p.coeff(*k) != q.coeff(*k)}
            assert diff <= {(0, 0)}


@given(st.floats(-0.01, 0.01), st.floats(-0.01, 0.01))
@settings(max_examples=30)
def test_unfold_commutes_with_build(s_y, q_y):
    cfg = affine_model().to_config()
    cfg["constants"]["s_y"] = s_y
    cfg["constants"]["q_y"] = q_y
    assert build_model(cfg).jet_equal(unfold(affine_model(), s_y, q_y))


def test_model_family_base_and_round_trip():
    m = affine_model()
    fam = ModelFamily.constant(m, 2, sigma_u=[0.5, 0.1, 0.0])
    assert fam.base_model().jet_equal(m)
    back = ModelFamily.from_dict(json.loads(json.dumps(fam.to_dict())))
    assert np.array_equal(back.sigma_u.coeffs, fam.sigma_u.coeffs)
    with pytest.raises(ConfigError):
        ModelFamily.constant(m, 2, sigma_u=[0.4, 0.1, 0.0])


# ---------------------------------------------------------------------------
# Cantor pair
# ---------------------------------------------------------------------------


def test_cantor_pair_disjoint_inside_and_coned():
    m = affine_model()
    pair = build_cantor_pair(m, 6, 12)
    W = pair.domain
    assert W.interior_contains(pair.image1) and W.interior_contains(pair.image2)
    assert not pair.image1.intersects(pair.image2)
    assert pair.margin > 0
    for word in (pair.word1, pair.word2):
        cert = certify_cone(word, W, 0.25)
        assert cert.contraction_ratio < 1 and cert.expansion_lower_bound > 1
    again = build_cantor_pair(m, 6, 12)
    assert again.margin == pair.margin and again.to_dict() == pair.to_dict()


def test_cantor_pair_images_recheck_by_points():
    pair = build_cantor_pair(affine_model(), 6, 12)
    W = pair.domain
    for x in np.linspace(W.x.lo, W.x.hi, 5):
        for y in np.linspace(W.y.lo, W.y.hi, 5):
            p = (float(x), float(y))
            assert pair.image1.contains_point(pair.word1.evaluate(p))
            assert pair.image2.contains_point(pair.word2.evaluate(p))


def test_cantor_pair_failures():
    m = affine_model()
    with pytest.raises(ConstructionError):
        build_cantor_pair(m, 6, 0)
    with pytest.raises(ConstructionError):
        build_cantor_pair(m, 6, 8)
    with pytest.raises(PreconditionError):
        build_cantor_pair(affine_model(with_h=False), 6, 12)


# ---------------------------------------------------------------------------
# horseshoe
# ---------------------------------------------------------------------------


def test_horseshoe_crossing_and_saddle():
    m = affine_model()
    rep = build_horseshoe(m, 5, 8, 0.1)
    assert rep.threshold_value == pytest.approx(0.1 * 6561 / 32)
    assert rep.stable_boundary_margin > 0 and rep.unstable_boundary_margin > 0
    assert rep.saddle.kind == SADDLE
    assert abs(rep.vertical_multiplier - rep.jet_vertical_derivative) <= 1e-9 * abs(rep.jet_vertical_derivative)
    assert abs(rep.vertical_multiplier / rep.predicted_vertical - 1) < 0.2
    G2 = rep.saddle
    z = G2.points[0]
    assert rep.box.contains_point(z)


def test_horseshoe_saddle_is_fixed_by_word():
    from blenderlab.hetero_model import horseshoe_word

    m = affine_model()
    rep = build_horseshoe(m, 5, 8, 0.1)
    z = rep.saddle.points[0]
    w = horseshoe_word(m, 5, 8)
    fz = w.evaluate(z)
    assert max(abs(fz[0] - z[0]), abs(fz[1] - z[1])) < 1e-11


@pytest.mark.parametrize("n,N,eps", [(5, 5, 0.1), (5, 8, 0.0)])
def test_horseshoe_preconditions(n, N, eps):
    with pytest.raises(PreconditionError) as err:
        build_horseshoe(affine_model(), n, N, eps)
    assert "value" in err.value.details
