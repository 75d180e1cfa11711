import json
import random

import mpmath
import numpy as np
import pytest

from blenderlab.errors import (ConfigError, DegenerateError, InfeasibleError, PreconditionError,
                               SearchExhaustedError)
from blenderlab.hetero_model import ModelFamily, affine_model, build_model
from blenderlab.numerics.jet import substitute
from blenderlab.renorm import (
    RenormPlan,
    convergents,
    cr_distance,
    para_tune,
    predicted_affine_y,
    renormalize,
    reparametrize_alpha,
    select_base_pair,
    select_exponents,
    targets_for,
    tune_unfolding,
    tuning_constants,
)

from oracles import exhaustive_band_pairs

DELTA = 1.013637


@pytest.fixture(scope="module")
def tuned():
    plan = select_exponents(affine_model(), DELTA, 0.15)
    plan, model = tune_unfolding(plan, affine_model())
    return plan, model, renormalize(model, plan)


def scaling_model():
    # large |lambda| keeps the exponents moderate; the y^2 term in T_Q gives a
    # nonlinearity that the rescaling has to kill
    cfg = affine_model(sigma=0.25, lam=20.01, sigma_uu=0.001, sigma_u=0.05).to_config()
    cfg["transitions"]["T_Q"]["y"]["y^2"] = 0.3
    return build_model(cfg)


# ---------------------------------------------------------------------------
# base pair
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("eps,expected", [(1.5, (3, 2)), (0.15, (19, 12)), (0.2, (19, 12))])
def test_base_pair_examples(eps, expected):
    assert select_base_pair(0.5, 3.0, eps) == expected


@pytest.mark.parametrize("eps", [1.5, 0.5, 0.2, 0.15, 0.05])
def test_base_pair_is_first_in_brute_force_scan(eps):
    lo, hi = 1 - eps / 10, 1 + eps / 10
    pairs = exhaustive_band_pairs(0.5, 3.0, lo, hi, 60)
    assert select_base_pair(0.5, 3.0, eps) == min(pairs, key=lambda p: p[1])


def test_convergents_of_log_ratio():
    import math

    head = convergents(math.log(3) / math.log(2), 5)
    assert [(c.numerator, c.denominator) for c in head] == [(1, 1), (2, 1), (3, 2), (8, 5), (19, 12)]


def test_rational_ratio_rejected():
    with pytest.raises(ConfigError) as err:
        select_base_pair(0.5, 2.0, 0.15)
    assert err.value.details["ratio"] == pytest.approx(-1.0)


# ---------------------------------------------------------------------------
# plan
# ---------------------------------------------------------------------------


def test_plan_conditions_by_independent_arithmetic():
    p = select_exponents(affine_model(), DELTA, 0.15)
    assert (p.n_plus - p.n_minus, p.m_plus - p.m_minus) == (19, 12)
    assert p.m_minus % 1 == 0 and p.n_minus >= 1 / 0.15
    with mpmath.workdps(60):
        eps = mpmath.mpf("0.15")
        for n, m in ((p.n_minus, p.m_minus), (p.n_plus, p.m_plus)):
            v = mpmath.exp(n * mpmath.log(mpmath.mpf("0.5")) + m * mpmath.log(3))
            assert abs(v - mpmath.mpf(DELTA)) <= eps
        assert abs(mpmath.exp(p.n_minus * mpmath.log(0.5) + p.m_minus * mpmath.log(3)) - DELTA) <= eps / 10
        assert mpmath.mpf("0.5") ** 19 <= eps
        assert mpmath.mpf(3) ** 12 <= eps ** 2 * min(p.n_minus, p.m_minus)
        assert mpmath.mpf("0.5") ** p.n_minus < mpmath.mpf(p.n_minus) ** -7
    assert all(p.invariants().values())
    assert p.printed_hypo2_holds() is False


def test_plan_json_round_trip():
    p = select_exponents(affine_model(), DELTA, 0.15)
    q = RenormPlan.from_dict(json.loads(json.dumps(p.to_dict())))
    assert q == p


def test_plan_errors():
    with pytest.raises(SearchExhaustedError) as err:
        select_exponents(affine_model(), DELTA, 0.5, cap=30)
    assert err.value.details["required"] > 30
    cfg = affine_model().to_config()
    cfg["transitions"]["T_S"]["y"] = {"y": -1.0}
    with pytest.raises(InfeasibleError):
        select_exponents(build_model(cfg), DELTA, 0.15)
    with pytest.raises(PreconditionError):
        select_exponents(affine_model(strong=False), DELTA, 0.15)
    with pytest.raises(PreconditionError):
        select_exponents(affine_model(), 0.9, 0.15)


# ---------------------------------------------------------------------------
# tuned branches
# ---------------------------------------------------------------------------


def test_tuning_constants_closed_form(tuned):
    plan, _, _ = tuned
    s_y, q_y = tuning_constants(plan)
    with mpmath.workprec(200):
        D = mpmath.mpf(0.5) ** plan.n_minus * mpmath.mpf(3) ** plan.m_minus
        H = mpmath.mpf(0.15) / mpmath.mpf(3) ** plan.m_plus
        assert mpmath.almosteq(s_y, H * (D - 1), 1e-40)
        assert mpmath.almosteq(q_y, -2 * (D - 1) * H * mpmath.mpf(2) ** plan.n_minus, 1e-40)


def test_branch_y_constants(tuned):
    plan, model, pair = tuned
    with mpmath.workprec(200):
        D = plan.delta_pm("-")
        assert mpmath.almosteq(pair.minus.y_constant, -(D - 1), 1e-30)
        plus = (D - 1) * (1 - 2 * mpmath.mpf(0.5) ** 19)
        assert mpmath.almosteq(pair.plus.y_constant, plus, 1e-30)
        for sign, br in (("+", pair.plus), ("-", pair.minus)):
            slope, const = predicted_affine_y(plan, model, sign)
            assert mpmath.almosteq(br.y_slope, slope, 1e-30)
            assert mpmath.almosteq(br.y_constant, const, 1e-30)


def test_affine_model_branches_are_affine(tuned):
    plan, model, pair = tuned
    for br in pair:
        assert cr_distance(br, br.affine_part(), r=3).overall == 0.0
        assert cr_distance(br, br).overall == 0.0
    tg = targets_for(plan, model)
    assert cr_distance(pair.minus, tg["-"]).overall < 1e-12
    # + branch misses its target only through sigma_u^(n+ - n-) in the constant
    dev = cr_distance(pair.plus, tg["+"]).per_order
    assert dev[0] == pytest.approx(0.02799, rel=1e-3)


def test_staged_agrees_with_composed_map(tuned):
    _, _, pair = tuned
    rng = random.Random(5)
    for _ in range(100):
        z = (rng.uniform(-2, 2), rng.uniform(-2, 2))
        for br in pair:
            fx, fy = br.evaluate(z)
            sx, sy = br.evaluate_staged(z)
            assert abs(fx - float(sx)) < 1e-10 and abs(fy - float(sy)) < 1e-10


def test_jets_of_affine_branch(tuned):
    _, _, pair = tuned
    jx, jy = pair.minus.jets((0.3, -0.4), 2)
    assert float(jy.derivative((0, 1))) == pytest.approx(float(pair.minus.y_slope), rel=1e-12)
    assert float(jy.derivative((0, 2))) == 0.0


def test_domain_error_outside_box(tuned):
    from blenderlab.errors import DomainError

    with pytest.raises(DomainError):
        tuned[2].plus.evaluate((2.5, 0.0))


def test_pair_serializes(tuned):
    d = json.loads(json.dumps(tuned[2].to_dict()))
    assert d["plan"]["base_pair"] == [19, 12]


@pytest.fixture(scope="module")
def scaling_runs():
    out = {}
    model = scaling_model()
    for eps in (0.15, 0.075):
        plan, m2 = tune_unfolding(select_exponents(model, 1.2, eps), model)
        pair = renormalize(m2, plan)
        out[eps] = (cr_distance(pair.minus, targets_for(plan, m2)["-"]).overall,
                    cr_distance(pair.plus, pair.plus.affine_part()).overall)
    return out


def test_distance_scales_with_eps(scaling_runs):
    big, small = scaling_runs[0.15], scaling_runs[0.075]
    assert small[0] > 0 and small[1] > 0
    for k in range(2):
        assert 1.5 <= big[k] / small[k] <= 3.0


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


def test_reparametrize_alpha():
    m = affine_model()
    p = select_exponents(m, DELTA, 0.15)
    fam = ModelFamily.constant(m, 3, sigma_u=[0.5, 0.5, 0, 0])
    af = reparametrize_alpha(fam, p)
    assert af.da_dalpha == pytest.approx(1 / (p.delta_minus * p.n_minus), rel=1e-9)
    ident = substitute(af.alpha, [af.inverse])
    assert np.allclose(np.asarray(ident.coeffs, dtype=float), [0, 1, 0, 0], atol=1e-12)
    with pytest.raises(DegenerateError):
        reparametrize_alpha(ModelFamily.constant(m, 3), p)


def test_para_tune_s_y_jet():
    m = affine_model()
    p = select_exponents(m, DELTA, 0.15)
    fam = ModelFamily.constant(m, 3, sigma_u=[0.5, 0.5, 0, 0], lam=[3.0, 1.0, 0, 0])
    af = reparametrize_alpha(fam, p)
    tuned_fam = para_tune(af.family, p)
    D = p.delta_minus
    s = tuned_fam.s_y.coeffs
    lam1 = float(af.family.lam.coeffs[1])
    with mpmath.workprec(200):
        base = mpmath.mpf(0.15) * (p.delta_pm("-") - 1) * mpmath.mpf(3) ** (-p.m_plus)
        assert mpmath.almosteq(s[0], base, 1e-12)
        expect1 = base * (-p.m_plus) * lam1 / 3
        assert mpmath.almosteq(s[1], expect1, 1e-6)
    assert D > 1
    nonzero = ModelFamily.constant(m, 3, s_y=[1e-3, 0, 0, 0])
    with pytest.raises(PreconditionError) as err:
        para_tune(nonzero, p)
    assert err.value.details["offending"][0]["order"] == 0
