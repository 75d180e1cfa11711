import json
import math

import pytest

from blenderlab.chains import (
    ChainModel,
    achieved_order,
    boost_flatness,
    chain_length,
    chain_length_doubling,
    compose_asymptotic,
    fd_derivatives,
    mismatch,
    mismatch_scalar,
    select_flat_pair,
    synthetic_chain,
)
from blenderlab.errors import PreconditionError, SearchExhaustedError

from oracles import fd_derivatives_1d


def brute_force_pair(su, lam, dy, dgamma, tol, cap=100):
    """First (m, n) in lexicographic order with the right sign and |log ratio| <= tol."""
    for m in range(1, cap + 1):
        for n in range(1, 4 * cap):
            v = su ** n * lam ** m * dy
            if v * dgamma > 0 and abs(math.log(v / dgamma)) <= tol:
                return n, m
    return None


def test_selected_pair_matches_brute_force():
    n, m, dist = select_flat_pair(synthetic_chain(), 0.02)
    assert (n, m) == (22, 12) == brute_force_pair(0.5, -3.0, 2.0, 0.25, 0.02)
    assert dist == pytest.approx(abs(math.log(2 * 3 ** 12 / 2 ** 22 / 0.25)), abs=1e-12)


def test_odd_parity_for_negative_gamma():
    rep = boost_flatness(synthetic_chain(dgamma=-0.25))
    assert (rep.n, rep.m) == brute_force_pair(0.5, -3.0, 2.0, -0.25, 0.02) == (68, 41)
    assert rep.parity == "odd"


def test_flatness_boost_d0():
    rep = boost_flatness(synthetic_chain())
    assert (rep.n, rep.m, rep.parity) == (22, 12, "even")
    eta = rep.eta_after.derivatives()
    assert abs(eta[0]) <= 1e-12 and abs(eta[1]) <= 0.02
    # pointwise route: finite differences of the scalar mismatch
    fd = fd_derivatives_1d(lambda a: mismatch_scalar(rep.chain, rep.n, rep.m, float(a)), 0.0, 1, h=1e-4)
    assert fd[0] == pytest.approx(float(eta[0]), abs=1e-12)
    assert fd[1] == pytest.approx(float(eta[1]), rel=1e-5)
    assert rep.achieved_order == 1


def test_flatness_boost_d1_confirmed_by_fd():
    rep = boost_flatness(synthetic_chain(d=1))
    eta = rep.eta_after.derivatives()
    fd = fd_derivatives(lambda a: mismatch_scalar(rep.chain, rep.n, rep.m, a), 2)
    for k in range(3):
        assert fd[k] == pytest.approx(float(eta[k]), rel=1e-4, abs=1e-9)
    assert rep.achieved_order == 2


def test_mismatch_jet_matches_scalar_before_translation():
    ch = synthetic_chain(T_extra={"y": {"x*y": 0.3, "y^2": -0.2}})
    jet = mismatch(ch, 22, 12).derivatives()
    fd = fd_derivatives(lambda a: mismatch_scalar(ch, 22, 12, a), 1)
    assert fd[0] == pytest.approx(float(jet[0]), rel=1e-12, abs=1e-15)
    assert fd[1] == pytest.approx(float(jet[1]), rel=1e-5)


def test_leading_term_prediction():
    rep = compose_asymptotic(synthetic_chain(), 22, 12)
    assert rep.deviation < 1e-12
    with pytest.raises(PreconditionError):
        compose_asymptotic(synthetic_chain(), 1, 12)


def test_full_translation_kills_everything():
    rep = boost_flatness(synthetic_chain(), full_translation=True)
    assert all(abs(float(v)) < 1e-15 for v in rep.eta_after.derivatives())


def test_preconditions():
    with pytest.raises(PreconditionError):
        boost_flatness(synthetic_chain(lam=3.0))
    with pytest.raises(PreconditionError):
        boost_flatness(synthetic_chain(dgamma=0.0))
    with pytest.raises(PreconditionError):
        boost_flatness(synthetic_chain(sigma_u=1 / 9))
    with pytest.raises(SearchExhaustedError):
        select_flat_pair(synthetic_chain(), tol=1e-9, cap=20)


def test_chain_model_round_trip():
    ch = synthetic_chain(d=1)
    back = ChainModel.from_dict(json.loads(json.dumps(ch.to_dict())))
    assert back.to_dict() == ch.to_dict()
    assert boost_flatness(back).to_dict() == boost_flatness(ch).to_dict()


def test_achieved_order():
    from blenderlab.numerics import Jet
    import numpy as np

    assert achieved_order(Jet(np.array([0.0, 0.01, 0.5]), 1, 2), 0.02) == 1
    assert achieved_order(Jet(np.array([0.1, 0.0]), 1, 1), 0.02) == -1


@pytest.mark.parametrize("r,k,expected", [(1, 1, 1), (2, 1, 2), (2, 2, 5), (3, 2, 9)])
def test_chain_length(r, k, expected):
    assert chain_length(r, k) == expected


def test_chain_length_doubling():
    assert [chain_length_doubling(d) for d in range(4)] == [1, 2, 4, 8]
    with pytest.raises(ValueError):
        chain_length(1, 0)
