import json
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blenderlab.blender import (
    LCG,
    CoveringCertificate,
    JetBox,
    grid_free_covered,
    grid_oracle_covered,
    ifs_attract,
    jet_map,
    jet_preimage,
    recheck,
    verify_blender_1d,
    verify_blender_2d,
    verify_parablender_jets,
)
from blenderlab.dynamics.poly import PolyMap
from blenderlab.errors import PreconditionError
from blenderlab.numerics import Box2


# ---------------------------------------------------------------------------
# one dimension
# ---------------------------------------------------------------------------


def sampled_gap(Delta: float, samples: int = 20001):
    """A point of [-1, 1] missed by both inverse images, found by sampling."""
    for y in np.linspace(-1, 1, samples):
        up = Delta * (y - 1) + 1
        down = Delta * (y + 1) - 1
        if abs(up) > 1 and abs(down) > 1:
            return y
    return None


@pytest.mark.parametrize("Delta,margin,covered", [(1.5, 1 / 3, True), (2.0, 0.0, True), (2.5, -0.2, False)])
def test_covering_law_examples(Delta, margin, covered):
    cert = verify_blender_1d(Delta)
    assert cert.covered is covered
    assert cert.margin == pytest.approx(margin, abs=1e-12)
    assert recheck(cert)


@given(st.floats(1.01, 2.99))
def test_covering_law_against_sampling(Delta):
    cert = verify_blender_1d(Delta)
    assert cert.covered == (Delta <= 2)
    assert abs(cert.margin - (2 / Delta - 1)) < 1e-12
    if Delta > 2.0005:
        assert sampled_gap(Delta) is not None
        w = cert.witness[0]
        assert abs(Delta * (w - 1) + 1) > 1 and abs(Delta * (w + 1) - 1) > 1
    elif Delta < 2:
        assert sampled_gap(Delta) is None


def test_robust_requirement():
    delta = 0.01
    cert = verify_blender_1d(1.5, delta=delta)
    assert cert.requirement == pytest.approx(delta * (1 + 1 / 0.5))
    assert cert.robust
    assert not verify_blender_1d(1.99, delta=delta).robust


def test_eta_shrinks_target():
    cert = verify_blender_1d(1.5, eta=0.2)
    assert cert.target.lo == pytest.approx(-0.8) and cert.covered


def test_bad_inputs():
    with pytest.raises(PreconditionError):
        verify_blender_1d(1.0)
    with pytest.raises(PreconditionError):
        verify_blender_1d(1.5, delta=-1)


def test_certificate_json_round_trip():
    for cert in (verify_blender_1d(1.5), verify_blender_1d(2.5)):
        back = CoveringCertificate.from_dict(json.loads(json.dumps(cert.to_dict())))
        assert back.to_dict() == cert.to_dict()
        assert recheck(back)


def test_recheck_rejects_tampered_margin():
    cert = verify_blender_1d(1.5)
    d = cert.to_dict()
    d["margin"] = 0.5
    assert not recheck(CoveringCertificate.from_dict(d))


# ---------------------------------------------------------------------------
# two dimensions
# ---------------------------------------------------------------------------


def affine_pair(D, eps=0.0):
    plus = PolyMap.from_tables({"1": 0.5}, {"1": D - 1, "y": D, "x*y": eps})
    minus = PolyMap.from_tables({"1": 0.5}, {"1": -(D - 1), "y": D, "y^2": eps})
    return plus, minus


def test_two_dimensional_reduction():
    act = Box2.from_bounds(-1, 1, -1, 1)
    cert = verify_blender_2d(affine_pair(1.5), act, 1e-9)
    assert cert.covered and cert.margin == pytest.approx(1 / 3)
    assert recheck(cert)
    # the nonlinear terms are bounded on the whole branch domain [-2, 2]^2
    cert = verify_blender_2d(affine_pair(1.5, 0.01), act, 0.1)
    assert cert.constants["remainder+"] >= 0.04 and not cert.covered
    cert = verify_blender_2d(affine_pair(1.5, 0.01), Box2.from_bounds(-1, 1, -0.9, 0.9), 0.1)
    assert cert.covered and cert.margin < 1 / 3 and recheck(cert)


def test_two_dimensional_gap_and_precondition():
    act = Box2.from_bounds(-1, 1, -1, 1)
    cert = verify_blender_2d(affine_pair(2.5), act, 1e-9)
    assert not cert.covered and recheck(cert)
    with pytest.raises(PreconditionError):
        verify_blender_2d(affine_pair(1.5, 0.2), act, 0.01)


# ---------------------------------------------------------------------------
# jets
# ---------------------------------------------------------------------------


def test_jet_map_inverse():
    D = Fraction(3, 2)
    z = [Fraction(1, 3), Fraction(-2, 7), Fraction(5, 11)]
    for s in "+-":
        assert jet_map(D, s, jet_preimage(D, s, z)) == z


@pytest.mark.parametrize("r", [1, 2, 3])
def test_sufficient_box_certified(r):
    box = JetBox.sufficient(1.5, 0.4, r)
    assert float(box.B[0]) == pytest.approx(0.8)
    cert = verify_parablender_jets(1.5, r, 0.0, box)
    assert cert.covered and cert.margin > 0
    assert recheck(cert)


@pytest.mark.parametrize("r,k", [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)])
def test_shrunk_box_gap_confirmed_by_grid(r, k):
    box = JetBox.sufficient(1.5, 0.4, r).scaled(k, Fraction(1, 2))
    cert = verify_parablender_jets(1.5, r, 0.0, box)
    assert not cert.covered
    assert box.contains(cert.witness)
    assert not grid_oracle_covered(1.5, box, cert.witness)
    assert recheck(cert)


def test_grid_oracle_sees_covered_points():
    box = JetBox.sufficient(1.5, 0.4, 2)
    rng = random.Random(7)
    for _ in range(10):
        z = [rng.uniform(-float(w), float(w)) for w in box.half_widths]
        assert grid_oracle_covered(1.5, box, z, samples=2000)
        assert grid_free_covered(1.5, box, z)


def test_jet_box_validation():
    with pytest.raises(PreconditionError):
        JetBox(0, (1,))
    with pytest.raises(PreconditionError):
        verify_parablender_jets(1.5, 2, 0.0, JetBox.sufficient(1.5, 0.4, 1))


# ---------------------------------------------------------------------------
# chaos game
# ---------------------------------------------------------------------------


def test_lcg_sequence():
    g = LCG(0)
    assert [g.next() for _ in range(3)] == [1013904223, 1196435762, 3519870697]


def test_ifs_deterministic_and_in_interval():
    maps = [(0.5, 0.5), (0.5, -0.5)]
    a = ifs_attract(maps, 2000, seed=1)
    b = ifs_attract(maps, 2000, seed=1)
    assert a.shape == (1980, 1) and np.array_equal(a, b)
    assert np.all(np.abs(a) <= 1 + 1e-12)
    assert not np.array_equal(a, ifs_attract(maps, 2000, seed=2))


def test_ifs_two_dimensional_and_rejects_expansion():
    f = PolyMap.from_tables({"x": 0.5}, {"y": 0.4, "1": 0.1})
    pts = ifs_attract([f], 200, seed=3)
    assert np.allclose(pts[-1], [0.0, 0.1 / 0.6], atol=1e-12)
    with pytest.raises(PreconditionError):
        ifs_attract([(1.5, 0.0)], 100, seed=0)


@settings(max_examples=20)
@given(st.integers(0, 2 ** 32 - 1))
def test_lcg_index_in_range(seed):
    g = LCG(seed)
    assert all(0 <= g.index(3) < 3 for _ in range(20))
