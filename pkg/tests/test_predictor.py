import math

import mpmath as mp
import numpy as np
import pytest

from zwverify.geometry import SurfaceScenario
from zwverify.predictor import (
    a0_constant,
    decompose_check,
    h1_volume,
    integral_terms,
    predict,
    predict_a0_corollary,
    quillen_poly,
    single_step,
)

SPHERE = SurfaceScenario(0)
TORI = [SurfaceScenario(1, 1j), SurfaceScenario(1, 0.3 + 1.2j)]


def test_a0_constant():
    with mp.workdps(30):
        ref = mp.zeta(-1, 1, 1) + mp.log(2 * mp.pi) / 12 + mp.mpf(7) / 24
    assert abs(a0_constant() - float(ref)) < 1e-15


def test_round_sphere_coefficients():
    c = predict(SPHERE)
    assert abs(c.a2 + 0.5) < 1e-10
    assert c.b1 == -0.5
    assert abs(c.b0 + 2 / 3) < 1e-15
    # a1 = -log(2pi)/2 - 1
    assert abs(c.a1 - (-0.5 * math.log(2 * math.pi) - 1)) < 1e-10
    assert c.a0 is not None and c.errors["a0"] < 1e-8


def test_torus_b0_vanishes():
    for s in TORI:
        c = predict(s)
        assert c.b0 == 0 and c.b1 == -0.5


@pytest.mark.parametrize("s", [SPHERE] + TORI)
def test_corollary_matches_general_constant_term(s):
    assert abs(predict(s).a0 - predict_a0_corollary(s)) < 1e-12


@pytest.mark.parametrize("s", TORI)
def test_h1_volume_routes(s):
    a = h1_volume(s, "quadrature")
    b = h1_volume(s, "dolbeault")
    assert abs(a - b) < 1e-13
    assert abs(b - 1 / (2 * math.pi)) < 1e-14
    with pytest.raises(ValueError):
        h1_volume(s, "other")


def test_h1_volume_genus_zero():
    assert h1_volume(SPHERE) == 1.0


@pytest.mark.parametrize("s", [SPHERE, TORI[1], SurfaceScenario(0, psi=((1, 0, 0.1),))])
def test_normalisation_covariance(s):
    rng = np.random.default_rng(2)
    c0, cL, cE = (complex(*rng.uniform(0.3, 2.0, 2)) for _ in range(3))
    base = predict(s, with_a0=s.prequantized)
    moved = predict(s.with_scalars(c0, cL, cE), with_a0=s.prequantized)
    lL, lE, l0 = (math.log(abs(c) ** 2) for c in (cL, cE, c0))
    assert abs(moved.a2 - base.a2 - 0.5 * lL) < 1e-12
    assert abs(moved.a1 - base.a1 - (lE + 0.5 * lL)) < 1e-12
    assert moved.b1 == base.b1 and moved.b0 == base.b0
    if s.prequantized:
        assert abs(moved.a0 - base.a0 - l0) < 1e-12


def test_quillen_polynomial_is_sum_of_steps():
    for s in (SPHERE, TORI[1]):
        for p in (1, 5, 12):
            total = sum(single_step(s, i) for i in range(1, p + 1))
            assert abs(total - quillen_poly(s, p)) < 1e-10 * max(1, abs(total))


def test_perturbed_metric_has_no_constant_term():
    s = SurfaceScenario(0, psi=((1, 0, 0.1),))
    c = predict(s)
    assert c.a0 is None
    with pytest.raises(ValueError):
        predict(s, with_a0=True)
    with pytest.raises(ValueError):
        predict_a0_corollary(s)


def test_perturbed_metric_uses_rL_term():
    s = SurfaceScenario(0, psi=((1, 0, 0.1), (2, 1, 0.05)))
    it = integral_terms(s)
    assert abs(it.int_rL_c1L) > 1e-4
    c = predict(s)
    assert c.terms["int_rL_c1L"] == it.int_rL_c1L
    assert c.errors["a2"] < 1e-10 and c.errors["a1"] < 1e-8


def test_non_positive_curvature_rejected():
    with pytest.raises(ValueError, match="positive"):
        predict(SurfaceScenario(0, psi=((3, 0, 2.0),)))


@pytest.mark.parametrize("s", TORI)
@pytest.mark.parametrize("p", [1, 4])
def test_decomposition_residual(s, p):
    r = decompose_check(s, p)
    assert abs(r["residual"]) < 1e-8
    assert r["error"] < 1e-8


def test_decomposition_needs_flat_torus():
    with pytest.raises(ValueError):
        decompose_check(SPHERE, 2)
