import math

import mpmath as mp
import numpy as np
import pytest

from zwverify import torsion as T
from zwverify.geometry import SurfaceScenario
from zwverify.torsion import (
    dedekind_eta,
    landau_coeff_check,
    flat_torus_model,
    heat_area_constant,
    landau_lattice_levels,
    landau_model,
    sphere_model,
    squares_model,
    torsion_Lp_flat_torus,
    torsion_trivial_E,
    zeta_prime_at_zero,
)


def test_squares_model_mellin():
    # zeta(s) = zeta_R(2s) so zeta'(0) = 2 zeta_R'(0) = -log 2pi
    v, err = zeta_prime_at_zero(squares_model())
    assert abs(v + math.log(2 * math.pi)) < 1e-9
    assert err < 1e-8


def test_unit_sphere_log_det():
    # eigenvalues k(k+1): log det = 1/2 - 4 zeta_R'(-1)
    with mp.workdps(40):
        zp, z0 = T._sphere_zeta_prime_hurwitz(1.0)
        assert abs(z0 + mp.mpf(2) / 3) < 1e-25
        assert abs(zp - (4 * mp.zeta(-1, 1, 1) - mp.mpf(1) / 2)) < 1e-25


def test_dedekind_eta_at_i():
    with mp.workdps(40):
        ref = mp.gamma(mp.mpf(1) / 4) / (2 * mp.pi ** (mp.mpf(3) / 4))
        assert abs(abs(dedekind_eta(1j)) - ref) < 1e-25


def test_dedekind_eta_modular():
    # tau and -1/tau are both exact binary fractions
    with mp.workdps(40):
        tau = mp.mpc(1, 1)
        lhs = dedekind_eta(-1 / tau)
        rhs = mp.sqrt(-1j * tau) * dedekind_eta(tau)
        assert abs(lhs - rhs) < 1e-25


@pytest.mark.parametrize("model", [sphere_model(), flat_torus_model(1j), flat_torus_model(0.3 + 1.2j)], ids=["sphere", "square", "skew"])
def test_closed_form_and_mellin_agree(model):
    if model.label == "sphere":
        closed = float(T._sphere_zeta_prime_hurwitz(model.scale)[0])
    else:
        tau = 1j if model.scale == pytest.approx(2 * math.pi**2) else 0.3 + 1.2j
        closed = float(T._torus_zeta_prime_kronecker(tau))
    v, err = zeta_prime_at_zero(model)
    assert abs(v - closed) < 1e-9
    assert err < 1e-8


@pytest.mark.parametrize("lam", [0.5, 3.0, 17.0])
def test_scaling_law(lam):
    # zeta'_{lam A}(0) = zeta'_A(0) - zeta_A(0) log lam
    base = sphere_model()
    v0, _ = zeta_prime_at_zero(base)
    v1, _ = zeta_prime_at_zero(base.scaled(lam))
    assert abs(v1 - (v0 - base.zeta0 * math.log(lam))) < 1e-8
    assert abs(base.scaled(lam).zeta0 - base.zeta0) < 1e-12


@pytest.mark.parametrize("model", [sphere_model(), flat_torus_model(0.3 + 1.2j), landau_model(5)], ids=["sphere", "torus", "landau"])
def test_heat_expansion_matches_trace(model):
    t = 0.05 / model.scale
    assert abs(model.heat_trace(t) - model.heat_expansion(t)) < 1e-8 * abs(model.heat_trace(t))
    assert abs(model.zeta0 - model.zeta0_exact) < 1e-12


@pytest.mark.parametrize("model", [sphere_model(), flat_torus_model(1j), flat_torus_model(-0.45 + 0.9j)], ids=["sphere", "square", "skew"])
def test_heat_area_fixes_normalisation(model):
    # rank / 2pi for a mass-one Kahler form
    vals = [heat_area_constant(model, t) for t in (1e-3, 5e-4)]
    assert abs(vals[1] - 1 / (2 * math.pi)) < 2e-3
    assert abs(vals[1] - 1 / (2 * math.pi)) < abs(vals[0] - 1 / (2 * math.pi)) + 1e-12


@pytest.mark.parametrize("s", [SurfaceScenario(0), SurfaceScenario(1, 1j), SurfaceScenario(1, 0.3 + 1.2j)])
def test_trivial_bundle_torsion_routes(s):
    tv = torsion_trivial_E(s)
    routes = list(tv.routes.values())
    assert len(routes) == 2
    assert abs(routes[0] - routes[1]) < 1e-9
    assert tv.error < 1e-8
    js = tv.to_json()
    assert set(js) >= {"surface", "tau", "p", "value", "method", "error"}


def test_trivial_bundle_torsion_rejects_perturbed_metric():
    with pytest.raises(ValueError):
        torsion_trivial_E(SurfaceScenario(0, u=((2, 0, 0.1),)))


@pytest.mark.parametrize("p", [1, 2, 7, 64])
def test_landau_torsion_closed_form(p):
    tv = torsion_Lp_flat_torus(1j, p)
    assert abs(tv.two_tau - 0.5 * p * math.log(p)) < 1e-20 + 1e-14 * p


@pytest.mark.parametrize("p", [1, 3, 10])
def test_landau_torsion_mellin_route(p):
    tv = torsion_Lp_flat_torus(0.3 + 1.2j, p, check=True)
    assert abs(tv.routes["mellin"] - tv.routes["riemann"]) < 1e-9 * max(1, p)


def test_landau_lattice_levels_degenerate_and_equally_spaced():
    for p in (2, 3):
        lv, _ = landau_lattice_levels(p, n_grid=24, n_levels=2)
        lv = np.asarray(lv)
        # lowest level: exact p-fold degeneracy
        assert np.max(lv[:p]) < 1e-9 * (2 * math.pi * p)
        # next level near 2 pi p with discretisation error O(h^2)
        assert np.allclose(lv[p:], 2 * math.pi * p, rtol=0.05)


def test_landau_coefficients():
    c = landau_coeff_check(1j)
    assert abs(c["c1"] - 0.5) < 1e-10
    assert abs(c["c0"]) < 1e-9
    assert abs(c["d0"]) < 1e-9
