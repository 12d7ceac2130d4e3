import math

import numpy as np
import pytest

from zwverify.geometry import (
    SurfaceScenario,
    build_scenario,
    curvature_fields,
    integrate,
    integrate_log_sD,
    log_sD,
    poincare_lelong_residual,
    quadrature,
)

SPHERE = SurfaceScenario(0)
TORUS = SurfaceScenario(1, 1j)
TORUS_SKEW = SurfaceScenario(1, 0.3 + 1.2j)
SPHERE_PERT = SurfaceScenario(0, psi=((1, 0, 0.1), (2, 1, 0.05)), u=((2, 0, 0.08),))
TORUS_PERT = SurfaceScenario(1, 0.3 + 1.2j, psi=((1, 0, 0.1, 0.0), (0, 1, 0.0, 0.05)), u=((1, 1, 0.05, 0.02),))

ALL = [SPHERE, TORUS, TORUS_SKEW, SPHERE_PERT, TORUS_PERT]


@pytest.mark.parametrize("s", ALL)
def test_volume_is_degree_over_two_pi(s):
    g = quadrature(s, level=1, degree=1)
    assert abs(float(np.sum(g.dv)) - 1 / (2 * math.pi)) < 1e-12


@pytest.mark.parametrize("s", ALL)
def test_degrees_of_curvature_forms(s):
    g = quadrature(s, level=1, degree=1)
    assert abs(integrate(g, s.c1L_density(g.x1, g.x2)) - 1) < 1e-12
    # Gauss-Bonnet
    assert abs(integrate(g, s.c1TX_density(g.x1, g.x2)) - s.euler_characteristic) < 1e-12


def test_prequantised_has_vanishing_rL():
    for s in (SPHERE, TORUS):
        g = quadrature(s, level=0, degree=1)
        assert np.max(np.abs(s.rL(g.x1, g.x2))) < 1e-14
    g = quadrature(SPHERE_PERT, level=0, degree=1)
    assert np.max(np.abs(SPHERE_PERT.rL(g.x1, g.x2))) > 1e-3


def test_round_sphere_log_integrals():
    # |s_D|^2 = (1 + cos theta)/2 against the uniform measure integrates to -1
    v, err = integrate_log_sD(SPHERE, SPHERE.c1L_density)
    assert abs(v + 1) < 1e-10 and err < 1e-10
    v, _ = integrate_log_sD(SPHERE, SPHERE.c1TX_density)
    assert abs(v + 2) < 1e-10


@pytest.mark.parametrize("s", ALL)
def test_poincare_lelong(s):
    modes = ((1, 0, 1.0), (2, -1, 0.5)) if s.genus == 0 else ((1, 0, 1.0, 0.3), (1, 2, 0.0, 0.5))
    assert poincare_lelong_residual(s, modes) < 1e-8


def test_log_sD_vanishing_order():
    # log|s_D|^2 behaves like log(distance^2) near D
    x1 = np.array([-1 + 1e-6, -1 + 1e-8])
    v = log_sD(SPHERE, x1, np.zeros(2))
    assert abs((v[0] - v[1]) - math.log(100)) < 1e-6


def test_curvature_fields_agree_with_scenario():
    f = curvature_fields(SPHERE_PERT)
    x1, x2 = np.array([0.2, -0.4]), np.array([1.0, 2.5])
    assert np.allclose(f.c1L(x1, x2), SPHERE_PERT.c1L_density(x1, x2))
    assert np.allclose(f.log_hL(x1, x2), -SPHERE_PERT.psi_at(x1, x2))


def test_with_scalars_changes_only_scalars():
    s = TORUS_SKEW.with_scalars(sDL=2.0)
    assert s.sDL == 2.0 and s.tau == TORUS_SKEW.tau and s.s0 == TORUS_SKEW.s0
    assert abs(s.log_norm_sDL() - TORUS_SKEW.log_norm_sDL() - math.log(4)) < 1e-15


class TestBuildScenario:
    def test_string_and_pair_forms(self):
        a = build_scenario({"genus": 1, "tau": "0.3+1.2i"})
        b = build_scenario({"genus": 1, "tau": [0.3, 1.2]})
        assert a == b

    def test_sphere_ignores_tau(self):
        assert build_scenario({"genus": 0, "tau": [0, -1]}).genus == 0

    @pytest.mark.parametrize(
        "cfg, msg",
        [
            ({"genus": 2}, "genus"),
            ({"genus": 1, "tau": [0.1, -1.0]}, "Im tau"),
            ({"genus": 1, "tau": [0.0, 0.0]}, "Im tau"),
            ({"genus": 0, "psi": [[1, 0]]}, "entries"),
            ({"genus": 0, "psi": [[3, 0, 2.0]]}, "non-positive"),
            ({"genus": 0, "sDL": 0}, "nonzero"),
            ({"genus": 1, "tau": [0, 1], "u": [[1, 0, 1.0]]}, "entries"),
        ],
    )
    def test_invalid(self, cfg, msg):
        with pytest.raises(ValueError, match=msg):
            build_scenario(cfg)
