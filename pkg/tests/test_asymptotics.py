from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zwverify.asymptotics import (
    FitError,
    FitModel,
    difference_extract,
    fit,
    pinned_values,
    series_from,
)
from zwverify.geometry import SurfaceScenario
from zwverify.partition import log_partition
from zwverify.predictor import predict

TRUE = {"a2": -0.7, "b1": -0.5, "a1": 1.3, "b0": -2 / 3, "a0": 0.25}


def synthetic(ps, coeffs=TRUE, n1=0.0, n2=0.0):
    with mp.workdps(60):
        out = []
        for p in ps:
            P = mp.mpf(p)
            L = mp.log(P)
            v = coeffs["a2"] * P**2 + coeffs["b1"] * P * L + coeffs["a1"] * P + coeffs["b0"] * L + coeffs["a0"]
            v += n1 * L / P + n2 / P
            out.append((p, v, 1e-30))
        return out


def test_exact_model_recovered():
    r = fit(synthetic(range(8, 41)), FitModel(nuisance=()))
    for k, v in TRUE.items():
        assert abs(r.values[k] - v) < 1e-10
    assert r.protocol == "free"
    assert not r.budget_exceeded


def test_nuisance_terms_recovered():
    r = fit(synthetic(range(8, 65), n1=0.8, n2=-1.1))
    for k, v in TRUE.items():
        assert abs(r.values[k] - v) < 1e-4
    assert abs(r.values["n_logp_p"] - 0.8) < 1e-4
    assert abs(r.values["n_inv_p"] + 1.1) < 1e-4


def test_unmodelled_tail_bias_decays_and_is_flagged():
    # an O(1/p^2) tail lies outside the basis: the fit must say so, and the
    # bias must fall off quickly as the window moves to larger p
    bias = []
    for lo, hi in ((8, 64), (16, 128)):
        data = [(p, v + mp.mpf(3) / p**2, e) for p, v, e in synthetic(range(lo, hi + 1))]
        r = fit(data)
        assert r.budget_exceeded
        bias.append(abs(r.values["b1"] - TRUE["b1"]))
    assert bias[1] < bias[0] / 4


def test_difference_extractor_recovers_synthetic():
    r = difference_extract(synthetic(range(8, 65), n1=0.3, n2=0.2))
    for k, v in TRUE.items():
        assert abs(r.values[k] - v) < 1e-4


def test_pinning_correct_value_gives_smaller_residual():
    data = synthetic(range(8, 49), n1=0.4)
    right = fit(data, FitModel(pinned=pinned_values(2)))
    wrong = fit(data, FitModel(pinned={"b1": Fraction(-1, 2), "b0": Fraction(0)}))
    assert right.residual < 1e-6 * wrong.residual
    assert right.protocol == "pinned"
    assert right.values["b0"] == pytest.approx(-2 / 3, abs=1e-15)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_noise_response_bounded_by_amplification(seed):
    rng = np.random.default_rng(seed)
    ps = list(range(8, 41))
    base = synthetic(ps)
    eps = 1e-8
    noisy = [(p, v + eps * rng.uniform(-1, 1), e) for p, v, e in base]
    for extractor in (fit, difference_extract):
        r0 = extractor(base, FitModel(weights="uniform")) if extractor is fit else extractor(base)
        r1 = extractor(noisy, FitModel(weights="uniform")) if extractor is fit else extractor(noisy)
        for k in TRUE:
            assert abs(r1.values[k] - r0.values[k]) <= r0.amplification * eps * (1 + 1e-9)


def test_stability_reported():
    r = fit(synthetic(range(8, 65), n1=0.3))
    assert set(r.stability) == set(FitModel().free)
    assert max(r.stability.values()) < 1e-6


class TestErrors:
    def test_too_few_points(self):
        with pytest.raises(FitError):
            fit(synthetic(range(8, 14)))

    def test_duplicates(self):
        data = synthetic(range(8, 30))
        with pytest.raises(FitError, match="duplicate"):
            fit(data + data[:1])

    def test_gaps_rejected_by_difference_extractor(self):
        with pytest.raises(FitError, match="consecutive"):
            difference_extract(synthetic(range(8, 60, 2)))

    def test_unknown_names(self):
        with pytest.raises(ValueError):
            FitModel(nuisance=("n_p2",))
        with pytest.raises(ValueError):
            FitModel(pinned={"c7": 1})

    def test_inverse_weights_need_errors(self):
        data = [(p, v, 0.0) for p, v, _ in synthetic(range(8, 30))]
        with pytest.raises(FitError):
            fit(data, FitModel(weights="inverse"))


def test_series_forms_agree():
    a = series_from([(9, "1.5", 1e-3), (8, 2.0)])
    b = series_from([{"p": "8", "log_Z": "2.0"}, {"p": 9, "log_Z": "1.5", "est_error": "1e-3"}])
    assert a == b
    assert [r[0] for r in a] == [8, 9]


def test_round_sphere_series():
    s = SurfaceScenario(0)
    data = [log_partition(s, p) for p in range(8, 65)]
    free = fit(data)
    assert abs(free.values["b1"] + 0.5) < 1e-3
    assert abs(free.values["b0"] + 2 / 3) < 5e-2
    pinned = fit(data, FitModel(pinned=pinned_values(2)))
    pred = predict(s)
    assert abs(pinned.values["a2"] / pred.a2 - 1) < 1e-5
    assert abs(pinned.values["a1"] / pred.a1 - 1) < 1e-4
    d = difference_extract(data)
    assert abs(d.values["a2"] - free.values["a2"]) < 1e-5


def test_series_keeps_extended_precision():
    with mp.workdps(50):
        v = mp.mpf(1) / 3
    (row,) = series_from([(8, v)])
    with mp.workdps(50):
        assert abs(row[1] - v) < mp.mpf(10) ** -45
