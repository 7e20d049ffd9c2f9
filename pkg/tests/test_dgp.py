import math

import numpy as np
import pytest

from tramdag import dgp
from tramdag.errors import (
    EmptySampleError,
    MissingValueError,
    UnknownPresetError,
    UnsupportedPresetError,
    UnsupportedQueryError,
)
from tramdag.graph import parse_dag_spec
from tramdag.transform import sample_discrete

OBS = np.array([2.00, 1.50, 0.81, -0.28])


@pytest.mark.parametrize("preset", dgp.PRESETS)
def test_generate_deterministic(preset):
    a = dgp.generate(preset, 50, seed=1)
    b = dgp.generate(preset, 50, seed=1)
    c = dgp.generate(preset, 50, seed=2)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert a.names == dgp.preset_names(preset)


@pytest.mark.parametrize("preset", dgp.PRESETS)
def test_spec_text_matches_preset(preset):
    spec = parse_dag_spec(dgp.default_spec_text(preset))
    assert list(spec.names) == dgp.preset_names(preset)
    assert [n.is_discrete for n in spec.nodes] == dgp.preset_discrete(preset)


def test_tram_presets_reconstruct_from_noise():
    data, noise = dgp.generate("cont_ls", 300, seed=5, return_noise=True)
    x1, x2, x3 = data.values.T
    np.testing.assert_allclose(x1, noise[:, 0] / 2.0, atol=1e-12)
    np.testing.assert_allclose(x2, (noise[:, 1] - 2.0 * x1) / 2.0, atol=1e-12)
    s3 = -0.2 * x1 + 0.3 * x2
    np.testing.assert_allclose(x3, (noise[:, 2] - s3) / 2.0, atol=1e-12)


def test_mixed_preset_reconstructs_from_noise():
    data, noise = dgp.generate("mixed_ls", 300, seed=6, return_noise=True)
    x1, x2, x3 = data.values.T
    assert set(np.unique(x3)) <= {1.0, 2.0, 3.0, 4.0}
    s3 = dgp.MIXED_BETA13 * x1 + dgp.MIXED_BETA23 * x2
    redrawn = sample_discrete(np.array(dgp.ORDINAL_CUTS), s3, noise[:, 2])
    np.testing.assert_array_equal(x3, redrawn.astype(np.float64))


def test_carefl_reconstructs_from_noise():
    data, noise = dgp.generate("carefl", 300, seed=7, return_noise=True)
    x1, x2, x3, x4 = data.values.T
    np.testing.assert_allclose(x3 - x1 - 0.5 * x2**3, noise[:, 2], atol=1e-12)
    np.testing.assert_allclose(x4 + x2 - 0.5 * x1**2, noise[:, 3], atol=1e-12)


def test_carefl_marginal_moments():
    data = dgp.generate("carefl", 100_000, seed=8)
    x1 = data.column("X1")
    assert abs(x1.mean()) <= 3.0 / math.sqrt(len(x1))
    assert x1.var() == pytest.approx(1.0, abs=0.05)  # Laplace(0, 1/sqrt(2))


def test_vaca_mixture_moments():
    data = dgp.generate("vaca", 40_000, seed=9)
    x1 = data.column("X1")
    assert x1.mean() == pytest.approx(-0.25, abs=0.04)
    assert x1.var() == pytest.approx(4.3125, abs=0.1)
    x2 = data.column("X2")
    assert (x1 + x2).var() == pytest.approx(1.0, abs=0.03)  # X2 = -X1 + N(0,1)


def test_logistic_noise_moments():
    _, noise = dgp.generate("cont_ls", 40_000, seed=10, return_noise=True)
    u = noise[:, 2]
    assert u.mean() == pytest.approx(0.0, abs=0.04)
    assert u.var() == pytest.approx(math.pi**2 / 3.0, abs=0.15)


def test_do_pins_and_replays_noise():
    base = dgp.generate("cont_ls", 100, seed=11)
    done = dgp.generate("cont_ls", 100, seed=11, do={"X2": -3.0})
    np.testing.assert_array_equal(done.column("X1"), base.column("X1"))
    assert np.all(done.column("X2") == -3.0)
    assert not np.array_equal(done.column("X3"), base.column("X3"))


def test_shift_intervention():
    base = dgp.generate("mixed_ls", 200, seed=12)
    shifted = dgp.generate("mixed_ls", 200, seed=12, shift={"X1": 1.0})
    np.testing.assert_allclose(shifted.column("X1"), base.column("X1") + 1.0, atol=1e-12)
    assert not np.array_equal(shifted.column("X3"), base.column("X3"))


def test_do_overrides_shift():
    s = dgp.generate("cont_ls", 50, seed=13, do={"X2": 0.5}, shift={"X2": 9.0})
    assert np.all(s.column("X2") == 0.5)


def test_mixed_beta13_override():
    base = dgp.generate("mixed_ls", 200, seed=14)
    alt = dgp.generate("mixed_ls", 200, seed=14, mixed_beta13=dgp.MIXED_BETA13_ALT)
    np.testing.assert_array_equal(alt.column("X1"), base.column("X1"))
    np.testing.assert_array_equal(alt.column("X2"), base.column("X2"))
    assert not np.array_equal(alt.column("X3"), base.column("X3"))


def test_generate_rejections():
    with pytest.raises(UnknownPresetError):
        dgp.generate("nope", 10, seed=0)
    with pytest.raises(EmptySampleError):
        dgp.generate("vaca", 0, seed=0)
    with pytest.raises(MissingValueError):
        dgp.generate("vaca", 10, seed=0, do={"X9": 1.0})


def test_true_linear_coefficients():
    assert dgp.true_linear_coefficients("cont_ls") == {
        ("X1", "X2"): 2.0,
        ("X1", "X3"): -0.2,
        ("X2", "X3"): 0.3,
    }
    assert dgp.true_linear_coefficients("mixed_ls")[("X1", "X3")] == 2.0
    with pytest.raises(UnsupportedQueryError):
        dgp.true_linear_coefficients("vaca")


def test_true_shift_function_values():
    f = dgp.true_shift_function("cont_cs")
    assert f(-0.12) == pytest.approx(0.0)
    assert f(10.0) > 0  # increasing arctan branch
    g = dgp.true_shift_function("cont_sin")
    assert g(0.0) == pytest.approx(0.0)


def test_oracle_vaca_closed_form():
    v, se = dgp.oracle_interventional_mean("vaca", {}, "X1")
    assert (v, se) == (-0.25, 0.0)
    v, _ = dgp.oracle_interventional_mean("vaca", {"X2": -3.0}, "X3")
    assert v == pytest.approx(-0.25 + 0.25 * -3.0)
    a, _ = dgp.oracle_interventional_mean("vaca", {"X2": -3.0}, "X3")
    b, _ = dgp.oracle_interventional_mean("vaca", {"X2": -2.0}, "X3")
    assert b - a == pytest.approx(0.25)
    v, _ = dgp.oracle_interventional_mean("vaca", {}, "X3")
    assert v == pytest.approx(-0.25 + 0.25 * 0.25)


def test_oracle_monte_carlo_path():
    v, se = dgp.oracle_interventional_mean("cont_ls", {"X2": 0.0}, "X3")
    assert se > 0
    assert abs(v) <= 5 * se  # closed form gives exactly zero


def test_oracle_rejections():
    with pytest.raises(UnsupportedQueryError):
        dgp.oracle_interventional_mean("vaca", {}, "X9")
    with pytest.raises(UnsupportedQueryError):
        dgp.oracle_interventional_mean("vaca", {"X9": 1.0}, "X1")


def test_oracle_counterfactual_frozen_values():
    cf = dgp.oracle_counterfactual("carefl", OBS, {"X2": 0.0})
    assert cf[2] == pytest.approx(-0.8775, abs=1e-12)
    cf = dgp.oracle_counterfactual("carefl", OBS, {"X1": 0.0})
    assert cf[3] == pytest.approx(-2.28, abs=1e-12)


def test_oracle_counterfactual_identity():
    cf = dgp.oracle_counterfactual("carefl", OBS, {"X1": 2.00})
    np.testing.assert_allclose(cf, OBS, atol=1e-12)
    cf = dgp.oracle_counterfactual("carefl", OBS, {"X3": 5.0})
    np.testing.assert_allclose(cf, [2.00, 1.50, 5.0, -0.28], atol=1e-12)


def test_oracle_counterfactual_rejections():
    with pytest.raises(UnsupportedPresetError):
        dgp.oracle_counterfactual("vaca", np.zeros(3), {"X1": 0.0})
    with pytest.raises(MissingValueError):
        dgp.oracle_counterfactual("carefl", np.zeros(3), {"X1": 0.0})
    with pytest.raises(UnsupportedQueryError):
        dgp.oracle_counterfactual("carefl", OBS, {"X9": 0.0})
