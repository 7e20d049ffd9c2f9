import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tramdag.errors import NonFiniteInputError
from tramdag.transform import (
    ComplexIntercept,
    ComplexShift,
    LatentLogistic,
    LinearShift,
    MlpWeights,
    Scaler,
    SimpleIntercept,
    bernstein_basis,
    bernstein_deriv,
    bernstein_eval,
    bernstein_slope_basis,
    discrete_class_probs,
    discrete_log_probs,
    mlp_apply,
    monotone_params,
    sample_discrete,
    softplus_inverse,
    transform_inverse,
    transform_slope,
    transform_value,
)

UNIT = Scaler(low=0.0, high=1.0)

raw_vectors = st.lists(
    st.floats(min_value=-3.0, max_value=3.0), min_size=2, max_size=8
).map(np.array)


def _theta(raw):
    return np.array(monotone_params(np.asarray(raw, dtype=np.float64)))


def test_scaler_from_data_margin():
    s = Scaler.from_data(np.array([0.0, 10.0]))
    assert s.low == pytest.approx(-1.0)
    assert s.high == pytest.approx(11.0)
    assert s.standardize(-1.0) == pytest.approx(0.0)
    assert s.destandardize(1.0) == pytest.approx(11.0)
    assert s.log_jacobian == pytest.approx(-math.log(12.0))


def test_scaler_degenerate_column():
    s = Scaler.from_data(np.array([5.0, 5.0, 5.0]))
    assert s.high - s.low == pytest.approx(1.2)
    assert s.standardize(5.0) == pytest.approx(0.5)


def test_scaler_rejects_bad_input():
    with pytest.raises(ValueError):
        Scaler(low=1.0, high=1.0)
    with pytest.raises(NonFiniteInputError):
        Scaler.from_data(np.array([0.0, np.nan]))


def test_latent_logistic_values():
    assert LatentLogistic.cdf(0.0) == pytest.approx(0.5)
    assert LatentLogistic.quantile(0.5) == pytest.approx(0.0)
    assert LatentLogistic.density(0.0) == pytest.approx(0.25)
    assert LatentLogistic.log_density(0.0) == pytest.approx(-2.0 * math.log(2.0))
    z = np.linspace(-6.0, 6.0, 25)
    np.testing.assert_allclose(LatentLogistic.quantile(LatentLogistic.cdf(z)), z, atol=1e-10)


def test_latent_logistic_log_density_far_out():
    assert np.isfinite(LatentLogistic.log_density(800.0))
    assert LatentLogistic.log_density(800.0) == pytest.approx(-800.0)


def test_softplus_inverse_round_trip():
    for y in (1e-6, 0.1, 1.0, 30.0, 700.0):
        x = softplus_inverse(y)
        assert np.logaddexp(0.0, x) == pytest.approx(y, rel=1e-12)
    with pytest.raises(ValueError):
        softplus_inverse(0.0)


def test_monotone_params_strictly_increasing():
    theta = _theta([-1.0, -5.0, 0.0, 2.0])
    assert theta[0] == -1.0
    assert np.all(np.diff(theta) > 0)


def test_bernstein_basis_partition_of_unity():
    x = np.linspace(0.0, 1.0, 31)
    b = bernstein_basis(x, 6)
    assert b.shape == (31, 7)
    np.testing.assert_allclose(b.sum(axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(bernstein_basis(0.0, 6), np.eye(7)[0], atol=0)
    np.testing.assert_allclose(bernstein_basis(1.0, 6), np.eye(7)[6], atol=0)


def test_bernstein_order_one_is_affine():
    theta = np.array([-2.0, 3.0])
    x = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(bernstein_eval(theta, x), -2.0 + 5.0 * x, atol=1e-12)
    np.testing.assert_allclose(bernstein_deriv(theta, x), 5.0, atol=1e-12)


def test_slope_basis_matches_finite_differences():
    theta = _theta([-2.0, 0.3, -1.0, 0.8, 1.5])
    x = np.linspace(0.05, 0.95, 19)
    eps = 1e-6
    fd = (bernstein_eval(theta, x + eps) - bernstein_eval(theta, x - eps)) / (2 * eps)
    np.testing.assert_allclose(bernstein_deriv(theta, x), fd, rtol=1e-6)


def test_slope_basis_rejects_order_zero():
    with pytest.raises(ValueError):
        bernstein_slope_basis(0.5, 0)


def test_transform_slope_is_dh_dz():
    scaler = Scaler(low=-2.0, high=3.0)
    theta = _theta([-1.0, 0.2, 0.7, 1.1])
    x = np.linspace(-1.5, 2.5, 17)
    eps = 1e-6
    fd_dx = (
        transform_value(theta, scaler, x + eps) - transform_value(theta, scaler, x - eps)
    ) / (2 * eps)
    np.testing.assert_allclose(transform_slope(theta, scaler, x), fd_dx * 5.0, rtol=1e-5)


def test_transform_tangent_extension():
    scaler = UNIT
    theta = _theta([-1.0, 0.2, 0.7, 1.1])
    v1 = transform_value(theta, scaler, 1.0)
    d1 = transform_slope(theta, scaler, 1.0)
    assert transform_value(theta, scaler, 4.0) == pytest.approx(v1 + 3.0 * d1)
    assert transform_slope(theta, scaler, 4.0) == pytest.approx(d1)
    v0 = transform_value(theta, scaler, 0.0)
    d0 = transform_slope(theta, scaler, 0.0)
    assert transform_value(theta, scaler, -2.0) == pytest.approx(v0 - 2.0 * d0)
    assert transform_slope(theta, scaler, -2.0) == pytest.approx(d0)


@given(raw_vectors, st.floats(min_value=-3.0, max_value=4.0), st.floats(min_value=-5.0, max_value=5.0))
def test_invert_then_eval_round_trip(raw, x, shift):
    scaler = Scaler(low=-2.0, high=3.0)
    theta = _theta(raw)
    u = transform_value(theta, scaler, x, shift=shift)
    back = transform_inverse(theta, scaler, u, shift=shift)
    assert abs(back - x) <= 1e-6


@given(raw_vectors)
def test_transform_strictly_monotone(raw):
    scaler = Scaler(low=-2.0, high=3.0)
    theta = _theta(raw)
    grid = np.linspace(-3.0, 4.0, 101)
    values = transform_value(theta, scaler, grid)
    assert np.all(np.diff(values) > 0)


def test_transform_inverse_vector_and_scalar():
    theta = _theta([0.0, 0.5, 0.5])
    u = transform_value(theta, UNIT, np.array([0.2, 0.8]))
    out = transform_inverse(theta, UNIT, u)
    np.testing.assert_allclose(out, [0.2, 0.8], atol=1e-10)
    assert isinstance(transform_inverse(theta, UNIT, float(u[0])), float)


def test_discrete_probs_frozen_values():
    p = discrete_class_probs(np.array([-1.0, 0.0]))
    sig1 = 1.0 / (1.0 + math.e)
    np.testing.assert_allclose(p, [sig1, 0.5 - sig1, 0.5], atol=1e-15)
    assert p[1] == pytest.approx(0.2310585786300049)


def test_discrete_probs_sum_to_one():
    rng = np.random.default_rng(3)
    for _ in range(50):
        cuts = np.sort(rng.normal(size=rng.integers(1, 6)) * 3)
        cuts += np.arange(len(cuts)) * 1e-3  # ensure strict order
        shift = rng.normal() * 5
        p = discrete_class_probs(cuts, np.asarray(shift))
        assert np.all(p >= 0)
        assert abs(p.sum() - 1.0) <= 1e-12


def test_discrete_log_probs_match_plain():
    cuts = np.array([-1.2, 0.1, 0.9])
    shift = np.array([0.0, 0.7, -2.0])
    lp = discrete_log_probs(cuts, shift)
    np.testing.assert_allclose(np.exp(lp), discrete_class_probs(cuts, shift), rtol=1e-12)


def test_discrete_log_probs_stable_at_huge_shift():
    cuts = np.array([-1.0, 0.0])
    for shift in (-800.0, 800.0):
        lp = discrete_log_probs(cuts, np.asarray(shift))
        assert np.all(np.isfinite(lp))
        assert np.exp(lp).sum() == pytest.approx(1.0)


def test_binary_node_probs():
    p = discrete_class_probs(np.array([0.0]))
    np.testing.assert_allclose(p, [0.5, 0.5], atol=1e-15)
    lp = discrete_log_probs(np.array([0.0]))
    np.testing.assert_allclose(lp, [-math.log(2.0)] * 2, atol=1e-15)


def test_sample_discrete_levels():
    cuts = np.array([-1.0, 0.0])
    u = np.array([-5.0, -0.5, 3.0, -1.0])
    levels = sample_discrete(cuts, np.zeros(4), u)
    np.testing.assert_array_equal(levels, [1, 2, 3, 1])


def test_sample_discrete_matches_probs():
    cuts = np.array([-0.7, 0.4, 1.1])
    rng = np.random.default_rng(11)
    u = LatentLogistic.quantile(rng.uniform(size=200_000))
    levels = sample_discrete(cuts, np.zeros(u.shape[0]), u)
    freq = np.bincount(levels, minlength=5)[1:] / u.shape[0]
    np.testing.assert_allclose(freq, discrete_class_probs(cuts), atol=0.005)


def test_mlp_initialized_shapes_and_bounds():
    rng = np.random.default_rng(0)
    w = MlpWeights.initialized(rng, n_in=3, n_out=2)
    assert w.w1.shape == (16, 3)
    assert w.w2.shape == (16, 16)
    assert w.w3.shape == (2, 16)
    assert np.all(w.b1 == 0) and np.all(w.b2 == 0) and np.all(w.b3 == 0)
    assert np.max(np.abs(w.w1)) <= 1.0 / math.sqrt(3)
    assert np.max(np.abs(w.w2)) <= 0.25
    bias = np.array([1.5, -2.0])
    w2 = MlpWeights.initialized(rng, n_in=3, n_out=2, out_bias=bias)
    np.testing.assert_array_equal(w2.b3, bias)
    assert w2.b3 is not bias


def test_mlp_apply_zero_weights_returns_bias():
    w = MlpWeights(
        w1=np.zeros((16, 1)),
        b1=np.zeros(16),
        w2=np.zeros((16, 16)),
        b2=np.zeros(16),
        w3=np.zeros((3, 16)),
        b3=np.array([0.5, -1.0, 2.0]),
    )
    out = mlp_apply(w, np.zeros((4, 1)))
    assert out.shape == (4, 3)
    np.testing.assert_allclose(out, np.tile([0.5, -1.0, 2.0], (4, 1)))


def test_simple_intercept_theta():
    si = SimpleIntercept(raw=np.array([-1.0, 0.0, 0.0]))
    theta = si.theta()
    assert theta[0] == -1.0
    np.testing.assert_allclose(np.diff(theta), math.log(2.0), atol=1e-15)


def test_complex_intercept_rows_monotone():
    rng = np.random.default_rng(5)
    ci = ComplexIntercept(
        mlp=MlpWeights.initialized(rng, n_in=2, n_out=6), parent_indices=(0, 1)
    )
    theta = ci.theta(rng.normal(size=(10, 2)))
    assert theta.shape == (10, 6)
    assert np.all(np.diff(theta, axis=1) > 0)


def test_linear_shift_value():
    ls = LinearShift(parent_index=0, beta=-0.4)
    np.testing.assert_allclose(ls.value(np.array([1.0, 2.0])), [-0.4, -0.8])


def test_complex_shift_centering():
    rng = np.random.default_rng(9)
    mlp = MlpWeights.initialized(rng, n_in=1, n_out=1)
    x = rng.normal(size=50)
    raw = ComplexShift(parent_index=0, mlp=mlp).value(x)
    centered = ComplexShift(parent_index=0, mlp=mlp, center=float(raw.mean())).value(x)
    assert centered.mean() == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(raw - raw.mean(), centered, atol=1e-12)
