import math

import numpy as np
import pytest

from tramdag import dgp
from tramdag.causal import (
    SampleSet,
    abduct_noise,
    counterfactual,
    odds_ratio_from_counts,
    odds_ratio_from_samples,
    predicted_odds_ratio,
    sample_interventional,
    sample_observational,
    treatment_effect,
)
from tramdag.errors import (
    DiscreteCounterfactualError,
    EmptySampleError,
    LevelOutOfRangeError,
    MissingValueError,
    UnknownNodeError,
    UnsupportedQueryError,
    ZeroCellError,
)
from tramdag.graph import parse_dag_spec
from tramdag.model import initialize_model


@pytest.fixture(scope="module")
def chain_model():
    spec = parse_dag_spec(dgp.default_spec_text("cont_ls"))
    data = dgp.generate("cont_ls", 500, seed=3)
    model = initialize_model(spec, data, seed=0)
    # initialization leaves the linear shifts at zero, which would make every
    # node independent of its parents; pin the generating coefficients instead
    model.nodes[1].shifts[0].beta = 2.0
    model.nodes[2].shifts[0].beta = -0.2
    model.nodes[2].shifts[1].beta = 0.3
    return model


@pytest.fixture(scope="module")
def mixed_model():
    spec = parse_dag_spec(dgp.default_spec_text("mixed_ls"))
    data = dgp.generate("mixed_ls", 500, seed=4)
    return initialize_model(spec, data, seed=0)


def test_observational_sampling_deterministic(chain_model):
    a = sample_observational(chain_model, 64, seed=9)
    b = sample_observational(chain_model, 64, seed=9)
    c = sample_observational(chain_model, 64, seed=10)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert a.query == "observational"


def test_intervention_replays_noise_on_untouched_nodes(chain_model):
    obs = sample_observational(chain_model, 128, seed=21)
    done = sample_interventional(chain_model, {"X2": -3.0}, 128, seed=21)
    np.testing.assert_array_equal(done.column("X1"), obs.column("X1"))
    assert np.all(done.column("X2") == -3.0)
    assert not np.array_equal(done.column("X3"), obs.column("X3"))
    assert done.query == "do(X2=-3.0)"


def test_intervention_on_root(chain_model):
    s = sample_interventional(chain_model, {"X1": 1.5}, 32, seed=2)
    assert np.all(s.column("X1") == 1.5)


def test_intervention_rejections(chain_model, mixed_model):
    with pytest.raises(UnsupportedQueryError):
        sample_interventional(chain_model, {}, 8, seed=0)
    with pytest.raises(UnknownNodeError):
        sample_interventional(chain_model, {"X7": 0.0}, 8, seed=0)
    with pytest.raises(MissingValueError):
        sample_interventional(chain_model, {"X1": float("nan")}, 8, seed=0)
    with pytest.raises(LevelOutOfRangeError):
        sample_interventional(mixed_model, {"X3": 9}, 8, seed=0)
    with pytest.raises(LevelOutOfRangeError):
        sample_interventional(mixed_model, {"X3": 1.5}, 8, seed=0)
    with pytest.raises(EmptySampleError):
        sample_observational(chain_model, 0, seed=0)


def test_pinned_ordinal_level(mixed_model):
    s = sample_interventional(mixed_model, {"X3": 2}, 16, seed=5)
    assert np.all(s.column("X3") == 2.0)


def test_sample_set_csv(tmp_path, chain_model):
    s = sample_interventional(chain_model, {"X2": 0.5}, 8, seed=3)
    path = tmp_path / "samples.csv"
    s.write_csv(path)
    text = path.read_text()
    assert "# seed = 3" in text
    assert "# query = do(X2=0.5)" in text
    ds = s.to_dataset()
    assert ds.names == ["X1", "X2", "X3"]


def test_treatment_effect_paired_zero(chain_model):
    te = treatment_effect(chain_model, {"X2": 1.0}, {"X2": 1.0}, "X3", 200, seed=7)
    assert te.difference == 0.0
    assert te.std_error == 0.0
    assert te.mean_a == te.mean_b
    assert te.n == 200


def test_treatment_effect_paired_vs_independent(chain_model):
    paired = treatment_effect(chain_model, {"X2": 0.0}, {"X2": 1.0}, "X3", 400, seed=7)
    indep = treatment_effect(
        chain_model, {"X2": 0.0}, {"X2": 1.0}, "X3", 400, seed=7,
        independent_streams=True,
    )
    assert paired.std_error < indep.std_error
    assert paired.difference == pytest.approx(indep.difference, abs=5 * indep.std_error)


def test_treatment_effect_rejects_target_in_do(chain_model):
    with pytest.raises(UnsupportedQueryError):
        treatment_effect(chain_model, {"X3": 0.0}, {"X3": 1.0}, "X3", 10, seed=0)


def test_abduct_noise_round_trip(chain_model):
    obs = sample_observational(chain_model, 1, seed=13).values[0]
    u = abduct_noise(chain_model, obs)
    assert np.all(np.isfinite(u))
    matrix = obs.reshape(1, -1)
    for j in range(3):
        rebuilt = chain_model.invert_latent(j, np.array([u[j]]), matrix)[0]
        assert rebuilt == pytest.approx(obs[j], abs=1e-6)


def test_abduct_noise_discrete_is_nan(mixed_model):
    u = abduct_noise(mixed_model, np.array([0.1, -0.2, 2.0]))
    assert np.isfinite(u[0]) and np.isfinite(u[1])
    assert np.isnan(u[2])


def test_counterfactual_identity(chain_model):
    obs = sample_observational(chain_model, 1, seed=17).values[0]
    cf = counterfactual(chain_model, obs, {"X1": float(obs[0])})
    np.testing.assert_allclose(cf, obs, atol=1e-6)


def test_counterfactual_moves_descendants_only(chain_model):
    obs = sample_observational(chain_model, 1, seed=19).values[0]
    cf = counterfactual(chain_model, obs, {"X2": float(obs[1]) + 1.0})
    assert cf[0] == obs[0]
    assert cf[1] == obs[1] + 1.0
    assert cf[2] != obs[2]
    # the descendant keeps its abducted noise
    assert abduct_noise(chain_model, cf)[2] == pytest.approx(
        abduct_noise(chain_model, obs)[2], abs=1e-6
    )


def test_counterfactual_discrete_descendant_raises(mixed_model):
    obs = np.array([0.1, -0.2, 2.0])
    with pytest.raises(DiscreteCounterfactualError):
        counterfactual(mixed_model, obs, {"X1": 1.0})
    with pytest.raises(DiscreteCounterfactualError):
        counterfactual(mixed_model, obs, {"X2": 1.0})


def test_counterfactual_on_discrete_leaf_is_allowed(mixed_model):
    obs = np.array([0.1, -0.2, 2.0])
    cf = counterfactual(mixed_model, obs, {"X3": 4})
    np.testing.assert_array_equal(cf, [0.1, -0.2, 4.0])


def test_counterfactual_rejections(chain_model):
    obs = np.zeros(3)
    with pytest.raises(UnsupportedQueryError):
        counterfactual(chain_model, obs, {})
    with pytest.raises(MissingValueError):
        counterfactual(chain_model, np.zeros(2), {"X1": 0.0})
    with pytest.raises(MissingValueError):
        counterfactual(chain_model, np.array([np.nan, 0, 0]), {"X1": 0.0})


def test_predicted_odds_ratio():
    assert predicted_odds_ratio(2.0) == pytest.approx(7.38905609893065, rel=1e-15)
    assert predicted_odds_ratio(0.0) == 1.0


def test_odds_ratio_frozen_counts():
    r = odds_ratio_from_counts(5119, 34881, 744, 39256)
    assert r.odds_ratio == pytest.approx(7.743357523105438, abs=1e-9)
    assert r.ci_low == pytest.approx(7.160603626634382, abs=1e-9)
    assert r.ci_high == pytest.approx(8.373537882701614, abs=1e-9)
    assert r.cells == (5119, 34881, 744, 39256)


def test_odds_ratio_symmetric_table():
    r = odds_ratio_from_counts(10, 90, 10, 90)
    assert r.odds_ratio == pytest.approx(1.0)
    assert r.ci_low < 1.0 < r.ci_high


def test_odds_ratio_zero_cell():
    with pytest.raises(ZeroCellError):
        odds_ratio_from_counts(0, 100, 10, 90)


def test_odds_ratio_from_samples_counts():
    base = SampleSet(names=["Y"], values=np.array([[0.0]] * 10 + [[1.0]] * 90), seed=0)
    inter = SampleSet(names=["Y"], values=np.array([[0.0]] * 40 + [[1.0]] * 60), seed=0)
    r = odds_ratio_from_samples(base, inter, "Y", cutoff=0.5)
    assert r.cells == (40, 60, 10, 90)
    assert r.odds_ratio == pytest.approx((40 / 60) / (10 / 90))


def test_odds_ratio_from_samples_empty():
    base = SampleSet(names=["Y"], values=np.zeros((0, 1)), seed=0)
    inter = SampleSet(names=["Y"], values=np.ones((5, 1)), seed=0)
    with pytest.raises(EmptySampleError):
        odds_ratio_from_samples(base, inter, "Y", cutoff=0.5)
