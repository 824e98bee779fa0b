import math

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from comixify import aesthetics as ae
from comixify.errors import ConstraintError, DomainError, EmptyInputError, ShapeError


def one_hot(bin_index):
    p = np.zeros(10)
    p[bin_index - 1] = 1.0
    return ae.RatingDistribution(p)


def random_distribution(rng):
    raw = rng.random(10) + 1e-6
    return ae.RatingDistribution(raw / raw.sum())


# --- popularity ---------------------------------------------------------------

def test_popularity_label_values():
    assert ae.popularity_label(999, 1000) == pytest.approx(0.0, abs=1e-12)
    assert ae.popularity_label(0, 1) == pytest.approx(0.0, abs=1e-12)
    assert ae.popularity_label(9999, 100) == pytest.approx(math.log(100), abs=1e-9)


def test_popularity_label_domain():
    with pytest.raises(DomainError):
        ae.popularity_label(10, 0)
    with pytest.raises(DomainError):
        ae.popularity_label(-1, 10)


def test_spearman_basic():
    a = [1.0, 2.0, 5.0, 3.0]
    assert ae.spearman(a, a) == pytest.approx(1.0, abs=1e-12)
    assert ae.spearman(a, [-x for x in a]) == pytest.approx(-1.0, abs=1e-12)
    assert ae.spearman([1, 2, 3], [1, 1, 1]) == 0.0


def test_spearman_shape_errors():
    with pytest.raises(ShapeError):
        ae.spearman([1, 2], [1, 2, 3])
    with pytest.raises(ConstraintError):
        ae.spearman([1], [2])


def test_spearman_monotone_invariance():
    rng = np.random.default_rng(0)
    a = rng.normal(size=30)
    b = rng.normal(size=30)
    base = ae.spearman(a, b)
    assert ae.spearman(np.exp(a), b) == pytest.approx(base, abs=1e-12)
    assert ae.spearman(a, 3 * b + 7) == pytest.approx(base, abs=1e-12)


def test_svr_learns_monotone_signal():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(500, 8))
    y = np.tanh(X[:, 2]) * 2 + 0.05 * rng.normal(size=500)
    train_X, test_X = X[:400], X[400:]
    train_y, test_y = y[:400], y[400:]
    reg = ae.train_popularity_regressor(train_X, train_y)
    rho = ae.spearman(reg.predict(test_X), test_y)
    assert rho >= 0.9
    assert reg.metadata["degenerate_labels"] is False


def test_svr_degenerate_labels_flagged():
    X = np.random.default_rng(2).normal(size=(10, 4))
    reg = ae.train_popularity_regressor(X, np.ones(10))
    assert reg.metadata["degenerate_labels"] is True


def test_svr_needs_two_samples():
    with pytest.raises(ConstraintError):
        ae.train_popularity_regressor(np.ones((1, 4)), np.ones(1))


def test_svr_manifest_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    X = rng.normal(size=(50, 6))
    y = X[:, 0] * 2
    reg = ae.train_popularity_regressor(X, y)
    reg.save(tmp_path / "pop")
    loaded = ae.PopularityRegressor.load(tmp_path / "pop")
    np.testing.assert_allclose(loaded.predict(X[:5]), reg.predict(X[:5]), atol=1e-5)


# --- rating distributions -------------------------------------------------------

def test_emd_identical_zero():
    rng = np.random.default_rng(4)
    p = random_distribution(rng)
    assert ae.emd_loss(p, p) == pytest.approx(0.0, abs=1e-15)


def test_emd_extreme_one_hots():
    # CDFs differ by 1 in nine bins: sqrt(9/10)
    assert ae.emd_loss(one_hot(1), one_hot(10)) == pytest.approx(0.9486832980505138, abs=1e-9)
    assert 0.94868 == pytest.approx(ae.emd_loss(one_hot(1), one_hot(10)), abs=1e-5)


def test_emd_adjacent_one_hots():
    # CDFs differ by 1 in a single bin: sqrt(1/10)
    assert ae.emd_loss(one_hot(1), one_hot(2)) == pytest.approx(0.31622776601683794, abs=1e-9)


def test_emd_rejects_unnormalized():
    bad = ae.RatingDistribution(np.full(10, 0.2))
    good = one_hot(5)
    with pytest.raises(DomainError):
        ae.emd_loss(bad, good)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_emd_metric_axioms(seed):
    rng = np.random.default_rng(seed)
    p, q, r = (random_distribution(rng) for _ in range(3))
    dpq = ae.emd_loss(p, q)
    dqp = ae.emd_loss(q, p)
    assert dpq == pytest.approx(dqp, abs=1e-12)
    assert dpq >= 0.0
    # triangle inequality
    assert ae.emd_loss(p, r) <= dpq + ae.emd_loss(q, r) + 1e-9
    # identity of indiscernibles (non-equal sides)
    if np.max(np.abs(p.p - q.p)) > 1e-9:
        assert dpq > 0.0


def test_mean_score_values():
    uniform = ae.RatingDistribution(np.full(10, 0.1))
    assert ae.mean_score(uniform).value == pytest.approx(5.5, abs=1e-12)
    assert ae.mean_score(one_hot(10)).value == pytest.approx(10.0, abs=1e-12)
    split = np.zeros(10)
    split[0] = split[9] = 0.5
    assert ae.mean_score(ae.RatingDistribution(split)).value == pytest.approx(5.5, abs=1e-12)


def test_mean_score_range():
    rng = np.random.default_rng(5)
    for _ in range(50):
        value = ae.mean_score(random_distribution(rng)).value
        assert 1.0 <= value <= 10.0


# --- quality model ---------------------------------------------------------------

def test_predict_distribution_is_normalized():
    model = ae.QualityModel()
    frame = np.random.default_rng(6).random((48, 48, 3))
    dist = ae.predict_rating_distribution(frame, model)
    assert np.all(dist.p >= 0)
    assert dist.p.sum() == pytest.approx(1.0, abs=1e-6)


def test_predict_deterministic():
    model = ae.QualityModel()
    frame = np.random.default_rng(7).random((32, 32, 3))
    a = ae.predict_rating_distribution(frame, model)
    b = ae.predict_rating_distribution(frame, model)
    np.testing.assert_array_equal(a.p, b.p)


def test_zero_logit_model_uniform():
    model = ae.QualityModel()
    with torch.no_grad():
        for p in model.parameters():
            p.zero_()
    frame = np.random.default_rng(8).random((32, 32, 3))
    dist = ae.predict_rating_distribution(frame, model)
    np.testing.assert_allclose(dist.p, np.full(10, 0.1), atol=1e-7)


def brightness_corpus(count, seed):
    rng = np.random.default_rng(seed)
    images, targets = [], []
    for _ in range(count):
        level = rng.uniform(0.05, 0.95)
        images.append(np.clip(level + rng.normal(0, 0.05, (32, 32, 3)), 0, 1))
        center = 1 + round(level * 9)
        hist = np.exp(-0.5 * ((np.arange(1, 11) - center) / 1.5) ** 2)
        targets.append(hist / hist.sum())
    return images, targets


def test_quality_training_halves_emd():
    images, targets = brightness_corpus(32, seed=9)
    cfg = ae.QualityTrainConfig(steps=100, seed=0)
    _model, log = ae.train_quality_model(images, targets, cfg)
    assert log[-1]["emd"] < 0.5 * log[0]["emd"]


def test_quality_training_empty_corpus():
    with pytest.raises(EmptyInputError):
        ae.train_quality_model([], [], ae.QualityTrainConfig(steps=1))


def test_quality_training_memorizes_single_image():
    images, targets = brightness_corpus(1, seed=10)
    cfg = ae.QualityTrainConfig(steps=300, lr=3e-3, seed=0)
    model, log = ae.train_quality_model(images, targets, cfg)
    assert log[-1]["emd"] < 0.05
    pred = ae.predict_rating_distribution(images[0], model)
    assert ae.emd_loss(pred, ae.RatingDistribution(targets[0])) < 0.05


def test_quality_model_manifest_round_trip(tmp_path):
    model = ae.QualityModel()
    ae.save_quality_model(model, tmp_path / "q")
    loaded = ae.load_quality_model(tmp_path / "q")
    frame = np.random.default_rng(11).random((40, 40, 3))
    np.testing.assert_allclose(ae.predict_rating_distribution(frame, model).p,
                               ae.predict_rating_distribution(frame, loaded).p,
                               atol=1e-6)


# --- backends --------------------------------------------------------------------

def test_backends_interchangeable():
    from comixify.features import StubExtractor

    rng = np.random.default_rng(12)
    frame = rng.random((32, 32, 3))

    nima = ae.NimaBackend(ae.QualityModel())
    score_n = nima.score(frame)
    assert score_n.backend == "nima"
    assert 1.0 <= score_n.value <= 10.0

    X = rng.normal(size=(30, 8))
    reg = ae.train_popularity_regressor(X, X[:, 0])
    pop = ae.PopularityBackend(reg, StubExtractor())
    score_p = pop.score(frame)
    assert score_p.backend == "popularity"
    assert math.isfinite(score_p.value)
