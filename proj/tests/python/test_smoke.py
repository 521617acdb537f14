import numpy as np
import pytest

import anoscope


def pair_count_auc(scores, labels):
    a = scores[labels == -1]
    n = scores[labels == 1]
    diff = a[:, None] - n[None, :]
    return ((diff > 0).sum() + 0.5 * (diff == 0).sum()) / diff.size


def test_two_moons_is_deterministic():
    x = anoscope.two_moons(200, seed=3)
    assert x.shape == (200, 2)
    np.testing.assert_array_equal(x, anoscope.two_moons(200, seed=3))
    assert not np.array_equal(x, anoscope.two_moons(200, seed=4))


def test_gaussian_scores_match_mahalanobis():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(300, 3)) @ np.array([[2.0, 0.0, 0.0], [0.5, 1.0, 0.0], [0.0, 0.3, 0.5]])
    model = anoscope.fit("gaussian", x)
    assert model.method == "gaussian"
    mu = x.mean(axis=0)
    cov = (x - mu).T @ (x - mu) / len(x)
    probes = rng.normal(size=(20, 3))
    d = probes - mu
    expected = np.einsum("ij,jk,ik->i", d, np.linalg.inv(cov), d)
    np.testing.assert_allclose(model.score(probes), expected, rtol=1e-9)


def test_auroc_and_ap_match_counting():
    rng = np.random.default_rng(1)
    labels = np.where(rng.random(120) < 0.3, -1, 1)
    scores = rng.normal(size=120) + (labels == -1) * 0.8
    assert anoscope.auroc(scores, labels) == pytest.approx(pair_count_auc(scores, labels), abs=1e-12)
    order = np.argsort(-scores)
    hits = (labels[order] == -1).astype(float)
    ap = (np.cumsum(hits) / np.arange(1, 121))[hits == 1].mean()
    assert anoscope.average_precision(scores, labels) == pytest.approx(ap, abs=1e-12)


def test_calibrated_threshold_and_report():
    assert anoscope.calibrate_threshold(np.array([0.1, 0.2, 0.3, 0.4]), 0.25) == 0.3
    report = anoscope.evaluate(np.array([1.0, 2.0, 3.0, 4.0]), [1, 1, -1, -1], ks=[2], tau=3.0)
    assert report["auroc"] == 1.0
    assert report["precision_at_k"] == {2: 1.0}
    assert report["false_alarm_rate"] == 0.0
    assert report["miss_rate"] == 0.0


def test_kde_ranks_moons_above_uniform_anomalies_and_explains():
    train = anoscope.two_moons(400, seed=1)
    normals = anoscope.two_moons(200, seed=2)
    anomalies = anoscope.uniform_anomalies(40, seed=2)
    model = anoscope.fit("kde", train, gamma=2.0)
    scores = model.score(np.vstack([normals, anomalies]))
    labels = np.array([1] * 200 + [-1] * 40)
    assert anoscope.auroc(scores, labels) > 0.8
    relevance = anoscope.kde_heatmaps(model, anomalies[:5])
    assert relevance.shape == (5, 2)
    assert (relevance >= 0).all()


def test_svdd_keyword_settings_and_boundary():
    x = anoscope.two_moons(150, seed=5)
    model = anoscope.fit("svdd", x, nu=0.2, gamma=1.0)
    assert model.has_intrinsic_boundary
    outside = (model.score(x) > 1e-6).mean()
    assert outside <= 0.2 + 2 / 150


def test_checkpoint_round_trip(tmp_path):
    x = anoscope.two_moons(120, seed=6)
    model = anoscope.fit("kpca", x)
    path = str(tmp_path / "kpca.model")
    model.save(path)
    loaded = anoscope.load(path)
    assert loaded.method == "kpca"
    np.testing.assert_array_equal(loaded.score(x), model.score(x))


def test_errors_carry_codes():
    with pytest.raises(anoscope.AnoscopeError) as err:
        anoscope.calibrate_threshold(np.array([1.0, 2.0]), 1.5)
    assert err.value.code == "AlphaOutOfRange"
    with pytest.raises(anoscope.AnoscopeError) as err:
        anoscope.fit("gaussian", np.zeros((5, 2)), bogus=1)
    assert err.value.code == "ConfigError"
    with pytest.raises(anoscope.AnoscopeError) as err:
        anoscope.load("/nonexistent/model")
    assert err.value.code == "MissingFile"


def test_bench_toy_without_deep_models():
    result = anoscope.bench_toy(seed=7, include_deep=False)
    assert "ae" not in result
    assert result["kde"]["auroc"] > result["gaussian"]["auroc"]
