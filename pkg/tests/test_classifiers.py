import numpy as np
import pytest

from oracles import brute_knn_predict, central_difference
from wirescan.classifiers import (
    CLASSIFIER_KINDS, ClassifierSpec, laplace_lml_and_gradient, load_model,
    make_classifier, predict, predict_batch, save_model, train,
)
from wirescan.errors import DataFormatError


def blobs(n=40, d=60, seed=0, gap=1.2):
    """Two noisy but separated clusters in [0, 1]-ish feature space."""
    rng = np.random.default_rng(seed)
    half = n // 2
    x0 = rng.normal(0.35, 0.12, size=(half, d))
    x1 = rng.normal(0.65, 0.12, size=(n - half, d))
    x1[:, : d // 4] += (gap - 1.0) * 0.1
    x = np.clip(np.vstack([x0, x1]), 0.0, 1.0)
    y = np.array([0] * half + [1] * (n - half))
    perm = rng.permutation(n)
    return x[perm], y[perm]


def test_svm_two_point_toy():
    x = np.vstack([np.zeros(10000), np.ones(10000)])
    y = np.array([0, 1])
    model = train(ClassifierSpec("svm"), x, y)
    assert list(model.predict(x)) == [0, 1]
    assert int(model.support_mask.sum()) == 2


def test_svm_kkt_and_row_order_invariance():
    # gamma sized to the test dimensionality so the Gram matrix is not
    # the production value's near-constant degenerate limit
    spec = ClassifierSpec("svm", {"gamma": 0.05})
    x, y = blobs(seed=3)
    model = train(spec, x, y)
    assert model.kkt_violation() < 1e-3
    assert np.all(model.alpha >= 0) and np.all(model.alpha <= model.c + 1e-12)

    rng = np.random.default_rng(1)
    perm = rng.permutation(len(y))
    shuffled = train(spec, x[perm], y[perm])
    queries = x + rng.normal(0.0, 0.02, size=x.shape)  # data-manifold queries
    assert np.array_equal(model.predict(queries), shuffled.predict(queries))
    assert np.array_equal(model.predict(x), shuffled.predict(x))


def test_knn_unanimous_vote():
    x = np.vstack([np.zeros((3, 5)), np.ones((3, 5))])
    y = np.array([0, 0, 0, 1, 1, 1])
    model = train(ClassifierSpec("knn"), x, y)
    label, score = predict(model, np.ones(5))
    assert label == 1 and score == 1.0


@pytest.mark.property
def test_knn_agrees_with_brute_force_oracle():
    x, y = blobs(n=64, d=500, seed=5)
    model = train(ClassifierSpec("knn"), x, y)
    queries = np.random.default_rng(6).uniform(0, 1, size=(200, 500))
    ours, _ = predict_batch(model, queries)
    assert np.array_equal(ours, brute_knn_predict(x, y, queries, k=3))


def test_centroid_tie_goes_to_closed():
    x = np.array([[0.0], [2.0]])
    y = np.array([0, 1])
    model = train(ClassifierSpec("centroid"), x, y)
    label, score = predict(model, np.array([1.0]))
    assert score == 0.0 and label == 0


@pytest.mark.property
def test_gpc_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 1, size=(8, 24))
    y = np.array([0, 1, 0, 1, 1, 0, 1, 0])
    for theta in ([0.3, -0.2], [-0.4, 0.5]):
        theta = np.array(theta)
        _, grad = laplace_lml_and_gradient(x, y, theta)
        fd = central_difference(
            lambda th: laplace_lml_and_gradient(x, y, th)[0], theta, h=1e-5)
        assert np.all(np.abs(grad - fd) <= 1e-4 * np.maximum(np.abs(fd), 1e-8))


@pytest.mark.property
def test_gpc_mode_is_stationary_and_optimum_recorded():
    x, y = blobs(n=24, d=30, seed=9)
    model = train(ClassifierSpec("gpc"), x, y)
    assert model.mode_stationarity < 1e-6
    assert model.signal_variance > 0 and model.length_scale > 0
    assert np.isfinite(model.log_marginal_likelihood)


@pytest.mark.property
def test_gnb_and_qda_match_sample_moments():
    x, y = blobs(n=20, d=7, seed=11)
    gnb = train(ClassifierSpec("gnb"), x, y)
    qda = train(ClassifierSpec("qda"), x, y)
    eps = 1e-9 * x.var(axis=0).max()
    for c in (0, 1):
        mu = x[y == c].mean(axis=0)
        var = x[y == c].var(axis=0)
        assert np.allclose(gnb.means[c], mu, atol=0)
        assert np.allclose(gnb.variances[c], var + eps, atol=0)
        assert np.allclose(qda.means[c], mu, atol=0)
        assert np.allclose(qda.variances[c], 0.9 * var + 0.1 * var.mean(), rtol=1e-12)


def test_dtc_memorizes_training_set():
    x, y = blobs(n=30, d=20, seed=2, gap=1.0)
    model = train(ClassifierSpec("dtc"), x, y)
    assert np.array_equal(model.predict(x), y)
    assert model.leaf_is_pure(x, y)


def test_dtc_seed_changes_tie_breaking_deterministically():
    x, y = blobs(n=16, d=10, seed=4)
    a1 = train(ClassifierSpec("dtc", seed=0), x, y)
    a2 = train(ClassifierSpec("dtc", seed=0), x, y)
    assert a1.feature == a2.feature and a1.threshold == a2.threshold


@pytest.mark.property
def test_rf_leaves_pure_on_bootstrap_samples():
    x, y = blobs(n=24, d=15, seed=7)
    model = train(ClassifierSpec("rf", {"n_trees": 12, "max_features": 6}), x, y)
    for tree, boot in zip(model.trees, model.bootstrap_indices):
        assert tree.leaf_is_pure(x[boot], y[boot])


@pytest.mark.property
def test_adaboost_training_error_non_increasing():
    x, y = blobs(n=30, d=12, seed=8)
    model = train(ClassifierSpec("adaboost", {"rounds": 12}), x, y)
    errors = model.staged_training_error(x, y)
    assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))
    assert errors[-1] == 0.0


@pytest.mark.property
def test_feature_permutation_invariance():
    x, y = blobs(n=26, d=18, seed=10)
    rng = np.random.default_rng(3)
    perm = rng.permutation(x.shape[1])
    queries = rng.uniform(0, 1, size=(30, x.shape[1]))
    for kind in ("knn", "centroid", "gnb"):
        base = train(ClassifierSpec(kind), x, y)
        permuted = train(ClassifierSpec(kind), x[:, perm], y)
        a, _ = predict_batch(base, queries)
        b, _ = predict_batch(permuted, queries[:, perm])
        assert np.array_equal(a, b), kind


FAST_PARAMS = {
    "mlp": {"epochs": 40, "hidden": 16},
    "sgd": {"epochs": 60},
    "adaboost": {"rounds": 8},
    "rf": {"n_trees": 8, "max_features": 8},
    "gpc": {"max_iter": 25},
}


@pytest.mark.property
def test_every_kind_is_deterministic_and_usable():
    x, y = blobs(n=22, d=25, seed=12)
    queries = np.random.default_rng(4).uniform(0, 1, size=(15, 25))
    for kind in CLASSIFIER_KINDS:
        spec = ClassifierSpec(kind, FAST_PARAMS.get(kind, {}), seed=5)
        m1 = train(spec, x, y)
        m2 = train(spec, x, y)
        l1, s1 = predict_batch(m1, queries)
        l2, s2 = predict_batch(m2, queries)
        assert np.array_equal(l1, l2), kind
        assert np.allclose(s1, s2, atol=0), kind
        assert hasattr(m1, "converged") and hasattr(m1, "iterations")
        # training accuracy should beat chance on these easy blobs
        assert (m1.predict(x) == y).mean() >= 0.9, kind


def test_predict_score_conventions():
    x, y = blobs(n=20, d=10, seed=13)
    q = x[0]
    for kind in ("knn", "gnb", "rf"):
        model = train(ClassifierSpec(kind, FAST_PARAMS.get(kind, {})), x, y)
        label, score = predict(model, q)
        assert label == int(score > 0.5)
    for kind in ("svm", "sgd", "centroid", "adaboost"):
        model = train(ClassifierSpec(kind, FAST_PARAMS.get(kind, {})), x, y)
        label, score = predict(model, q)
        assert label == int(score > 0)


def test_model_save_load_round_trip(tmp_path):
    x, y = blobs(n=18, d=12, seed=14)
    queries = np.random.default_rng(7).uniform(0, 1, size=(9, 12))
    for kind in ("svm", "mlp", "rf", "gpc"):
        spec = ClassifierSpec(kind, FAST_PARAMS.get(kind, {}), seed=2)
        model = train(spec, x, y)
        path = tmp_path / f"{kind}.model"
        save_model(model, path)
        back = load_model(path)
        assert back.spec.kind == kind
        a, sa = predict_batch(model, queries)
        b, sb = predict_batch(back, queries)
        assert np.array_equal(a, b) and np.allclose(sa, sb, atol=0)


def test_model_file_magic_checked(tmp_path):
    bad = tmp_path / "bad.model"
    bad.write_bytes(b"garbage")
    with pytest.raises(DataFormatError, match="not a wirescan model"):
        load_model(bad)


def test_training_input_validation():
    x, _ = blobs(n=10, d=5)
    with pytest.raises(DataFormatError, match="single-class"):
        train(ClassifierSpec("svm"), x, np.zeros(10, dtype=int))
    with pytest.raises(DataFormatError, match="finite"):
        bad = x.copy()
        bad[0, 0] = np.nan
        train(ClassifierSpec("svm"), bad, np.array([0, 1] * 5))
    with pytest.raises(DataFormatError, match="unknown classifier"):
        make_classifier(ClassifierSpec("mystery"))
    with pytest.raises(DataFormatError, match="odd"):
        make_classifier(ClassifierSpec("knn", {"k": 4}))
    with pytest.raises(DataFormatError, match="positive"):
        make_classifier(ClassifierSpec("svm", {"gamma": 0.0}))
    with pytest.raises(DataFormatError, match="shrinkage"):
        make_classifier(ClassifierSpec("qda", {"shrinkage": 2.0}))
