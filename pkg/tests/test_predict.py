import math

import numpy as np
import pytest
from scipy import stats

from sctl.data import Dataset
from sctl.errors import DegenerateDataError, InsufficientSampleError, InvalidArgumentError
from sctl.predict import (
    Metrics,
    cv_error,
    evaluate,
    f_variance_test,
    fit,
    kind_for_target,
    welch_t_test,
)


def linear(n=50, seed=0):
    x = np.random.default_rng(seed).standard_normal(n)
    return Dataset.from_columns({"x": x, "y": 3 * x + 1})


def test_ols_exact_line():
    m = fit("ols", linear(), ["x"], "y")
    assert m.coef_[0] == pytest.approx(3, abs=1e-9)
    assert m.intercept_ == pytest.approx(1, abs=1e-9)
    assert m.flags == []


def test_ols_ridge_fallback_and_strict_mode():
    x = np.arange(10.0)
    d = Dataset.from_columns({"a": x, "b": 2 * x, "y": x + 1})
    m = fit("ols", d, ["a", "b"], "y")
    assert "ridge-fallback" in m.flags
    assert evaluate(m, d).mse < 1e-6
    with pytest.raises(DegenerateDataError):
        fit("ols", d, ["a", "b"], "y", allow_ridge=False)


def test_ols_residuals_orthogonal():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((200, 3))
    y = X @ [1.0, -2.0, 0.5] + rng.standard_normal(200)
    d = Dataset.from_columns({"a": X[:, 0], "b": X[:, 1], "c": X[:, 2], "y": y})
    m = fit("ols", d, ["a", "b", "c"], "y")
    resid = y - m.predict(d)
    for j in range(3):
        assert abs(resid @ X[:, j]) < 1e-8
    assert abs(resid.sum()) < 1e-8


def test_knn_k1_zero_training_error_and_small_n():
    d = linear(30, 2)
    assert evaluate(fit("knn1", d, ["x"], "y"), d).mse == 0.0
    with pytest.raises(InsufficientSampleError):
        fit("knn5", d.take(np.arange(3)), ["x"], "y")


def test_knn_matches_brute_force():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((120, 2))
    y = X.sum(axis=1) + rng.standard_normal(120)
    d = Dataset.from_columns({"a": X[:, 0], "b": X[:, 1], "y": y})
    q = Dataset.from_columns({"a": rng.standard_normal(15), "b": rng.standard_normal(15), "y": np.zeros(15)})
    m = fit("knn5", d, ["a", "b"], "y")
    Z = (X - X.mean(0)) / X.std(0)
    Q = (np.column_stack([q["a"], q["b"]]) - X.mean(0)) / X.std(0)
    for i, row in enumerate(Q):
        dist = ((Z - row) ** 2).sum(1)
        nn = sorted(range(120), key=lambda j: (dist[j], j))[:5]
        assert m.predict(q)[i] == pytest.approx(y[nn].mean())


def test_knn_ties_broken_by_row_index():
    # four training rows at the same point with different targets
    d = Dataset.from_columns({"x": [0.0, 0.0, 0.0, 0.0, 5.0], "y": [1.0, 2.0, 3.0, 4.0, 9.0]})
    q = Dataset.from_columns({"x": [0.0], "y": [0.0]})
    assert fit("knn2", d, ["x"], "y").predict(q)[0] == 1.5
    # duplicated rows reordered among themselves give the same prediction
    d2 = Dataset.from_columns({"x": [5.0, 1.0, 1.0, 0.0, 0.0], "y": [9.0, 2.0, 2.0, 1.0, 1.0]})
    d3 = Dataset.from_columns({"x": [1.0, 0.0, 5.0, 0.0, 1.0], "y": [2.0, 1.0, 9.0, 1.0, 2.0]})
    q = Dataset.from_columns({"x": [0.4, 0.6, 3.0], "y": [0.0] * 3})
    assert np.array_equal(fit("knn3", d2, ["x"], "y").predict(q), fit("knn3", d3, ["x"], "y").predict(q))


def test_knn_with_discrete_features_and_classifier():
    d = Dataset.from_columns(
        {"g": ["a", "a", "b", "b", "b", "a"], "x": [0.0, 0.1, 1.0, 1.1, 0.9, 0.2], "y": ["0", "0", "1", "1", "1", "0"]},
        {"g": ["a", "b"], "y": ["0", "1"]},
    )
    m = fit("knnc3", d, ["g", "x"], "y")
    met = evaluate(m, d)
    assert met.accuracy == 1.0 and met.f1 == 1.0 and met.mse == 0.0
    assert kind_for_target("knn5", True) == "knnc5"
    assert kind_for_target("knnc5", False) == "knn5"
    assert kind_for_target("ols", True) == "majority"


def test_empty_features_is_mean_model():
    d = linear(20, 4)
    m = fit("knn5", d, [], "y")
    assert "empty-features" in m.flags
    assert np.allclose(m.predict(d), d["y"].mean())


def test_metric_examples():
    d = Dataset.from_columns({"x": [0.0, 1.0, 2.0], "y": [1.0, -1.0, 2.0]})

    class Zero:
        task = "regression"
        target = "y"

        def predict(self, d):
            return np.zeros(d.n_rows)

    met = evaluate(Zero(), d)
    assert met.sse == 6 and met.mse == 2 and math.isnan(met.accuracy)
    labels = ["0", "1"] * 10
    dc = Dataset.from_columns({"x": np.arange(20.0), "y": labels}, {"y": ["0", "1"]})
    maj = fit("majority", dc, [], "y")
    assert evaluate(maj, dc).accuracy == 0.5
    perfect = fit("knnc1", dc, ["x"], "y")
    met = evaluate(perfect, dc)
    assert (met.mse, met.accuracy, met.f1) == (0.0, 1.0, 1.0)


def test_evaluate_permutation_invariant_and_mse_sse_identity():
    rng = np.random.default_rng(5)
    d = Dataset.from_columns({"x": rng.standard_normal(60), "y": rng.standard_normal(60)})
    m = fit("knn5", d.take(np.arange(40)), ["x"], "y")
    test = d.take(np.arange(40, 60))
    a = evaluate(m, test)
    b = evaluate(m, test.take(rng.permutation(20)))
    assert a.sse == pytest.approx(b.sse, rel=1e-12)
    assert math.isclose(a.mse * a.n, a.sse, rel_tol=4 * np.finfo(float).eps)


def test_unseen_label_counts_as_error():
    train = Dataset.from_columns({"x": [0.0, 1.0], "y": ["a", "b"]}, {"y": ["a", "b"]})
    test = Dataset.from_columns({"x": [0.0, 1.0], "y": ["a", "c"]}, {"y": ["a", "c"]})
    met = evaluate(fit("knnc1", train, ["x"], "y"), test)
    assert met.accuracy == 0.5


def test_cv_error_deterministic():
    d = linear(100, 6)
    assert cv_error("knn5", d, ["x"], "y", seed=1) == cv_error("knn5", d, ["x"], "y", seed=1)
    assert cv_error("ols", d, ["x"], "y") < 1e-20


def test_fit_validation():
    d = linear()
    with pytest.raises(InvalidArgumentError):
        fit("forest", d, ["x"], "y")
    with pytest.raises(InvalidArgumentError):
        fit("knn5", d, ["y"], "y")
    with pytest.raises(InvalidArgumentError):
        fit("knn5", d, ["z"], "y")


def test_welch_examples():
    xs = [1.0, 2.0, 3.5, 4.0]
    assert welch_t_test(xs, xs) == (0.0, 1.0)
    rng = np.random.default_rng(0)
    t, p = welch_t_test([0, 0, 0, 0], 10 + 1e-3 * rng.standard_normal(4))
    assert p < 1e-6
    assert welch_t_test([1, 1, 1], [1, 1]) == (0.0, 1.0)
    assert welch_t_test([1, 1, 1], [2, 2])[1] == 0.0


def test_welch_matches_scipy():
    rng = np.random.default_rng(9)
    for _ in range(20):
        x = rng.normal(0, 1, rng.integers(2, 30))
        y = rng.normal(0.3, 2, rng.integers(2, 30))
        t, p = welch_t_test(x, y)
        ref = stats.ttest_ind(x, y, equal_var=False)
        assert t == pytest.approx(ref.statistic, rel=1e-10)
        assert p == pytest.approx(ref.pvalue, rel=1e-8)


def test_welch_calibration():
    hits = 0
    for seed in range(100):
        x, y = np.split(np.random.default_rng(seed).standard_normal(200), 2)
        hits += welch_t_test(x, y)[1] > 0.05
    assert hits >= 90


def test_f_test_examples():
    x = [1.0, 2.0, 4.0, 8.0]
    f, p = f_variance_test(x, x)
    assert f == 1.0 and p == pytest.approx(1.0)
    rng = np.random.default_rng(2)
    base = rng.standard_normal(50)
    base = (base - base.mean()) / base.std(ddof=1)
    f, p = f_variance_test(2 * base, base)
    assert f == pytest.approx(4.0)
    oracle = 2 * stats.f.sf(4.0, 49, 49)
    assert p == pytest.approx(oracle) and p < 0.01
    f_variance_test([1.0, 2.0], [0.0, 3.0])
    with pytest.raises(DegenerateDataError):
        f_variance_test([1.0, 2.0], [3.0, 3.0])
