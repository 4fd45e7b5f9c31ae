"""Deterministic predictors, evaluation metrics and two-sample tests.

Predictors are chosen by a short *kind* string:

``knn<k>`` (e.g. ``knn5``)
    k-nearest-neighbour regressor; Euclidean distance on z-scored continuous
    features and one-hot discrete features, distance ties broken by row index.
``ols``
    least squares with intercept; a rank-deficient design falls back to ridge
    with ``lambda = 1e-8`` and is flagged.
``knnc<k>``
    k-nearest-neighbour classifier (majority vote, ties to the nearest).
``majority``
    most frequent training label.

:func:`fit` dispatches on the kind, and :func:`kind_for_target` switches a
regressor kind to its classifier counterpart for discrete targets.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .data import Dataset
from .errors import DegenerateDataError, InsufficientSampleError, InvalidArgumentError

__all__ = [
    "Metrics",
    "Predictor",
    "fit",
    "evaluate",
    "kind_for_target",
    "cv_error",
    "cross_fit_predictions",
    "welch_t_test",
    "f_variance_test",
    "RIDGE_LAMBDA",
]

log = logging.getLogger(__name__)

RIDGE_LAMBDA = 1e-8


# ---------------------------------------------------------------------------
# Feature encoding
# ---------------------------------------------------------------------------


@dataclass
class _Encoder:
    """Column-wise encoder fitted on the training data."""

    features: tuple
    scale: bool
    parts: list = field(default_factory=list)

    def fit(self, d: Dataset):
        self.parts = []
        for name in self.features:
            col = d.column(name)
            if col.discrete:
                self.parts.append((name, "discrete", col.levels))
            else:
                v = d.values[name]
                mu = float(v.mean())
                sd = float(v.std())
                if not self.scale:
                    mu, sd = 0.0, 1.0
                self.parts.append((name, "continuous", (mu, sd if sd > 0 else 1.0)))
        return self

    def transform(self, d: Dataset, drop_first=False) -> np.ndarray:
        blocks = []
        for name, kind, info in self.parts:
            col = d.column(name)
            if kind == "discrete":
                if not col.discrete:
                    raise InvalidArgumentError(f"{name}: expected a discrete column")
                labels = np.asarray(col.levels, dtype=object)[d.values[name]]
                onehot = np.column_stack([labels == lv for lv in info]).astype(float)
                blocks.append(onehot[:, 1:] if drop_first else onehot)
            else:
                if col.discrete:
                    raise InvalidArgumentError(f"{name}: expected a continuous column")
                mu, sd = info
                blocks.append(((d.values[name] - mu) / sd)[:, None])
        if not blocks:
            return np.zeros((d.n_rows, 0))
        return np.hstack(blocks)


def _neighbours(train: np.ndarray, query: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest training rows, ordered by (distance, row index)."""
    n, p = train.shape
    out = np.empty((len(query), k), dtype=np.int64)
    block = max(1, 2_000_000 // n)
    for start in range(0, len(query), block):
        q = query[start:start + block]
        # exact squared distances, accumulated per feature to keep memory flat
        d2 = np.zeros((len(q), n))
        for j in range(p):
            diff = q[:, j, None] - train[None, :, j]
            d2 += diff * diff
        if k < n:
            part = np.argpartition(d2, k - 1, axis=1)[:, :k]
        else:
            part = np.tile(np.arange(n), (len(q), 1))
        dpart = np.take_along_axis(d2, part, axis=1)
        order = np.lexsort((part, dpart), axis=-1)
        out[start:start + len(q)] = np.take_along_axis(part, order, axis=1)
        if k < n:
            # rows where the k-th distance is shared beyond the cut need a full stable sort
            kth = dpart.max(axis=1)
            for r in np.nonzero((d2 <= kth[:, None]).sum(axis=1) > k)[0]:
                out[start + r] = np.argsort(d2[r], kind="stable")[:k]
    return out


# ---------------------------------------------------------------------------
# Predictors
# ---------------------------------------------------------------------------


_KIND = re.compile(r"^(knn|knnc|knn-regressor:|knn-classifier:)(\d+)$")


def _parse_kind(kind: str):
    kind = kind.strip().lower()
    if kind in ("ols", "majority"):
        return kind, None
    m = _KIND.match(kind)
    if not m:
        raise InvalidArgumentError(f"unknown predictor kind {kind!r}")
    family = "knnc" if m.group(1) in ("knnc", "knn-classifier:") else "knn"
    k = int(m.group(2))
    if k < 1:
        raise InvalidArgumentError("k must be at least 1")
    return family, k


def kind_for_target(kind: str, target_is_discrete: bool) -> str:
    """Swap regressor/classifier kinds to match the target column."""
    family, k = _parse_kind(kind)
    if target_is_discrete:
        return {"knn": f"knnc{k}", "ols": "majority"}.get(family, kind)
    if family == "knnc":
        return f"knn{k}"
    if family == "majority":
        return "ols"
    return kind


class Predictor:
    """A fitted model over a fixed feature list.

    ``flags`` records conditions worth reporting (``empty-features``,
    ``ridge-fallback``).
    """

    task = "regression"

    def __init__(self, kind, features, target):
        self.kind = kind
        self.features = tuple(features)
        self.target = target
        self.flags: list = []

    def predict(self, d: Dataset) -> np.ndarray:
        raise NotImplementedError


class _Regressor(Predictor):
    def _fit_target(self, d):
        col = d.column(self.target)
        if col.discrete:
            raise InvalidArgumentError(f"{self.kind} needs a continuous target")
        return d.values[self.target]


class KnnRegressor(_Regressor):
    def __init__(self, k, features, target):
        super().__init__(f"knn{k}", features, target)
        self.k = k

    def fit(self, d: Dataset):
        y = self._fit_target(d)
        if d.n_rows < self.k:
            raise InsufficientSampleError(f"k={self.k} exceeds {d.n_rows} training rows")
        self.enc = _Encoder(self.features, scale=True).fit(d)
        self.X = self.enc.transform(d)
        self.y = y.copy()
        if not self.features:
            self.flags.append("empty-features")
        return self

    def predict(self, d):
        if not self.features:
            return np.full(d.n_rows, float(self.y.mean()))
        idx = _neighbours(self.X, self.enc.transform(d), self.k)
        return self.y[idx].mean(axis=1)


class OlsRegressor(_Regressor):
    def __init__(self, features, target, allow_ridge=True):
        super().__init__("ols", features, target)
        self.allow_ridge = allow_ridge

    def fit(self, d: Dataset):
        y = self._fit_target(d)
        self.enc = _Encoder(self.features, scale=False).fit(d)
        X = np.column_stack([np.ones(d.n_rows), self.enc.transform(d, drop_first=True)])
        if not self.features:
            self.flags.append("empty-features")
        if np.linalg.matrix_rank(X) < X.shape[1]:
            if not self.allow_ridge:
                raise DegenerateDataError("singular OLS design")
            penalty = RIDGE_LAMBDA * np.eye(X.shape[1])
            penalty[0, 0] = 0.0
            beta = np.linalg.solve(X.T @ X + penalty, X.T @ y)
            self.flags.append("ridge-fallback")
        else:
            beta = np.linalg.lstsq(X, y, rcond=None)[0]
        self.intercept_ = float(beta[0])
        self.coef_ = beta[1:]
        return self

    def predict(self, d):
        X = self.enc.transform(d, drop_first=True)
        return self.intercept_ + X @ self.coef_


class _Classifier(Predictor):
    task = "classification"

    def _fit_target(self, d):
        col = d.column(self.target)
        if not col.discrete:
            raise InvalidArgumentError(f"{self.kind} needs a discrete target")
        self.levels = col.levels
        return d.values[self.target]


class KnnClassifier(_Classifier):
    def __init__(self, k, features, target):
        super().__init__(f"knnc{k}", features, target)
        self.k = k

    def fit(self, d: Dataset):
        y = self._fit_target(d)
        if d.n_rows < self.k:
            raise InsufficientSampleError(f"k={self.k} exceeds {d.n_rows} training rows")
        self.enc = _Encoder(self.features, scale=True).fit(d)
        self.X = self.enc.transform(d)
        self.y = y.copy()
        self.majority = int(np.argmax(np.bincount(y, minlength=len(self.levels))))
        if not self.features:
            self.flags.append("empty-features")
        return self

    def predict(self, d):
        """Predicted level labels."""
        if not self.features:
            return np.full(d.n_rows, self.levels[self.majority], dtype=object)
        idx = _neighbours(self.X, self.enc.transform(d), self.k)
        out = np.empty(d.n_rows, dtype=object)
        for r, row in enumerate(self.y[idx]):
            counts = np.bincount(row, minlength=len(self.levels))
            best = counts.max()
            # first neighbour (nearest) whose label reaches the top count
            winner = next(c for c in row if counts[c] == best)
            out[r] = self.levels[winner]
        return out


class MajorityClassifier(_Classifier):
    def __init__(self, features, target):
        super().__init__("majority", features, target)

    def fit(self, d: Dataset):
        y = self._fit_target(d)
        self.majority = int(np.argmax(np.bincount(y, minlength=len(self.levels))))
        return self

    def predict(self, d):
        return np.full(d.n_rows, self.levels[self.majority], dtype=object)


def fit(kind: str, d: Dataset, features, target, allow_ridge=True) -> Predictor:
    """Fit a predictor of the given kind on ``d``."""
    features = tuple(features)
    for name in (*features, target):
        d.column(name)
    if target in features:
        raise InvalidArgumentError("target cannot be a feature")
    family, k = _parse_kind(kind)
    if family == "knn":
        return KnnRegressor(k, features, target).fit(d)
    if family == "knnc":
        return KnnClassifier(k, features, target).fit(d)
    if family == "ols":
        return OlsRegressor(features, target, allow_ridge).fit(d)
    return MajorityClassifier(features, target).fit(d)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Metrics:
    """Regression fills mse/sse; classification also fills accuracy/f1.

    For classifiers ``sse`` counts misclassified rows so that ``mse`` is the
    error rate. Metrics that do not apply are NaN.
    """

    mse: float
    sse: float
    accuracy: float
    f1: float
    n: int


def _f1(truth, pred, levels) -> float:
    def f1_for(lv):
        tp = np.sum((pred == lv) & (truth == lv))
        fp = np.sum((pred == lv) & (truth != lv))
        fn = np.sum((pred != lv) & (truth == lv))
        denom = 2 * tp + fp + fn
        return 1.0 if denom == 0 else 2 * tp / denom

    if len(levels) == 2:
        return float(f1_for(levels[1]))
    present = [lv for lv in levels if np.any(truth == lv) or np.any(pred == lv)]
    return float(np.mean([f1_for(lv) for lv in present])) if present else 1.0


def evaluate(p: Predictor, d: Dataset, target=None) -> Metrics:
    target = target or p.target
    col = d.column(target)
    n = d.n_rows
    if p.task == "regression":
        if col.discrete:
            raise InvalidArgumentError("regression metrics need a continuous target")
        resid = d.values[target] - p.predict(d)
        sse = float(np.sum(resid * resid))
        return Metrics(sse / n, sse, math.nan, math.nan, n)
    if not col.discrete:
        raise InvalidArgumentError("classification metrics need a discrete target")
    truth = np.asarray(col.levels, dtype=object)[d.values[target]]
    unseen = set(truth) - set(p.levels)
    if unseen:
        log.warning("labels %s absent from training levels count as errors", sorted(unseen))
    pred = p.predict(d)
    wrong = float(np.sum(truth != pred))
    levels = list(p.levels) + sorted(unseen)
    return Metrics(wrong / n, wrong, 1.0 - wrong / n, _f1(truth, pred, levels), n)


def _folds(n, n_folds, seed):
    if n < n_folds:
        raise InsufficientSampleError(f"{n} rows cannot fill {n_folds} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, n_folds)


def cross_fit_predictions(kind, d: Dataset, features, target, n_folds=5, seed=0) -> np.ndarray:
    """Out-of-fold predictions for every row of ``d``."""
    pred = None
    for held in _folds(d.n_rows, n_folds, seed):
        train = np.setdiff1d(np.arange(d.n_rows), held)
        model = fit(kind, d.take(train), features, target)
        part = model.predict(d.take(held))
        if pred is None:
            pred = np.empty(d.n_rows, dtype=part.dtype)
        pred[held] = part
    return pred


def cv_error(kind, d: Dataset, features, target, n_folds=5, seed=0) -> float:
    """Cross-validated MSE (regression) or error rate (classification)."""
    pred = cross_fit_predictions(kind, d, features, target, n_folds, seed)
    col = d.column(target)
    if col.discrete:
        truth = np.asarray(col.levels, dtype=object)[d.values[target]]
        return float(np.mean(truth != pred))
    resid = d.values[target] - pred
    return float(np.mean(resid * resid))


# ---------------------------------------------------------------------------
# Two-sample tests
# ---------------------------------------------------------------------------


def welch_t_test(xs, ys):
    """Welch's unequal-variance t-test; returns ``(t, two-sided p)``.

    With both sample variances zero the result is ``(0, 1)`` for equal means
    and ``(+/-inf, 0)`` otherwise.
    """
    x, y = np.asarray(xs, float), np.asarray(ys, float)
    if len(x) < 2 or len(y) < 2:
        raise InsufficientSampleError("each sample needs at least two values")
    vx, vy = x.var(ddof=1) / len(x), y.var(ddof=1) / len(y)
    diff = x.mean() - y.mean()
    if vx + vy == 0:
        if diff == 0:
            return 0.0, 1.0
        return math.copysign(math.inf, diff), 0.0
    t = diff / math.sqrt(vx + vy)
    dof = (vx + vy) ** 2 / (vx**2 / (len(x) - 1) + vy**2 / (len(y) - 1))
    return float(t), float(min(1.0, 2.0 * stats.t.sf(abs(t), dof)))


def f_variance_test(xs, ys):
    """Two-sided F-test for equal variances; returns ``(F, p)``."""
    x, y = np.asarray(xs, float), np.asarray(ys, float)
    if len(x) < 2 or len(y) < 2:
        raise InsufficientSampleError("each sample needs at least two values")
    vy = y.var(ddof=1)
    if vy == 0:
        raise DegenerateDataError("second sample has zero variance")
    f = x.var(ddof=1) / vy
    d1, d2 = len(x) - 1, len(y) - 1
    p = 2.0 * min(stats.f.cdf(f, d1, d2), stats.f.sf(f, d1, d2))
    return float(f), float(min(1.0, p))
