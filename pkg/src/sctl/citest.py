"""Conditional independence tests.

Every test answers "is ``x`` independent of ``y`` given ``s``?" with a
:class:`CiResult`. Small p-values mean dependence.

The module exposes plain functions over a :class:`~sctl.data.Dataset` and
three *providers*, callables ``ci(x, y, s) -> CiResult`` that the blanket
algorithms consume:

- :class:`FisherZ` for continuous data (caches the correlation matrix),
- :class:`GSquared` for discrete data,
- :class:`OracleCI` which reads independence off an ADMG.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.linalg import solve_triangular

from .data import Dataset
from .errors import DegenerateDataError, InsufficientSampleError, InvalidArgumentError
from .graph import Admg, m_separated

__all__ = [
    "CiResult",
    "R_CLAMP",
    "PIVOT_TOL",
    "partial_correlation",
    "fisher_z_from_r",
    "fisher_z_test",
    "g2_from_counts",
    "g2_mi_test",
    "oracle_ci_test",
    "FisherZ",
    "GSquared",
    "OracleCI",
    "ci_for",
]

R_CLAMP = 0.999999
PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class CiResult:
    statistic: float
    dof_or_n: float
    p_value: float

    def __post_init__(self):
        if not (0.0 <= self.p_value <= 1.0):
            raise ValueError(f"p-value {self.p_value} outside [0, 1]")
        if not math.isfinite(self.statistic):
            raise ValueError("statistic must be finite")


def _check_args(d: Dataset, x, y, s, kind):
    s = tuple(sorted(set(s)))
    if x == y:
        raise InvalidArgumentError("x and y must differ")
    if x in s or y in s:
        raise InvalidArgumentError("x and y must not be conditioned on")
    for name in (x, y, *s):
        col = d.column(name)
        if (kind == "discrete") != col.discrete:
            raise InvalidArgumentError(f"column {name!r} is not {kind}")
    return s


# ---------------------------------------------------------------------------
# Partial correlation and Fisher's z
# ---------------------------------------------------------------------------


def _partial_from_corr(R: np.ndarray, i: int, j: int, cond) -> float:
    """Partial correlation of ``i`` and ``j`` given ``cond`` from a correlation matrix."""
    if not cond:
        r = R[i, j]
    else:
        cond = list(cond)
        Rss = R[np.ix_(cond, cond)]
        try:
            L = np.linalg.cholesky(Rss)
        except np.linalg.LinAlgError:
            raise DegenerateDataError("singular conditioning correlation matrix") from None
        if np.min(np.diag(L)) ** 2 < PIVOT_TOL:
            raise DegenerateDataError("singular conditioning correlation matrix")
        B = solve_triangular(L, R[np.ix_(cond, [i, j])], lower=True)
        C = R[np.ix_([i, j], [i, j])] - B.T @ B
        if C[0, 0] < PIVOT_TOL or C[1, 1] < PIVOT_TOL:
            raise DegenerateDataError("a tested variable is determined by the conditioning set")
        r = C[0, 1] / math.sqrt(C[0, 0] * C[1, 1])
    if not math.isfinite(r):
        raise DegenerateDataError("correlation undefined (constant column?)")
    return float(min(max(r, -R_CLAMP), R_CLAMP))


def _corr(X: np.ndarray) -> np.ndarray:
    X = X - X.mean(axis=0)
    sd = np.sqrt((X * X).sum(axis=0))
    with np.errstate(invalid="ignore", divide="ignore"):
        Xs = X / sd
        R = Xs.T @ Xs
    R[:, sd <= 0] = np.nan
    R[sd <= 0, :] = np.nan
    np.fill_diagonal(R, np.where(sd > 0, 1.0, np.nan))
    return R


def partial_correlation(d: Dataset, x, y, s=()) -> float:
    """Sample partial correlation of ``x`` and ``y`` given ``s``, clamped to +/-0.999999."""
    s = _check_args(d, x, y, s, "continuous")
    if d.n_rows < len(s) + 4:
        raise InsufficientSampleError(f"need at least {len(s) + 4} rows, have {d.n_rows}")
    names = [x, y, *s]
    R = _corr(np.column_stack([d.values[n] for n in names]))
    return _partial_from_corr(R, 0, 1, range(2, len(names)))


def fisher_z_from_r(r: float, n: int, k: int) -> CiResult:
    """Fisher-z test of a partial correlation ``r`` from ``n`` rows given ``k`` variables."""
    n_eff = n - k - 3
    if n_eff < 1:
        raise InsufficientSampleError(f"effective sample size {n_eff} < 1")
    r = min(max(r, -R_CLAMP), R_CLAMP)
    stat = math.sqrt(n_eff) * abs(math.atanh(r))
    p = float(min(1.0, 2.0 * stats.norm.sf(stat)))
    return CiResult(stat, float(n_eff), p)


def fisher_z_test(d: Dataset, x, y, s=()) -> CiResult:
    s = tuple(sorted(set(s)))
    r = partial_correlation(d, x, y, s)
    return fisher_z_from_r(r, d.n_rows, len(s))


# ---------------------------------------------------------------------------
# G-squared / mutual information
# ---------------------------------------------------------------------------


def g2_from_counts(counts) -> CiResult:
    """G-squared test on a ``(|x|, |y|, strata)`` count array (2-D means one stratum).

    Strata with no observations do not contribute degrees of freedom; the
    minimum is one.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.ndim == 2:
        counts = counts[:, :, None]
    total = counts.sum()
    if total <= 0:
        raise InsufficientSampleError("contingency table is empty")
    nx, ny, nz = counts.shape
    n_z = counts.sum(axis=(0, 1))
    n_xz = counts.sum(axis=1)
    n_yz = counts.sum(axis=0)
    expected = n_xz[:, None, :] * n_yz[None, :, :]
    mask = counts > 0
    g2 = 2.0 * float(np.sum(counts[mask] * np.log(counts[mask] * np.broadcast_to(n_z, counts.shape)[mask] / expected[mask])))
    g2 = max(g2, 0.0)
    observed_strata = int(np.count_nonzero(n_z))
    dof = max(1, (nx - 1) * (ny - 1) * observed_strata)
    return CiResult(g2, float(dof), float(stats.chi2.sf(g2, dof)))


def _stratum_codes(d: Dataset, s):
    if not s:
        return np.zeros(d.n_rows, dtype=np.int64), 1
    code = np.zeros(d.n_rows, dtype=np.int64)
    for name in s:
        code = code * len(d.column(name).levels) + d.values[name]
    uniq, inv = np.unique(code, return_inverse=True)
    return inv, len(uniq)


def _contingency(d: Dataset, x, y, s):
    z, nz = _stratum_codes(d, s)
    kx, ky = len(d.column(x).levels), len(d.column(y).levels)
    flat = (d.values[x] * ky + d.values[y]) * nz + z
    return np.bincount(flat, minlength=kx * ky * nz).reshape(kx, ky, nz)


def g2_mi_test(d: Dataset, x, y, s=()) -> CiResult:
    """G-squared test, ``2 * N * MI(x; y | s)`` in nats, against chi-squared."""
    s = _check_args(d, x, y, s, "discrete")
    return g2_from_counts(_contingency(d, x, y, s))


def mutual_information(d: Dataset, x, y, s=()) -> float:
    """Conditional mutual information in nats (plug-in estimate)."""
    res = g2_mi_test(d, x, y, s)
    return res.statistic / (2.0 * d.n_rows)


# ---------------------------------------------------------------------------
# Graph oracle
# ---------------------------------------------------------------------------


def oracle_ci_test(g: Admg, x, y, s=()) -> CiResult:
    """p = 1 when ``s`` m-separates ``x`` and ``y`` in ``g``, else p = 0."""
    sep = m_separated(g, {x}, {y}, set(s))
    return CiResult(0.0 if sep else 1.0, 0.0, 1.0 if sep else 0.0)


# ---------------------------------------------------------------------------
# Providers
# ---------------------------------------------------------------------------


class FisherZ:
    """Fisher-z provider over the continuous columns of a dataset."""

    def __init__(self, d: Dataset):
        self.dataset = d
        self.variables = tuple(c.name for c in d.columns if not c.discrete)
        if len(self.variables) != len(d.columns):
            raise InvalidArgumentError("Fisher-z needs all columns continuous")
        self._pos = {n: i for i, n in enumerate(self.variables)}
        self._R = _corr(np.column_stack([d.values[n] for n in self.variables]))
        self.n = d.n_rows

    def __call__(self, x, y, s=()) -> CiResult:
        s = tuple(sorted(set(s)))
        if x == y or x in s or y in s:
            raise InvalidArgumentError("x, y and s must be disjoint")
        for v in (x, y, *s):
            if v not in self._pos:
                raise InvalidArgumentError(f"unknown column {v!r}")
        if self.n < len(s) + 4:
            raise InsufficientSampleError(f"need at least {len(s) + 4} rows, have {self.n}")
        r = _partial_from_corr(self._R, self._pos[x], self._pos[y], [self._pos[v] for v in s])
        return fisher_z_from_r(r, self.n, len(s))


class GSquared:
    """G-squared provider over the discrete columns of a dataset."""

    def __init__(self, d: Dataset):
        if any(not c.discrete for c in d.columns):
            raise InvalidArgumentError("G-squared needs all columns discrete")
        self.dataset = d
        self.variables = d.names

    def __call__(self, x, y, s=()) -> CiResult:
        return g2_mi_test(self.dataset, x, y, s)


class OracleCI:
    """Exact answers from a known graph; stands in for a faithful distribution."""

    def __init__(self, g: Admg):
        self.graph = g
        self.variables = g.vertices

    def __call__(self, x, y, s=()) -> CiResult:
        return oracle_ci_test(self.graph, x, y, s)


def ci_for(d: Dataset):
    """The matching data-driven provider: Fisher-z or G-squared by column kind."""
    kinds = {c.discrete for c in d.columns}
    if kinds == {False}:
        return FisherZ(d)
    if kinds == {True}:
        return GSquared(d)
    raise InvalidArgumentError("mixed continuous/discrete columns have no matching test")
