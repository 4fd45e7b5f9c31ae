"""Separating-set search for covariate-shift transfer.

:func:`sctl` finds the target's Markov blanket, then searches subsets of the
blanket (minus context variables) for sets ``S`` that make the target
independent of every context variable. Accepted sets are ranked by
cross-validated prediction error on the source domain. :func:`ess` applies
the same acceptance rule to every subset of all system variables; it is the
exponential-cost reference that :func:`sctl` must agree with.

A search that accepts nothing *abstains*: the result carries
``abstained=True`` and an empty ranking rather than raising.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

from .blanket import ALGORITHMS, MbResult, markov_blanket
from .citest import ci_for
from .data import Dataset
from .errors import BudgetExceededError, InvalidArgumentError
from .predict import cv_error, kind_for_target

__all__ = [
    "SctlConfig",
    "SeparatingSet",
    "SelectionResult",
    "sctl",
    "ess",
    "transfer_bias_decomposition",
    "to_jsonl",
    "from_jsonl",
    "ESS_VARIABLE_CAP",
    "TIE_RTOL",
]

log = logging.getLogger(__name__)

ESS_VARIABLE_CAP = 20
TIE_RTOL = 1e-6


@dataclass(frozen=True)
class SctlConfig:
    """Settings shared by :func:`sctl` and :func:`ess`.

    Parameters
    ----------
    target_column : str
    context_columns : iterable of str
    alpha : float
        Significance level for blanket discovery and for context separation.
    mb_algorithm : str
        One of ``gsmb``, ``iamb``, ``inter_iamb``, ``fast_iamb``, ``fdr_iamb``.
    regressor : str
        Predictor kind used for source-error ranking; switched to the
        classifier counterpart for a discrete target.
    max_subset_size : int, optional
        Largest subset enumerated; truncation is reported in the warnings.
    max_cond_size : int, optional
        Passed through to blanket discovery.
    cv_folds, fold_seed : int
        Cross-validation layout for the source error.
    ess_cap : int
        Largest number of candidate variables :func:`ess` accepts.
    """

    target_column: str
    context_columns: frozenset = frozenset()
    alpha: float = 0.05
    mb_algorithm: str = "iamb"
    regressor: str = "knn5"
    max_subset_size: Optional[int] = None
    max_cond_size: Optional[int] = None
    cv_folds: int = 5
    fold_seed: int = 0
    ess_cap: int = ESS_VARIABLE_CAP

    def __post_init__(self):
        object.__setattr__(self, "context_columns", frozenset(self.context_columns))
        if not 0 < self.alpha < 1:
            raise InvalidArgumentError("alpha must lie in (0, 1)")
        if self.target_column in self.context_columns:
            raise InvalidArgumentError("the target cannot be a context column")
        if self.mb_algorithm not in ALGORITHMS:
            raise InvalidArgumentError(f"unknown blanket algorithm {self.mb_algorithm!r}")
        if self.max_subset_size is not None and self.max_subset_size < 0:
            raise InvalidArgumentError("max_subset_size must be non-negative")


@dataclass(frozen=True)
class SeparatingSet:
    features: tuple
    min_context_p: float
    source_error: float

    def to_dict(self) -> dict:
        return {
            "features": list(self.features),
            "min_context_p": self.min_context_p,
            "source_error": None if math.isnan(self.source_error) else self.source_error,
        }


@dataclass
class SelectionResult:
    """Outcome of a separating-set search.

    ``ranked`` lists every accepted set, best first; ``best`` is the leading
    group whose source errors tie with the minimum. ``blanket`` is ``None``
    for :func:`ess`.
    """

    ranked: list
    best: list
    abstained: bool
    blanket: Optional[MbResult] = None
    candidates: tuple = ()
    shortcut: bool = False
    subsets_tested: int = 0
    warnings: list = field(default_factory=list)

    @property
    def accepted(self) -> list:
        return [s.features for s in self.ranked]


# ---------------------------------------------------------------------------


def _setup(d_source, d_target_features, cfg: SctlConfig, ci):
    """Resolve the CI provider and the variable universe; validate columns."""
    warnings = []
    if ci is None:
        if d_source is None:
            raise InvalidArgumentError("a source dataset or a CI provider is required")
        for name in (cfg.target_column, *cfg.context_columns):
            d_source.column(name)
        if d_target_features is not None:
            for name in cfg.context_columns:
                if name not in d_target_features:
                    raise InvalidArgumentError(f"context column {name!r} missing from target data")
        if d_target_features is not None and cfg.target_column in d_target_features:
            data = Dataset.concat([d_source, d_target_features], label="pooled")
        else:
            msg = "target rows carry no target column; blanket tests use source rows only"
            log.warning(msg)
            warnings.append(msg)
            data = d_source
        ci = ci_for(data)
    variables = tuple(sorted(ci.variables))
    missing = [v for v in (cfg.target_column, *sorted(cfg.context_columns)) if v not in variables]
    if missing:
        raise InvalidArgumentError(f"unknown variables {missing}")
    return ci, variables, warnings


def _min_context_p(ci, cfg: SctlConfig, features) -> float:
    ps = [ci(c, cfg.target_column, frozenset(features)).p_value for c in sorted(cfg.context_columns)]
    return min(ps) if ps else 1.0


def _subsets(pool, max_size):
    top = len(pool) if max_size is None else min(max_size, len(pool))
    for k in range(top + 1):
        yield from itertools.combinations(pool, k)


def _source_error(d_source, cfg: SctlConfig, features) -> float:
    if d_source is None:
        return math.nan
    kind = kind_for_target(cfg.regressor, d_source.column(cfg.target_column).discrete)
    return cv_error(kind, d_source, features, cfg.target_column, cfg.cv_folds, cfg.fold_seed)


def _rank(sets):
    """Ascending source error; near-ties go to the smaller, then lexicographically first set."""
    def key(s):
        err = math.inf if math.isnan(s.source_error) else s.source_error
        return (err, len(s.features), s.features)

    rest = sorted(sets, key=key)
    ranked, best = [], []
    while rest:
        lead = rest[0].source_error
        if math.isnan(lead):
            group = rest
        else:
            tol = TIE_RTOL * abs(lead)
            group = [s for s in rest if s.source_error - lead <= tol]
        group.sort(key=lambda s: (len(s.features), s.features))
        if not ranked:
            best = list(group)
        ranked += group
        rest = [s for s in rest if s not in group]
    return ranked, best


def _search(pool, d_source, cfg, ci, warnings):
    accepted, tested = [], 0
    if cfg.max_subset_size is not None and cfg.max_subset_size < len(pool):
        msg = f"subsets capped at size {cfg.max_subset_size} of {len(pool)} candidates"
        log.warning(msg)
        warnings.append(msg)
    for sub in _subsets(pool, cfg.max_subset_size):
        tested += 1
        p = _min_context_p(ci, cfg, sub)
        if p > cfg.alpha:
            accepted.append((sub, p))
    sets = [SeparatingSet(sub, p, _source_error(d_source, cfg, sub)) for sub, p in accepted]
    return sets, tested


def sctl(d_source: Optional[Dataset], d_target_features: Optional[Dataset], cfg: SctlConfig,
         ci=None) -> SelectionResult:
    """Rank subsets of the target's Markov blanket that separate it from every context.

    Parameters
    ----------
    d_source : Dataset or None
        Labelled source-domain data; ``None`` only with an explicit ``ci``,
        in which case source errors are NaN and ranking is by size.
    d_target_features : Dataset or None
        Target-domain rows. They join blanket discovery only when they carry
        the target column.
    cfg : SctlConfig
    ci : callable, optional
        CI provider; defaults to Fisher-z or G-squared over the data.

    Returns
    -------
    SelectionResult
    """
    ci, variables, warnings = _setup(d_source, d_target_features, cfg, ci)
    t = cfg.target_column
    mb = markov_blanket(cfg.mb_algorithm, ci, variables, t, cfg.alpha, cfg.max_cond_size)
    blanket = tuple(sorted(mb.blanket))
    if not (mb.blanket & cfg.context_columns):
        p = _min_context_p(ci, cfg, blanket)
        if p <= cfg.alpha:
            msg = f"blanket returned without context search, yet min context p = {p:.4g} <= alpha"
            log.warning(msg)
            warnings.append(msg)
        s = SeparatingSet(blanket, p, _source_error(d_source, cfg, blanket))
        return SelectionResult([s], [s], False, mb, blanket, True, 0, warnings)
    pool = tuple(v for v in blanket if v not in cfg.context_columns)
    sets, tested = _search(pool, d_source, cfg, ci, warnings)
    ranked, best = _rank(sets)
    return SelectionResult(ranked, best, not ranked, mb, pool, False, tested, warnings)


def ess(d_source: Optional[Dataset], d_target_features: Optional[Dataset], cfg: SctlConfig,
        ci=None) -> SelectionResult:
    """Exhaustive search over all subsets of the non-context, non-target variables.

    Raises
    ------
    BudgetExceededError
        When there are more than ``cfg.ess_cap`` candidate variables.
    """
    ci, variables, warnings = _setup(d_source, d_target_features, cfg, ci)
    pool = tuple(v for v in variables if v != cfg.target_column and v not in cfg.context_columns)
    if len(pool) > cfg.ess_cap:
        raise BudgetExceededError(
            f"exhaustive search over {len(pool)} variables exceeds the cap of {cfg.ess_cap}"
        )
    sets, tested = _search(pool, d_source, cfg, ci, warnings)
    ranked, best = _rank(sets)
    return SelectionResult(ranked, best, not ranked, None, pool, False, tested, warnings)


def transfer_bias_decomposition(t_hat_full_target: float, t_hat_s_source: float, t_hat_s_target: float):
    """Split the bias of a restricted source model into transfer and incomplete-information parts.

    Returns
    -------
    (total, transfer, incomplete)
        ``transfer = s_target - s_source``, ``incomplete = full_target - s_target``
        and ``total = transfer + incomplete``.
    """
    transfer = t_hat_s_target - t_hat_s_source
    incomplete = t_hat_full_target - t_hat_s_target
    return transfer + incomplete, transfer, incomplete


def to_jsonl(sets) -> str:
    return "".join(json.dumps(s.to_dict(), sort_keys=True) + "\n" for s in sets)


def from_jsonl(text: str) -> list:
    out = []
    for line in text.splitlines():
        if line.strip():
            rec = json.loads(line)
            err = rec["source_error"]
            out.append(SeparatingSet(tuple(rec["features"]), rec["min_context_p"],
                                     math.nan if err is None else err))
    return out
