"""Markov blanket discovery from conditional independence tests.

All algorithms take a CI provider ``ci(x, y, s) -> CiResult``, the candidate
variables, the target and a significance level, and return an
:class:`MbResult` whose trace replays every admission and removal. Candidate
scans run in lexicographic order and association is ranked by ascending
p-value with lexicographic tie-break, so runs are reproducible.

``max_cond_size`` bounds the conditioning set; a test that would exceed it is
skipped, treated as independent and logged as ``skipped``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "MbResult",
    "TraceEntry",
    "gsmb",
    "iamb",
    "inter_iamb",
    "fast_iamb",
    "fdr_iamb",
    "ALGORITHMS",
    "markov_blanket",
    "benjamini_hochberg",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TraceEntry:
    phase: str  # "grow" | "shrink"
    candidate: str
    p_value: float
    action: str  # "admitted" | "removed" | "skipped"

    def __str__(self):
        return f"{self.phase} {self.candidate} p={self.p_value:.4g} {self.action}"


@dataclass
class MbResult:
    blanket: frozenset
    test_count: int = 0
    trace: list = field(default_factory=list)

    def replay(self) -> frozenset:
        s = set()
        for e in self.trace:
            if e.action == "admitted":
                s.add(e.candidate)
            elif e.action == "removed":
                s.discard(e.candidate)
        return frozenset(s)

    def trace_text(self) -> str:
        return "".join(f"{e}\n" for e in self.trace)


class _Run:
    """Shared bookkeeping: counted tests, the running set, and the trace."""

    def __init__(self, ci, variables, target, alpha, max_cond_size):
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        variables = sorted(set(variables))
        if target not in variables:
            raise ValueError(f"target {target!r} is not among the variables")
        self.ci = ci
        self.t = target
        self.alpha = alpha
        self.max_cond = max_cond_size
        self.candidates = [v for v in variables if v != target]
        self.s: set = set()
        self.result = MbResult(frozenset())

    def p(self, x, cond) -> Optional[float]:
        """p-value of ``x`` vs target given ``cond``; ``None`` when skipped."""
        self.result.test_count += 1
        if self.max_cond is not None and len(cond) > self.max_cond:
            return None
        return self.ci(x, self.t, frozenset(cond)).p_value

    def log(self, phase, x, p, action):
        self.result.trace.append(TraceEntry(phase, x, 1.0 if p is None else p, action))

    def admit(self, x, p):
        self.s.add(x)
        self.log("grow", x, p, "admitted")

    def outside(self):
        return [v for v in self.candidates if v not in self.s]

    def scores(self):
        """p-values of all outside candidates; skipped tests count as independent."""
        out = []
        for x in self.outside():
            p = self.p(x, self.s)
            if p is None:
                self.log("grow", x, 1.0, "skipped")
                p = 1.0
            out.append((p, x))
        out.sort()
        return out

    def shrink(self):
        changed = True
        while changed:
            changed = False
            for x in sorted(self.s):
                p = self.p(x, self.s - {x})
                if p is None:
                    self.log("shrink", x, 1.0, "skipped")
                    p = 1.0
                if p > self.alpha:
                    self.s.discard(x)
                    self.log("shrink", x, p, "removed")
                    changed = True

    def done(self) -> MbResult:
        self.result.blanket = frozenset(self.s)
        return self.result


def gsmb(ci, variables, target, alpha=0.05, max_cond_size=None) -> MbResult:
    """Grow-shrink: admit any dependent candidate as soon as it is seen."""
    run = _Run(ci, variables, target, alpha, max_cond_size)
    grown = True
    while grown:
        grown = False
        for x in run.outside():
            p = run.p(x, run.s)
            if p is None:
                run.log("grow", x, 1.0, "skipped")
                continue
            if p <= alpha:
                run.admit(x, p)
                grown = True
    run.shrink()
    return run.done()


def iamb(ci, variables, target, alpha=0.05, max_cond_size=None) -> MbResult:
    """Incremental association: admit the single most associated candidate per pass."""
    run = _Run(ci, variables, target, alpha, max_cond_size)
    while True:
        scores = run.scores()
        if not scores or scores[0][0] > alpha:
            break
        run.admit(scores[0][1], scores[0][0])
    run.shrink()
    return run.done()


def _loop_guard(run, seen):
    state = frozenset(run.s)
    if state in seen:
        log.warning("blanket search for %s revisited a candidate set; stopping", run.t)
        return True
    seen.add(state)
    return False


def inter_iamb(ci, variables, target, alpha=0.05, max_cond_size=None) -> MbResult:
    """IAMB with a full shrink after every admission."""
    run = _Run(ci, variables, target, alpha, max_cond_size)
    seen = {frozenset()}
    while True:
        scores = run.scores()
        if not scores or scores[0][0] > alpha:
            break
        run.admit(scores[0][1], scores[0][0])
        run.shrink()
        if _loop_guard(run, seen):
            break
    return run.done()


FAST_IAMB_CAP = 2


def fast_iamb(ci, variables, target, alpha=0.05, max_cond_size=None) -> MbResult:
    """Speculative IAMB: admit up to two dependent candidates per pass, then shrink."""
    run = _Run(ci, variables, target, alpha, max_cond_size)
    seen = {frozenset()}
    while True:
        dependent = [(p, x) for p, x in run.scores() if p <= alpha]
        if not dependent:
            break
        for p, x in dependent[:FAST_IAMB_CAP]:
            run.admit(x, p)
        run.shrink()
        if _loop_guard(run, seen):
            break
    return run.done()


def benjamini_hochberg(pvalues, q) -> np.ndarray:
    """Boolean mask of hypotheses rejected by Benjamini-Hochberg at level ``q``."""
    p = np.asarray(pvalues, dtype=float)
    m = len(p)
    if m == 0:
        return np.zeros(0, dtype=bool)
    order = np.argsort(p, kind="stable")
    passed = p[order] <= q * np.arange(1, m + 1) / m
    reject = np.zeros(m, dtype=bool)
    if passed.any():
        k = int(np.nonzero(passed)[0].max())
        reject[order[: k + 1]] = True
    return reject


def fdr_iamb(ci, variables, target, alpha=0.05, max_cond_size=None) -> MbResult:
    """IAMB whose admission step is gated by Benjamini-Hochberg over the candidates."""
    run = _Run(ci, variables, target, alpha, max_cond_size)
    while True:
        scores = run.scores()
        if not scores:
            break
        reject = benjamini_hochberg([p for p, _ in scores], alpha)
        if not reject[0]:
            break
        run.admit(scores[0][1], scores[0][0])
    run.shrink()
    return run.done()


ALGORITHMS: dict[str, Callable[..., MbResult]] = {
    "gsmb": gsmb,
    "iamb": iamb,
    "inter_iamb": inter_iamb,
    "fast_iamb": fast_iamb,
    "fdr_iamb": fdr_iamb,
}


def markov_blanket(algorithm: str, ci, variables, target, alpha=0.05, max_cond_size=None) -> MbResult:
    try:
        fn = ALGORITHMS[algorithm]
    except KeyError:
        raise ValueError(f"unknown blanket algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}") from None
    return fn(ci, variables, target, alpha, max_cond_size)
