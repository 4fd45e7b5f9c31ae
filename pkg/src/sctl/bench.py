"""Benchmark suites: separating sets vs. all features vs. exhaustive search.

A suite is a JSON document::

    {
      "name": "small-severe",
      "seed": 0,
      "scenarios": [{"builtin": "small", "replicates": 8}, {...scenario...}],
      "methods": ["sctl", "all_features", "ess"],
      "regressor": "knn5",
      "alpha": 0.05,
      "mb_algorithm": "iamb",
      "ess_cap": 20
    }

Scenarios without their own ``seed`` get ``suite seed + position``. For every
scenario and replicate each method picks a feature set using the source data
and the unlabelled target rows, fits the regressor on the source and scores
it on the labelled target rows.

Outputs: ``results.csv`` (deterministic, sorted, no timings),
``timings.csv`` and ``report.md`` (per-method summaries, Welch and F test
p-values for every method pair, wall times).
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .errors import BudgetExceededError, DegenerateDataError, InsufficientSampleError, ValidationError
from .predict import evaluate, fit, kind_for_target, f_variance_test, welch_t_test
from .selection import SctlConfig, ess, sctl
from .synth import generate_scenario, scenario_from_dict

__all__ = ["METHODS", "RESULT_FIELDS", "run_suite", "load_suite_scenarios", "format_results"]

log = logging.getLogger(__name__)

METHODS = ("sctl", "all_features", "ess")
RESULT_FIELDS = ("scenario", "replicate", "method", "status", "features", "mse", "sse", "accuracy", "f1")
SUITE_KEYS = {"name", "seed", "scenarios", "methods", "regressor", "alpha", "mb_algorithm", "ess_cap"}


def load_suite_scenarios(suite: dict, seed=None):
    unknown = set(suite) - SUITE_KEYS
    problems = [f"{k}: unknown suite field" for k in sorted(unknown)]
    if not suite.get("scenarios"):
        problems.append("scenarios: at least one scenario is required")
    bad = [m for m in suite.get("methods", METHODS) if m not in METHODS]
    problems += [f"methods: unknown method {m!r}" for m in bad]
    if problems:
        raise ValidationError(problems)
    base = suite.get("seed", 0) if seed is None else seed
    out, names = [], set()
    for i, entry in enumerate(suite["scenarios"]):
        entry = dict(entry)
        entry.setdefault("seed", base + i)
        try:
            sc = scenario_from_dict(entry)
        except ValidationError as exc:
            raise ValidationError([f"scenarios[{i}].{p}" for p in exc.problems]) from None
        name = sc.name if sc.name not in names else f"{sc.name}#{i}"
        names.add(name)
        out.append((name, sc))
    return out


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def _score(source, target, features, target_col, regressor):
    kind = kind_for_target(regressor, source.column(target_col).discrete)
    m = evaluate(fit(kind, source, features, target_col), target)
    return {"mse": m.mse, "sse": m.sse, "accuracy": m.accuracy, "f1": m.f1}


def _run_job(job):
    """All methods on one (scenario, replicate); returns result rows and timings."""
    name, rep, source, target, cfg, methods = job
    t = cfg.target_column
    unlabelled = target.drop([t])
    rows, times = [], []
    for method in methods:
        start = time.perf_counter()
        row = {"scenario": name, "replicate": rep, "method": method, "status": "ok", "features": "",
               "mse": math.nan, "sse": math.nan, "accuracy": math.nan, "f1": math.nan}
        try:
            if method == "all_features":
                feats = tuple(v for v in source.names if v != t)
            else:
                res = (sctl if method == "sctl" else ess)(source, unlabelled, cfg)
                feats = None if res.abstained else res.best[0].features
            if feats is None:
                row["status"] = "abstained"
            else:
                row["features"] = "+".join(feats)
                row.update(_score(source, target, feats, t, cfg.regressor))
        except BudgetExceededError:
            row["status"] = "budget_refused"
        times.append((name, rep, method, time.perf_counter() - start))
        rows.append(row)
    return rows, times


def format_results(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_FIELDS)
    for r in sorted(rows, key=lambda r: (r["scenario"], r["replicate"], r["method"])):
        w.writerow([_fmt(r[k]) for k in RESULT_FIELDS])
    return buf.getvalue()


def _pair_tests(a, b):
    try:
        t, tp = welch_t_test(a, b)
    except (InsufficientSampleError, DegenerateDataError):
        t, tp = math.nan, math.nan
    try:
        f, fp = f_variance_test(a, b)
    except (InsufficientSampleError, DegenerateDataError):
        f, fp = math.nan, math.nan
    return t, tp, f, fp


def _report(suite_name, rows, times, methods) -> str:
    def g(x):
        return "n/a" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.4g}"

    lines = [f"# Benchmark report: {suite_name}", ""]
    wall = {}
    for s, _, m, sec in times:
        wall[(s, m)] = wall.get((s, m), 0.0) + sec
    for scen in sorted({r["scenario"] for r in rows}):
        sub = [r for r in rows if r["scenario"] == scen]
        lines += [f"## {scen}", "",
                  "| method | scored | mean mse | sd mse | abstained | budget_refused | wall seconds |",
                  "|---|---|---|---|---|---|---|"]
        mses = {}
        for m in methods:
            mr = sorted((r for r in sub if r["method"] == m), key=lambda r: r["replicate"])
            mses[m] = {r["replicate"]: r["mse"] for r in mr if r["status"] == "ok"}
            vals = list(mses[m].values())
            lines.append(
                f"| {m} | {len(vals)} | {g(float(np.mean(vals)) if vals else None)} "
                f"| {g(float(np.std(vals, ddof=1)) if len(vals) > 1 else None)} "
                f"| {sum(r['status'] == 'abstained' for r in mr)} "
                f"| {sum(r['status'] == 'budget_refused' for r in mr)} | {wall.get((scen, m), 0.0):.3f} |"
            )
        lines += ["", "| method A | method B | pairs | welch t | welch p | F | F p |", "|---|---|---|---|---|---|---|"]
        for a, b in itertools.combinations(methods, 2):
            common = sorted(set(mses[a]) & set(mses[b]))
            xa = [mses[a][i] for i in common]
            xb = [mses[b][i] for i in common]
            t, tp, f, fp = _pair_tests(xa, xb)
            lines.append(f"| {a} | {b} | {len(common)} | {g(t)} | {g(tp)} | {g(f)} | {g(fp)} |")
        lines.append("")
    return "\n".join(lines)


def run_suite(suite: dict, out_dir, jobs: int = 1, seed=None) -> dict:
    """Run a suite and write its outputs; returns ``{name: path}``."""
    scenarios = load_suite_scenarios(suite, seed)
    methods = tuple(suite.get("methods", METHODS))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    work = []
    for name, sc in scenarios:
        cfg = SctlConfig(
            sc.spec.target_vertex,
            sc.spec.context_vertices,
            alpha=suite.get("alpha", 0.05),
            mb_algorithm=suite.get("mb_algorithm", "iamb"),
            regressor=suite.get("regressor", "knn5"),
            ess_cap=suite.get("ess_cap", 20),
        )
        source, targets = generate_scenario(sc)
        work += [(name, i, source, tgt, cfg, methods) for i, tgt in enumerate(targets, start=1)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_run_job, work))
    else:
        results = [_run_job(w) for w in work]
    rows = [r for rs, _ in results for r in rs]
    times = sorted(t for _, ts in results for t in ts)
    paths = {"results": out / "results.csv", "timings": out / "timings.csv", "report": out / "report.md"}
    paths["results"].write_text(format_results(rows))
    with open(paths["timings"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("scenario", "replicate", "method", "wall_seconds"))
        w.writerows((s, r, m, f"{sec:.6f}") for s, r, m, sec in times)
    paths["report"].write_text(_report(suite.get("name", "suite"), rows, times, methods))
    return paths
