"""Command-line entry point.

Subcommands::

    sctl generate CONFIG.json OUT_DIR
    sctl mb DATA.csv --target T [--algo iamb] [--alpha 0.05] [--graph G.txt]
    sctl select SOURCE.csv TARGET.csv --target T --contexts C1,C2 [--ess]
    sctl eval SOURCE.csv TARGET.csv --target T --features X,P [--predictor knn5]
    sctl bench SUITE.json --out DIR [--jobs N]
    sctl replay MANIFEST.json --out DIR

Exit codes: 0 success, 2 input error, 3 no separating set (abstention),
4 exhaustive-search budget refusal. ``replay`` exits 1 when an output digest
differs from the manifest.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import __version__
from .bench import run_suite
from .blanket import ALGORITHMS, markov_blanket
from .citest import OracleCI, ci_for
from .data import read_csv, write_csv
from .errors import BudgetExceededError
from .graph import read_graph
from .predict import evaluate, fit, kind_for_target
from .selection import SctlConfig, ess, sctl, to_jsonl
from .synth import generate_scenario, scenario_from_dict, scenario_metadata

__all__ = ["main", "build_parser"]

log = logging.getLogger("sctl")

EXIT_OK, EXIT_INPUT, EXIT_ABSTAIN, EXIT_BUDGET = 0, 2, 3, 4
EVAL_FIELDS = ("scenario", "features", "mse", "sse", "accuracy", "f1", "wall_seconds")


class InputError(Exception):
    pass


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _write_manifest(out_dir: Path, command, config, config_path, seed, inputs, outputs, deterministic, wall):
    manifest = {
        "command": command,
        "config_path": str(Path(config_path).resolve()) if config_path else None,
        "config": config,
        "seed": seed,
        "tool_version": __version__,
        "input_digests": {str(p): _digest(p) for p in inputs},
        "output_digests": {Path(p).name: _digest(p) for p in outputs},
        "deterministic_outputs": sorted(Path(p).name for p in deterministic),
        "wall_seconds": round(wall, 6),
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _split(text):
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _generate(config: dict, out_dir: Path, seed):
    if seed is not None:
        config = {**config, "seed": seed}
    sc = scenario_from_dict(config)
    source, targets = generate_scenario(sc)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / "source.csv"]
    write_csv(source, paths[0])
    for i, t in enumerate(targets, start=1):
        paths.append(out_dir / f"target_{i:02d}.csv")
        write_csv(t, paths[-1])
    meta = out_dir / "scenario.meta.json"
    meta.write_text(json.dumps(scenario_metadata(sc), indent=2, sort_keys=True) + "\n")
    return paths + [meta]


def cmd_generate(args):
    start = time.perf_counter()
    config = _load_json(args.config)
    out = Path(args.out_dir)
    paths = _generate(config, out, args.seed)
    _write_manifest(out, "generate", config, args.config, args.seed, [args.config], paths, paths,
                    time.perf_counter() - start)
    print(f"wrote {len(paths) - 2} target dataset(s), source.csv and scenario.meta.json to {out}")
    return EXIT_OK


def cmd_mb(args):
    if args.graph:
        ci = OracleCI(read_graph(args.graph))
    elif args.data:
        ci = ci_for(read_csv(args.data))
    else:
        raise InputError("give a data file or --graph")
    res = markov_blanket(args.algo, ci, ci.variables, args.target, args.alpha, args.max_cond)
    print("blanket: " + " ".join(sorted(res.blanket)))
    print(f"tests: {res.test_count}")
    sys.stdout.write(res.trace_text())
    return EXIT_OK


def cmd_select(args):
    cfg = SctlConfig(args.target, _split(args.contexts), alpha=args.alpha, mb_algorithm=args.algo,
                     regressor=args.regressor, max_subset_size=args.max_subset_size,
                     fold_seed=args.seed or 0)
    source = read_csv(args.source, domain_label="source") if args.source else None
    target = read_csv(args.target_data, domain_label="target") if args.target_data else None
    ci = OracleCI(read_graph(args.graph)) if args.graph else None
    res = (ess if args.ess else sctl)(source, target, cfg, ci)
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if res.abstained:
        print("no separating set found; abstaining from prediction", file=sys.stderr)
        return EXIT_ABSTAIN
    text = to_jsonl(res.ranked if args.all else res.best)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _fmt(x):
    return "nan" if isinstance(x, float) and math.isnan(x) else repr(x) if isinstance(x, float) else str(x)


def cmd_eval(args):
    source = read_csv(args.source, domain_label="source")
    target = read_csv(args.target_data, domain_label="target")
    if args.features == "all":
        features = [v for v in source.names if v != args.target]
    else:
        features = _split(args.features)
    missing = [f for f in [*features, args.target] if f not in source or f not in target]
    if missing:
        raise InputError(f"missing column(s) {missing}")
    start = time.perf_counter()
    kind = kind_for_target(args.predictor, source.column(args.target).discrete)
    m = evaluate(fit(kind, source, features, args.target), target)
    wall = time.perf_counter() - start
    row = [args.scenario or Path(args.target_data).stem, "+".join(features), m.mse, m.sse, m.accuracy, m.f1,
           round(wall, 6)]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(EVAL_FIELDS)
    w.writerow([_fmt(x) for x in row])
    if args.out:
        new = not Path(args.out).exists()
        with open(args.out, "a", newline="") as fh:
            fw = csv.writer(fh, lineterminator="\n")
            if new:
                fw.writerow(EVAL_FIELDS)
            fw.writerow([_fmt(x) for x in row])
    return EXIT_OK


def _bench(suite, out, jobs, seed):
    paths = run_suite(suite, out, jobs=jobs, seed=seed)
    return [paths["results"], paths["timings"], paths["report"]], [paths["results"]]


def cmd_bench(args):
    start = time.perf_counter()
    suite = _load_json(args.suite)
    out = Path(args.out)
    outputs, deterministic = _bench(suite, out, args.jobs, args.seed)
    _write_manifest(out, "bench", suite, args.suite, args.seed, [args.suite], outputs, deterministic,
                    time.perf_counter() - start)
    print(f"wrote {', '.join(p.name for p in outputs)} to {out}")
    return EXIT_OK


def cmd_replay(args):
    manifest = _load_json(args.manifest)
    out = Path(args.out)
    command, config, seed = manifest["command"], manifest["config"], manifest["seed"]
    if command == "generate":
        _generate(config, out, seed)
    elif command == "bench":
        _bench(config, out, args.jobs, seed)
    else:
        raise InputError(f"cannot replay command {command!r}")
    ok = True
    for name in manifest["deterministic_outputs"]:
        same = _digest(out / name) == manifest["output_digests"][name]
        ok &= same
        print(f"{'match' if same else 'MISMATCH'} {name}")
    return EXIT_OK if ok else 1


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="sctl", description="Causally invariant feature selection.")
    p.add_argument("--version", action="version", version=f"sctl {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None, help="global seed override")
        return sp

    g = common(sub.add_parser("generate", help="sample source and target datasets from a scenario"))
    g.add_argument("config")
    g.add_argument("out_dir")
    g.set_defaults(func=cmd_generate)

    m = common(sub.add_parser("mb", help="Markov blanket of a target variable"))
    m.add_argument("data", nargs="?")
    m.add_argument("--target", required=True)
    m.add_argument("--algo", default="iamb", choices=sorted(ALGORITHMS))
    m.add_argument("--alpha", type=float, default=0.05)
    m.add_argument("--max-cond", type=int, default=None)
    m.add_argument("--graph", help="answer CI queries from this graph instead of data")
    m.set_defaults(func=cmd_mb)

    s = common(sub.add_parser("select", help="rank separating feature sets"))
    s.add_argument("source", nargs="?")
    s.add_argument("target_data", nargs="?")
    s.add_argument("--target", required=True)
    s.add_argument("--contexts", required=True, help="comma-separated context columns")
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--algo", default="iamb", choices=sorted(ALGORITHMS))
    s.add_argument("--regressor", default="knn5")
    s.add_argument("--max-subset-size", type=int, default=None)
    s.add_argument("--graph", help="answer CI queries from this graph instead of data")
    s.add_argument("--ess", action="store_true", help="exhaustive search over all variables")
    s.add_argument("--all", action="store_true", help="emit every accepted set, not just the best")
    s.add_argument("--out", help="also write the JSON lines here")
    s.set_defaults(func=cmd_select)

    e = common(sub.add_parser("eval", help="fit on source, score on target"))
    e.add_argument("source")
    e.add_argument("target_data")
    e.add_argument("--target", required=True)
    e.add_argument("--features", required=True, help="comma-separated, or 'all'")
    e.add_argument("--predictor", default="knn5")
    e.add_argument("--scenario", default=None)
    e.add_argument("--out", help="append the row to this CSV")
    e.set_defaults(func=cmd_eval)

    b = common(sub.add_parser("bench", help="run a benchmark suite"))
    b.add_argument("suite")
    b.add_argument("--out", required=True)
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("replay", help="re-run a manifest and compare output digests")
    r.add_argument("manifest")
    r.add_argument("--out", required=True)
    r.add_argument("--jobs", type=int, default=1)
    r.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, ValueError, OSError, KeyError) as exc:
        problems = getattr(exc, "problems", None)
        if problems:
            print("error: invalid configuration", file=sys.stderr)
            for line in problems:
                print(f"  {line}", file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
