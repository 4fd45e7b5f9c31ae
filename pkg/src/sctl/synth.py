"""Ground-truth scenarios: structural mechanisms, context shifts and replicates.

A :class:`GroundTruthSpec` assigns a mechanism to every vertex, observed or
latent. Directed edges are read off the mechanisms' parents; latent vertices
are roots whose observed children become pairwise bidirected in the
projected graph (:meth:`GroundTruthSpec.projected`).

Two mechanism families exist:

- :class:`LinearGaussian`: ``v = intercept + sum(coef * parent) + N(0, variance)``;
  a discrete parent contributes its integer level code.
- :class:`DiscreteCpt`: one probability row per parent-level combination,
  parents discrete, rows indexed in mixed radix with the first parent most
  significant.

Randomness comes from numpy's PCG64 generator. Scenario seeds are split with
``numpy.random.SeedSequence(seed).spawn``: child 0 drives the source sample,
child ``i`` drives replicate ``i``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

import numpy as np

from .citest import ci_for
from .data import Column, Dataset
from .errors import InvalidArgumentError, PreconditionError, ValidationError
from .graph import Admg, ancestors, m_separated

__all__ = [
    "LinearGaussian",
    "DiscreteCpt",
    "GroundTruthSpec",
    "ShiftSpec",
    "Scenario",
    "SEVERITY",
    "RNG_ALGORITHM",
    "PERTURBATION",
    "sample",
    "apply_shift",
    "generate_scenario",
    "replicate_plan",
    "scenario_metadata",
    "faithfulness_probe",
    "FaithfulnessReport",
    "gaussian_moments",
    "random_cpt",
    "spec_to_dict",
    "spec_from_dict",
    "scenario_to_dict",
    "scenario_from_dict",
    "load_scenario",
    "dump_scenario",
]

RNG_ALGORITHM = "numpy.random.PCG64 seeded via SeedSequence(seed).spawn(1 + replicates)"
PERTURBATION = 0.05
CPT_ATOL = 1e-9

# severity -> (mean shift in marginal sd, variance scale, total-variation distance)
SEVERITY = {
    "smooth": (0.5, 1.0, 0.05),
    "mild": (1.5, 1.5, 0.2),
    "severe": (3.0, 3.0, 0.5),
}


# ---------------------------------------------------------------------------
# Mechanisms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearGaussian:
    intercept: float = 0.0
    coefs: tuple = ()  # sorted (parent, coefficient) pairs
    variance: float = 1.0

    def __post_init__(self):
        c = self.coefs.items() if isinstance(self.coefs, Mapping) else self.coefs
        object.__setattr__(self, "coefs", tuple(sorted((str(p), float(w)) for p, w in c)))
        object.__setattr__(self, "intercept", float(self.intercept))
        object.__setattr__(self, "variance", float(self.variance))

    @property
    def parents(self) -> tuple:
        return tuple(p for p, _ in self.coefs)

    def coef(self, parent) -> float:
        return dict(self.coefs)[parent]


@dataclass(frozen=True, eq=False)
class DiscreteCpt:
    levels: tuple
    parents: tuple = ()
    table: np.ndarray = field(default_factory=lambda: np.ones((1, 1)))

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(str(x) for x in self.levels))
        object.__setattr__(self, "parents", tuple(self.parents))
        t = np.array(self.table, dtype=float, ndmin=2)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def __eq__(self, other):
        return (
            isinstance(other, DiscreteCpt)
            and self.levels == other.levels
            and self.parents == other.parents
            and self.table.shape == other.table.shape
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self):
        return hash((self.levels, self.parents, self.table.tobytes()))


def random_cpt(rng: np.random.Generator, levels, parents=(), parent_levels=()) -> DiscreteCpt:
    """CPT with independent Dirichlet(1, ..., 1) rows."""
    rows = int(np.prod([len(p) for p in parent_levels], dtype=int)) if parent_levels else 1
    return DiscreteCpt(levels, parents, rng.dirichlet(np.ones(len(levels)), size=rows))


# ---------------------------------------------------------------------------
# Ground truth
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroundTruthSpec:
    """Mechanisms over observed and latent vertices plus the domain roles.

    Construction validates every invariant and raises
    :class:`~sctl.errors.ValidationError` listing all violations.
    """

    mechanisms: Mapping
    context_vertices: frozenset
    target_vertex: str
    latents: frozenset = frozenset()
    graph: Admg = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "mechanisms", dict(sorted(self.mechanisms.items())))
        object.__setattr__(self, "context_vertices", frozenset(self.context_vertices))
        object.__setattr__(self, "latents", frozenset(self.latents))
        problems = []
        edges = [(p, v) for v, m in self.mechanisms.items() for p in m.parents]
        unknown = sorted({p for p, _ in edges} - set(self.mechanisms))
        for p in unknown:
            problems.append(f"mechanisms: parent {p!r} has no mechanism")
        graph = None
        if not unknown:
            try:
                graph = Admg(self.mechanisms, edges)
            except InvalidArgumentError as exc:
                problems.append(f"graph: {exc}")
        object.__setattr__(self, "graph", graph)
        problems += self._mechanism_problems()
        if graph is not None:
            problems += self._role_problems()
        if problems:
            raise ValidationError(problems)

    # -- validation ---------------------------------------------------------
    def _mechanism_problems(self):
        out = []
        for v, m in self.mechanisms.items():
            path = f"mechanisms.{v}"
            if isinstance(m, LinearGaussian):
                if not (math.isfinite(m.variance) and m.variance >= 0):
                    out.append(f"{path}.variance: must be finite and >= 0")
                if not math.isfinite(m.intercept) or not all(math.isfinite(w) for _, w in m.coefs):
                    out.append(f"{path}: coefficients must be finite")
            elif isinstance(m, DiscreteCpt):
                out += self._cpt_problems(path, m)
            else:
                out.append(f"{path}: unknown mechanism type {type(m).__name__}")
        return out

    def _cpt_problems(self, path, m: DiscreteCpt):
        out = []
        if not m.levels or len(set(m.levels)) != len(m.levels):
            out.append(f"{path}.levels: need distinct levels")
            return out
        rows = 1
        for p in m.parents:
            pm = self.mechanisms.get(p)
            if not isinstance(pm, DiscreteCpt):
                out.append(f"{path}.parents: {p!r} is not discrete")
                return out
            rows *= len(pm.levels)
        if m.table.shape != (rows, len(m.levels)):
            out.append(f"{path}.table: shape {m.table.shape} != {(rows, len(m.levels))}")
            return out
        if not np.all(np.isfinite(m.table)) or np.any(m.table < 0):
            out.append(f"{path}.table: probabilities must be finite and >= 0")
        elif np.any(np.abs(m.table.sum(axis=1) - 1) > CPT_ATOL):
            out.append(f"{path}.table: rows must sum to 1")
        return out

    def _role_problems(self):
        g = self.graph
        out = []
        observed = set(g.vertices) - self.latents
        for u in sorted(self.latents - set(g.vertices)):
            out.append(f"latents: {u!r} has no mechanism")
        for u in sorted(self.latents & set(g.vertices)):
            if g.parents(u):
                out.append(f"latents.{u}: latent vertices must be roots")
            if g.children(u) & self.latents:
                out.append(f"latents.{u}: latent vertices may only point at observed vertices")
        if self.target_vertex not in observed:
            out.append(f"target_vertex: {self.target_vertex!r} is not an observed vertex")
        for c in sorted(self.context_vertices - observed):
            out.append(f"context_vertices: {c!r} is not an observed vertex")
        if self.target_vertex in self.context_vertices:
            out.append("context_vertices: the target cannot be a context")
        if out:
            return out
        return assumption_problems(self.projected(), self.context_vertices, self.target_vertex)

    # -- views --------------------------------------------------------------
    @property
    def observed(self) -> tuple:
        return tuple(v for v in self.graph.vertices if v not in self.latents)

    def projected(self) -> Admg:
        """Observed-vertex ADMG: latent roots become bidirected edges among their children."""
        g = self.graph
        observed = self.observed
        directed = [(a, b) for a, b in g.directed if a not in self.latents]
        bidirected = []
        for u in sorted(self.latents):
            bidirected += itertools.combinations(sorted(g.children(u)), 2)
        return Admg(observed, directed, bidirected)

    def with_mechanisms(self, updates: Mapping) -> "GroundTruthSpec":
        mech = dict(self.mechanisms)
        mech.update(updates)
        return GroundTruthSpec(mech, self.context_vertices, self.target_vertex, self.latents)

    def __eq__(self, other):
        return (
            isinstance(other, GroundTruthSpec)
            and self.mechanisms == other.mechanisms
            and self.context_vertices == other.context_vertices
            and self.target_vertex == other.target_vertex
            and self.latents == other.latents
        )


def assumption_problems(g: Admg, contexts, target) -> list:
    """Structural violations of the context assumptions on an observed ADMG.

    Contexts must have no directed parents (neither system variables nor other
    contexts), share no bidirected edge with a system variable, be pairwise
    bidirected, and not point at the target.
    """
    out = []
    contexts = frozenset(contexts)
    for c in sorted(contexts):
        for p in sorted(g.parents(c)):
            kind = "context" if p in contexts else "system"
            out.append(f"assumptions: {kind} vertex {p!r} points at context {c!r}")
        for s in sorted(g.siblings(c) - contexts):
            out.append(f"assumptions: context {c!r} is confounded with system vertex {s!r}")
        if target in g.children(c):
            out.append(f"assumptions: context {c!r} is a parent of the target {target!r}")
    for a, b in itertools.combinations(sorted(contexts), 2):
        if b not in g.siblings(a):
            out.append(f"assumptions: contexts {a!r} and {b!r} are not confounded")
    return out


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _config_index(spec, m: DiscreteCpt, values, n):
    idx = np.zeros(n, dtype=np.int64)
    for p in m.parents:
        idx = idx * len(spec.mechanisms[p].levels) + values[p]
    return idx


def sample(spec: GroundTruthSpec, n: int, seed, domain_label=None) -> Dataset:
    """Ancestral sample of ``n`` rows; latent columns are dropped.

    ``seed`` is anything :class:`numpy.random.PCG64` accepts, including a
    :class:`numpy.random.SeedSequence`.
    """
    if n < 1:
        raise InvalidArgumentError("n must be at least 1")
    rng = _rng(seed)
    values = {}
    for v in spec.graph.topological_order():
        m = spec.mechanisms[v]
        if isinstance(m, LinearGaussian):
            x = np.full(n, m.intercept)
            for p, w in m.coefs:
                x = x + w * values[p]
            values[v] = x + math.sqrt(m.variance) * rng.standard_normal(n)
        else:
            cum = np.cumsum(m.table, axis=1)
            cum[:, -1] = 1.0
            rows = cum[_config_index(spec, m, values, n)]
            u = rng.random(n)
            values[v] = np.minimum((u[:, None] >= rows).sum(axis=1), len(m.levels) - 1).astype(np.int64)
    cols = []
    for v in spec.observed:
        m = spec.mechanisms[v]
        cols.append(Column(v, "discrete", m.levels) if isinstance(m, DiscreteCpt) else Column(v, "continuous"))
    return Dataset(tuple(cols), {v: values[v] for v in spec.observed}, domain_label)


def gaussian_moments(spec: GroundTruthSpec, vertices=None):
    """Exact means and covariance of linear-Gaussian vertices.

    ``vertices`` defaults to all vertices; their ancestors must all be
    linear-Gaussian.

    Returns
    -------
    (names, mean, cov)
    """
    g = spec.graph
    keep = ancestors(g, vertices) if vertices is not None else frozenset(g.vertices)
    names = [v for v in g.topological_order() if v in keep]
    pos = {v: i for i, v in enumerate(names)}
    k = len(names)
    mean, cov = np.zeros(k), np.zeros((k, k))
    for i, v in enumerate(names):
        m = spec.mechanisms[v]
        if not isinstance(m, LinearGaussian):
            raise InvalidArgumentError(f"{v!r} is not linear-Gaussian")
        w = np.zeros(k)
        for p, c in m.coefs:
            w[pos[p]] = c
        mean[i] = m.intercept + w @ mean
        cross = cov @ w
        cov[i, :] = cov[:, i] = cross
        cov[i, i] = w @ cross + m.variance
    return names, mean, cov


def _marginal_gaussian(spec, v):
    names, mean, cov = gaussian_moments(spec, {v})
    i = names.index(v)
    return mean[i], cov[i, i]


def _parent_config_probs(spec, m: DiscreteCpt):
    """Joint probability of each parent configuration; parents must be independent roots."""
    probs = np.ones(1)
    for p in m.parents:
        pm = spec.mechanisms[p]
        if spec.graph.parents(p) or not isinstance(pm, DiscreteCpt):
            raise InvalidArgumentError(f"parent {p!r} of a shifted context must be a discrete root")
        probs = np.outer(probs, pm.table[0]).ravel()
    return probs


# ---------------------------------------------------------------------------
# Shifts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShiftSpec:
    """Target-domain change on context mechanisms.

    ``severity`` picks magnitudes from :data:`SEVERITY`; ``mean_shift_sd``,
    ``variance_scale`` and ``tv_distance`` override them when given.
    ``mechanisms`` replaces whole context mechanisms and takes precedence.
    """

    shifted_contexts: frozenset = frozenset()
    severity: str = "severe"
    mean_shift_sd: Optional[float] = None
    variance_scale: Optional[float] = None
    tv_distance: Optional[float] = None
    mechanisms: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "shifted_contexts", frozenset(self.shifted_contexts))
        if self.severity not in SEVERITY:
            raise InvalidArgumentError(f"severity must be one of {sorted(SEVERITY)}")
        if self.variance_scale is not None and self.variance_scale <= 0:
            raise InvalidArgumentError("variance_scale must be positive")
        if self.tv_distance is not None and not 0 <= self.tv_distance < 1:
            raise InvalidArgumentError("tv_distance must lie in [0, 1)")

    @property
    def magnitudes(self):
        shift, scale, tv = SEVERITY[self.severity]
        return (
            shift if self.mean_shift_sd is None else self.mean_shift_sd,
            scale if self.variance_scale is None else self.variance_scale,
            tv if self.tv_distance is None else self.tv_distance,
        )


def _shift_gaussian(spec, v, m: LinearGaussian, shift_sd, scale):
    mu, var = _marginal_gaussian(spec, v)
    inherited = var - m.variance
    new_var = scale * var - inherited
    if new_var < 0:
        raise InvalidArgumentError(f"variance scale {scale} cannot be reached by {v!r}'s noise term")
    return replace(m, intercept=m.intercept + shift_sd * math.sqrt(var), variance=new_var)


def _tilt(table, lam):
    score = np.arange(table.shape[1], dtype=float)
    score -= score.mean()
    w = table * np.exp(lam * score)
    return w / w.sum(axis=1, keepdims=True)


def _shift_discrete(spec, v, m: DiscreteCpt, tv):
    if tv == 0:
        return m
    weights = _parent_config_probs(spec, m)
    base = weights @ m.table

    def distance(lam):
        return 0.5 * np.abs(weights @ _tilt(m.table, lam) - base).sum()

    for sign in (1.0, -1.0):
        hi = sign * 1.0
        while abs(hi) < 1e3 and distance(hi) < tv:
            hi *= 2
        if distance(hi) >= tv:
            lo = 0.0
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if distance(mid) < tv:
                    lo = mid
                else:
                    hi = mid
            return DiscreteCpt(m.levels, m.parents, _tilt(m.table, hi))
    raise InvalidArgumentError(f"total-variation distance {tv} is out of reach for {v!r}")


def apply_shift(spec: GroundTruthSpec, shift: ShiftSpec) -> GroundTruthSpec:
    """Target-domain spec: only the shifted contexts' mechanisms change."""
    bad = sorted((shift.shifted_contexts | set(shift.mechanisms)) - spec.context_vertices)
    if bad:
        raise InvalidArgumentError(f"shift targets non-context vertices {bad}")
    shift_sd, scale, tv = shift.magnitudes
    updates = {}
    for v in sorted(shift.shifted_contexts):
        m = spec.mechanisms[v]
        if v in shift.mechanisms:
            updates[v] = shift.mechanisms[v]
        elif isinstance(m, LinearGaussian):
            updates[v] = _shift_gaussian(spec, v, m, shift_sd, scale)
        else:
            updates[v] = _shift_discrete(spec, v, m, tv)
    for v in sorted(set(shift.mechanisms) - shift.shifted_contexts):
        updates[v] = shift.mechanisms[v]
    return spec.with_mechanisms(updates) if updates else spec


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    spec: GroundTruthSpec
    shift: ShiftSpec = ShiftSpec()
    sample_sizes: tuple = (1000, 1000)
    replicates: int = 8
    seed: int = 0
    name: str = "scenario"

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(x) for x in self.sample_sizes))
        if len(self.sample_sizes) != 2 or min(self.sample_sizes) < 1:
            raise InvalidArgumentError("sample_sizes must be two positive integers")
        if self.replicates < 0:
            raise InvalidArgumentError("replicates must be non-negative")


def _perturb(m, rng):
    """Jitter every parameter of a mechanism by a factor in [1 - 5%, 1 + 5%]."""
    if isinstance(m, LinearGaussian):
        if m.coefs:
            u = rng.uniform(-PERTURBATION, PERTURBATION, len(m.coefs))
            return replace(m, coefs=tuple((p, w * (1 + e)) for (p, w), e in zip(m.coefs, u)))
        return replace(m, variance=m.variance * (1 + rng.uniform(-PERTURBATION, PERTURBATION)))
    u = rng.uniform(-PERTURBATION, PERTURBATION, m.table.shape)
    t = m.table * (1 + u)
    return DiscreteCpt(m.levels, m.parents, t / t.sum(axis=1, keepdims=True))


def replicate_plan(sc: Scenario):
    """Seed sequences and perturbations for every replicate.

    Returns
    -------
    (source_seed, [(seed, perturbed_vertex, mechanism), ...])
    """
    children = np.random.SeedSequence(sc.seed).spawn(1 + sc.replicates)
    spec = sc.spec
    system = [
        v for v in spec.observed if v not in spec.context_vertices and v != spec.target_vertex
    ]
    plan = []
    for child in children[1:]:
        choose, draw = child.spawn(2)
        rng = _rng(choose)
        if system:
            v = system[int(rng.integers(len(system)))]
            plan.append((draw, v, _perturb(spec.mechanisms[v], rng)))
        else:
            plan.append((draw, None, None))
    return children[0], plan


def generate_scenario(sc: Scenario):
    """Source dataset and one shifted, perturbed target dataset per replicate."""
    source_seed, plan = replicate_plan(sc)
    source = sample(sc.spec, sc.sample_sizes[0], source_seed, "source")
    shifted = apply_shift(sc.spec, sc.shift)
    targets = []
    for i, (seed, v, m) in enumerate(plan, start=1):
        spec = shifted.with_mechanisms({v: m}) if v is not None else shifted
        targets.append(sample(spec, sc.sample_sizes[1], seed, f"target_{i:02d}"))
    return source, targets


def scenario_metadata(sc: Scenario) -> dict:
    _, plan = replicate_plan(sc)
    shift_sd, scale, tv = sc.shift.magnitudes
    return {
        "name": sc.name,
        "seed": sc.seed,
        "rng": RNG_ALGORITHM,
        "sample_sizes": list(sc.sample_sizes),
        "replicates": sc.replicates,
        "severity_table": {k: dict(zip(("mean_shift_sd", "variance_scale", "tv_distance"), v))
                           for k, v in SEVERITY.items()},
        "shift": {
            "shifted_contexts": sorted(sc.shift.shifted_contexts),
            "severity": sc.shift.severity,
            "mean_shift_sd": shift_sd,
            "variance_scale": scale,
            "tv_distance": tv,
        },
        "replicate_perturbation": {"factor_range": [1 - PERTURBATION, 1 + PERTURBATION],
                                   "vertices": [v for _, v, _ in plan]},
        "context_vertices": sorted(sc.spec.context_vertices),
        "target_vertex": sc.spec.target_vertex,
        "latents": sorted(sc.spec.latents),
    }


# ---------------------------------------------------------------------------
# Faithfulness probe
# ---------------------------------------------------------------------------


@dataclass
class FaithfulnessReport:
    n_triples: int
    disagreements: list  # (x, y, conditioning set, p-value, graph says separated)
    zero_weight_edges: list

    @property
    def disagreement_rate(self) -> float:
        return len(self.disagreements) / self.n_triples if self.n_triples else 0.0

    @property
    def vanished_dependences(self) -> list:
        """Pairs the graph connects but the data call independent."""
        return [d for d in self.disagreements if not d[4]]


def faithfulness_probe(spec: GroundTruthSpec, n: int, alpha: float, seed=0, n_triples=200,
                       max_cond=2) -> FaithfulnessReport:
    """Compare data-driven CI decisions with m-separation on the projected graph.

    Every adjacent pair is probed with an empty conditioning set, so an edge
    whose weight vanishes shows up as a disagreement; the remaining triples
    are random with at most ``max_cond`` conditioning variables.
    """
    if n < 1000:
        raise PreconditionError("the probe needs n >= 1000")
    g = spec.projected()
    sample_seed, triple_seed = np.random.SeedSequence(seed).spawn(2)
    ci = ci_for(sample(spec, n, sample_seed))
    rng = _rng(triple_seed)
    vs = list(g.vertices)
    triples = [(a, b, ()) for a, b in sorted(g.directed)]
    while len(triples) < max(n_triples, len(triples)) and len(vs) >= 2:
        if len(triples) >= n_triples:
            break
        x, y = rng.choice(len(vs), 2, replace=False)
        rest = [v for i, v in enumerate(vs) if i not in (x, y)]
        k = int(rng.integers(0, min(max_cond, len(rest)) + 1))
        s = tuple(sorted(rng.choice(rest, k, replace=False))) if k else ()
        triples.append((vs[x], vs[y], s))
    disagreements = []
    for x, y, s in triples:
        p = ci(x, y, s).p_value
        sep = m_separated(g, {x}, {y}, set(s))
        if (p > alpha) != sep:
            disagreements.append((x, y, s, p, sep))
    zero = sorted(
        (p, v)
        for v, m in spec.mechanisms.items()
        if isinstance(m, LinearGaussian)
        for p, w in m.coefs
        if w == 0
    )
    return FaithfulnessReport(len(triples), disagreements, zero)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _mech_to_dict(m) -> dict:
    if isinstance(m, LinearGaussian):
        return {"type": "linear_gaussian", "intercept": m.intercept, "coefs": dict(m.coefs),
                "variance": m.variance}
    return {"type": "cpt", "levels": list(m.levels), "parents": list(m.parents),
            "table": m.table.tolist()}


def _mech_from_dict(d: dict, path: str):
    kind = d.get("type")
    try:
        if kind == "linear_gaussian":
            return LinearGaussian(d.get("intercept", 0.0), d.get("coefs", {}), d.get("variance", 1.0))
        if kind == "cpt":
            return DiscreteCpt(d["levels"], d.get("parents", ()), d["table"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError([f"{path}: {exc}"]) from None
    raise ValidationError([f"{path}.type: expected 'linear_gaussian' or 'cpt', got {kind!r}"])


def spec_to_dict(spec: GroundTruthSpec) -> dict:
    return {
        "mechanisms": {v: _mech_to_dict(m) for v, m in spec.mechanisms.items()},
        "latents": sorted(spec.latents),
        "context_vertices": sorted(spec.context_vertices),
        "target_vertex": spec.target_vertex,
    }


def spec_from_dict(d: dict) -> GroundTruthSpec:
    missing = [k for k in ("mechanisms", "context_vertices", "target_vertex") if k not in d]
    if missing:
        raise ValidationError([f"{k}: required" for k in missing])
    mech = {v: _mech_from_dict(m, f"mechanisms.{v}") for v, m in d["mechanisms"].items()}
    return GroundTruthSpec(mech, d["context_vertices"], d["target_vertex"], d.get("latents", ()))


def scenario_to_dict(sc: Scenario) -> dict:
    sh = sc.shift
    shift = {"shifted_contexts": sorted(sh.shifted_contexts), "severity": sh.severity}
    for k in ("mean_shift_sd", "variance_scale", "tv_distance"):
        if getattr(sh, k) is not None:
            shift[k] = getattr(sh, k)
    if sh.mechanisms:
        shift["mechanisms"] = {v: _mech_to_dict(m) for v, m in sorted(sh.mechanisms.items())}
    return {
        "name": sc.name,
        "spec": spec_to_dict(sc.spec),
        "shift": shift,
        "sample_sizes": list(sc.sample_sizes),
        "replicates": sc.replicates,
        "seed": sc.seed,
    }


def scenario_from_dict(d: dict) -> Scenario:
    if "builtin" in d:
        from .scenarios import builtin

        base = builtin(d["builtin"])
        merged = scenario_to_dict(base)
        merged.update({k: v for k, v in d.items() if k != "builtin"})
        if "shift" in d:
            merged["shift"] = {**scenario_to_dict(base)["shift"], **d["shift"]}
        d = merged
    if "spec" not in d:
        raise ValidationError(["spec: required"])
    spec = spec_from_dict(d["spec"])
    sh = dict(d.get("shift", {}))
    mech = {v: _mech_from_dict(m, f"shift.mechanisms.{v}") for v, m in sh.pop("mechanisms", {}).items()}
    unknown = set(sh) - {"shifted_contexts", "severity", "mean_shift_sd", "variance_scale", "tv_distance"}
    if unknown:
        raise ValidationError([f"shift.{k}: unknown field" for k in sorted(unknown)])
    try:
        shift = ShiftSpec(mechanisms=mech, **sh)
        return Scenario(spec, shift, tuple(d.get("sample_sizes", (1000, 1000))),
                        int(d.get("replicates", 8)), int(d.get("seed", 0)), d.get("name", "scenario"))
    except (InvalidArgumentError, TypeError) as exc:
        raise ValidationError([f"scenario: {exc}"]) from None


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


def dump_scenario(sc: Scenario, path) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(sc), fh, indent=2, sort_keys=True)
        fh.write("\n")
