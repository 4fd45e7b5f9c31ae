"""Named ground-truth scenarios.

``two-context``
    Two confounded contexts, ``C2 -> X -> T -> Y <- C1``.
``small``
    ``two-context`` extended with ``T -> P -> Q`` and ``D -> B <- C2``; the
    target's blanket is ``{C1, P, X, Y}``.
``wide``
    ``small`` plus 991 filler variables in sparse chains unrelated to the
    target, 1000 observed variables in total.
``two-context-discrete``
    The ``two-context`` graph with binary variables and Dirichlet(1) CPTs.

All Gaussian builtins use the same coefficients on shared edges.
"""

from __future__ import annotations

import numpy as np

from .synth import DiscreteCpt, GroundTruthSpec, LinearGaussian, Scenario, ShiftSpec, random_cpt

__all__ = ["BUILTINS", "builtin", "two_context_spec", "small_spec", "wide_spec", "two_context_discrete_spec"]

LG = LinearGaussian


def _two_context_mechanisms():
    return {
        "U": LG(0.0, {}, 1.0),
        "C1": LG(1.0, {"U": 1.0}, 0.5),
        "C2": LG(-0.5, {"U": 1.0}, 0.5),
        "X": LG(2.0, {"C2": 1.2}, 1.0),
        "T": LG(0.5, {"X": 1.0}, 1.0),
        "Y": LG(0.0, {"C1": 1.0, "T": 1.0}, 1.0),
    }


def two_context_spec() -> GroundTruthSpec:
    return GroundTruthSpec(_two_context_mechanisms(), {"C1", "C2"}, "T", {"U"})


def _small_mechanisms():
    m = _two_context_mechanisms()
    m.update(
        P=LG(0.0, {"T": 0.8}, 1.0),
        Q=LG(1.0, {"P": 1.0}, 1.0),
        D=LG(0.0, {}, 1.0),
        B=LG(0.0, {"D": 1.0, "C2": 0.8}, 1.0),
    )
    return m


def small_spec() -> GroundTruthSpec:
    return GroundTruthSpec(_small_mechanisms(), {"C1", "C2"}, "T", {"U"})


def wide_spec(n_observed=1000, structure_seed=0) -> GroundTruthSpec:
    """``small`` padded with filler chains to ``n_observed`` observed variables."""
    m = _small_mechanisms()
    n_fill = n_observed - (len(m) - 1)
    rng = np.random.default_rng(structure_seed)
    names = [f"F{i:04d}" for i in range(n_fill)]
    for i, v in enumerate(names):
        coefs = {}
        if i and rng.random() < 0.5:
            coefs[names[int(rng.integers(max(0, i - 20), i))]] = float(rng.choice([-1, 1]) * rng.uniform(0.5, 1.0))
        m[v] = LG(0.0, coefs, 1.0)
    return GroundTruthSpec(m, {"C1", "C2"}, "T", {"U"})


def two_context_discrete_spec(seed=7) -> GroundTruthSpec:
    rng = np.random.default_rng(seed)
    b = ("0", "1")
    m = {
        "U": random_cpt(rng, b),
        "C1": random_cpt(rng, b, ["U"], [b]),
        "C2": random_cpt(rng, b, ["U"], [b]),
        "X": random_cpt(rng, b, ["C2"], [b]),
        "T": random_cpt(rng, b, ["X"], [b]),
        "Y": random_cpt(rng, b, ["C1", "T"], [b, b]),
    }
    return GroundTruthSpec(m, {"C1", "C2"}, "T", {"U"})


BUILTINS = {
    "two-context": two_context_spec,
    "small": small_spec,
    "wide": wide_spec,
    "two-context-discrete": two_context_discrete_spec,
}


def builtin(name: str, severity="severe", n=1000, replicates=8, seed=0) -> Scenario:
    """Scenario around a builtin spec with a shift on ``C1``."""
    try:
        spec = BUILTINS[name]()
    except KeyError:
        raise ValueError(f"unknown builtin scenario {name!r}; choose from {sorted(BUILTINS)}") from None
    return Scenario(spec, ShiftSpec({"C1"}, severity), (n, n), replicates, seed, name)
