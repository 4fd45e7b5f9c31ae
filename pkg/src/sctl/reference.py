"""Reference graphs and seeded random ADMG generators.

The three named graphs are the small benchmark structures used throughout the
tests: a five-vertex graph with two confounded binary contexts, the
ten-vertex "small" evaluation graph, and the K-L-M-N cluster whose target is
``M``. Latent confounders appear as bidirected edges.
"""

from __future__ import annotations

import itertools

import numpy as np

from .graph import Admg

__all__ = [
    "two_context_graph",
    "small_graph",
    "target_m_graph",
    "random_admg",
    "random_cda_admg",
]


def two_context_graph() -> Admg:
    return Admg(
        directed=[("C1", "Y"), ("C2", "X"), ("X", "T"), ("T", "Y")],
        bidirected=[("C1", "C2")],
    )


def small_graph() -> Admg:
    return Admg(
        directed=[
            ("C1", "Y"), ("C2", "X"), ("X", "T"), ("T", "Y"), ("T", "P"),
            ("P", "Q"), ("D", "B"), ("C2", "B"),
        ],
        bidirected=[("C1", "C2")],
    )


def target_m_graph() -> Admg:
    """The K-L-M-N cluster joined to the small graph's core."""
    return Admg(
        directed=[
            ("K", "L"), ("K", "M"), ("K", "J"), ("M", "N"), ("J", "N"),
            ("L", "M"), ("C1", "Y"), ("C2", "X"), ("X", "T"), ("T", "Y"),
            ("T", "P"), ("P", "Q"), ("D", "B"), ("C2", "B"), ("E", "B"),
            ("E", "I"), ("F", "D"), ("G", "E"), ("H", "E"), ("J", "X"),
        ],
        bidirected=[("C1", "C2")],
    )


def _names(n):
    return [f"V{i:02d}" for i in range(n)]


def random_admg(rng: np.random.Generator, n_vertices: int, p_directed=0.3, p_bidirected=0.15,
                names=None) -> Admg:
    """Random ADMG: directed edges follow a random permutation order."""
    names = list(names) if names is not None else _names(n_vertices)
    order = list(rng.permutation(len(names)))
    directed, bidirected = [], []
    for i, j in itertools.combinations(range(len(names)), 2):
        a, b = names[order[i]], names[order[j]]
        if rng.random() < p_directed:
            directed.append((a, b))
        if rng.random() < p_bidirected:
            bidirected.append((a, b))
    return Admg(names, directed, bidirected)


def random_cda_admg(rng: np.random.Generator, n_system: int, n_context: int,
                    p_directed=0.3, p_bidirected=0.15, p_context_edge=0.4):
    """Random ADMG obeying the context-exogeneity structure.

    Contexts have no incoming directed edges, are pairwise confounded, are never
    confounded with system variables, and never point at the target.

    Returns
    -------
    (Admg, contexts, target)
    """
    system = [f"X{i:02d}" for i in range(n_system)]
    contexts = [f"C{i + 1}" for i in range(n_context)]
    target = system[int(rng.integers(n_system))]
    sys_graph = random_admg(rng, n_system, p_directed, p_bidirected, names=system)
    directed = list(sys_graph.directed)
    bidirected = list(sys_graph.bidirected)
    for c in contexts:
        for s in system:
            if s != target and rng.random() < p_context_edge:
                directed.append((c, s))
    bidirected += list(itertools.combinations(contexts, 2))
    g = Admg(system + contexts, directed, bidirected)
    return g, frozenset(contexts), target
