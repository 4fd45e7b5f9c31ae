import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sctl.errors import CycleError, InvalidArgumentError, PreconditionError
from sctl.graph import (
    Admg,
    ancestors,
    augmented_graph,
    collider_connected,
    district,
    format_graph,
    graphical_markov_blanket,
    induced_markov_blanket,
    m_connected_oracle,
    m_separated,
    parse_graph,
    separating_subset_exists,
)
from sctl.reference import random_admg, two_context_graph, small_graph, target_m_graph


@pytest.fixture
def rem():
    return two_context_graph()


def test_ancestors_examples(rem):
    assert ancestors(rem, {"T"}) == {"T", "X", "C2"}
    assert ancestors(rem, set()) == frozenset()
    assert ancestors(Admg(["A", "B"]), {"A"}) == {"A"}
    with pytest.raises(InvalidArgumentError):
        ancestors(rem, {"nope"})


def test_district_examples(rem):
    assert district(rem, "C1") == {"C1", "C2"}
    assert district(rem, "T") == {"T"}
    chain = Admg(bidirected=[("A", "B"), ("B", "C")])
    assert district(chain, "A") == {"A", "B", "C"}
    with pytest.raises(InvalidArgumentError):
        district(rem, "Z")


def test_augmented_graph_examples(rem):
    aug = augmented_graph(rem)
    assert "T" in aug["X"] and "X" in aug["T"]
    # C1 -> Y <- T is a collider path
    assert "T" in aug["C1"]
    assert augmented_graph(Admg(["A", "B"])) == {"A": frozenset(), "B": frozenset()}


def test_augmented_graph_is_symmetric():
    rng = np.random.default_rng(3)
    for _ in range(30):
        g = random_admg(rng, 6)
        aug = augmented_graph(g)
        for v, nbrs in aug.items():
            for w in nbrs:
                assert v in aug[w]


def test_m_separated_examples(rem):
    assert m_separated(rem, {"T"}, {"C1"}, {"X"})
    assert not m_separated(rem, {"T"}, {"C1"}, {"X", "Y"})
    assert not m_separated(rem, {"T"}, {"C1"}, set())


def test_m_separated_rejects_bad_sets(rem):
    with pytest.raises(InvalidArgumentError):
        m_separated(rem, {"T"}, {"T"}, set())
    with pytest.raises(InvalidArgumentError):
        m_separated(rem, {"T"}, {"C1"}, {"C1"})
    with pytest.raises(InvalidArgumentError):
        m_separated(rem, set(), {"C1"}, set())


def test_two_cycle_is_rejected():
    with pytest.raises(CycleError):
        Admg(directed=[("C", "Y"), ("C", "X"), ("Y", "T"), ("X", "T"), ("X", "Y"), ("T", "X")])
    with pytest.raises(CycleError):
        Admg(directed=[("A", "A")])
    with pytest.raises(CycleError):
        Admg(bidirected=[("A", "A")])


def test_oracle_examples(rem):
    assert not m_connected_oracle(rem, "T", "C1", {"X"})
    assert m_connected_oracle(rem, "T", "C1", {"X", "Y"})
    for a, b in rem.directed | rem.bidirected:
        assert m_connected_oracle(rem, a, b, set())


def test_parallel_directed_and_bidirected_edges():
    g = Admg(directed=[("A", "B"), ("B", "C")], bidirected=[("A", "B")])
    # A <-> B <- ... B is a non-collider on A -> B -> C; via A <-> B -> C too
    assert not m_separated(g, {"A"}, {"C"}, set())
    assert m_separated(g, {"A"}, {"C"}, {"B"})
    g2 = Admg(directed=[("A", "B"), ("C", "B")], bidirected=[("B", "C")])
    # A -> B <-> C: B is a collider; conditioning on B opens it
    assert m_separated(g2, {"A"}, {"C"}, set()) == (not m_connected_oracle(g2, "A", "C", set()))
    assert not m_separated(g2, {"A"}, {"C"}, {"B"})


def test_m_separation_routes_agree_on_corpus():
    rng = np.random.default_rng(11)
    for _ in range(40):
        g = random_admg(rng, int(rng.integers(2, 7)))
        for x, y in itertools.combinations(g.vertices, 2):
            rest = [v for v in g.vertices if v not in (x, y)]
            for k in range(min(3, len(rest)) + 1):
                for zs in itertools.combinations(rest, k):
                    sep = m_separated(g, {x}, {y}, set(zs))
                    assert sep == (not m_connected_oracle(g, x, y, set(zs)))
                    assert sep == m_separated(g, {y}, {x}, set(zs))


def test_markov_blanket_fixtures(rem):
    assert graphical_markov_blanket(rem, "T") == {"X", "Y", "C1"}
    assert graphical_markov_blanket(small_graph(), "T") == {"C1", "P", "X", "Y"}
    assert graphical_markov_blanket(Admg(["T", "A"]), "T") == frozenset()
    # J is a spouse of M through N
    assert graphical_markov_blanket(target_m_graph(), "M") == {"J", "K", "L", "N"}


def test_markov_blanket_equals_collider_connected_set():
    rng = np.random.default_rng(5)
    for _ in range(60):
        g = random_admg(rng, int(rng.integers(1, 9)))
        for t in g.vertices:
            assert graphical_markov_blanket(g, t) == collider_connected(g, t)


def test_markov_blanket_shields_and_is_minimal():
    rng = np.random.default_rng(7)
    for _ in range(40):
        g = random_admg(rng, int(rng.integers(2, 8)))
        for t in g.vertices:
            mb = graphical_markov_blanket(g, t)
            for v in set(g.vertices) - mb - {t}:
                assert m_separated(g, {t}, {v}, mb)
            for m in mb:
                assert not m_separated(g, {t}, {m}, mb - {m})


def test_induced_markov_blanket_examples(rem):
    assert induced_markov_blanket(rem, {"T", "X", "C2"}, "T") == {"X"}
    assert induced_markov_blanket(Admg(["x"]), {"x"}, "x") == frozenset()
    assert induced_markov_blanket(Admg(directed=[("A", "B")]), {"A", "B"}, "B") == {"A"}


def test_induced_markov_blanket_preconditions(rem):
    with pytest.raises(PreconditionError):
        induced_markov_blanket(rem, {"T", "X"}, "T")  # not ancestral
    with pytest.raises(PreconditionError):
        induced_markov_blanket(rem, {"T", "X", "C2"}, "X")  # X -> T inside


def test_induced_blanket_inside_blanket():
    rng = np.random.default_rng(9)
    for _ in range(60):
        g = random_admg(rng, int(rng.integers(1, 9)))
        for t in g.vertices:
            a = ancestors(g, {t})
            assert induced_markov_blanket(g, a, t) <= graphical_markov_blanket(g, t)


def test_separating_subset_examples(rem):
    w = separating_subset_exists(rem, "T", "C1")
    assert w == {"X"}
    assert m_separated(rem, {"T"}, {"C1"}, w)
    assert separating_subset_exists(Admg(directed=[("C", "T")]), "T", "C") is None
    w = separating_subset_exists(small_graph(), "T", "C1")
    assert w is not None and "X" in w
    assert m_separated(small_graph(), {"T"}, {"C1"}, w)


def test_separating_subset_matches_exhaustive_search():
    rng = np.random.default_rng(13)
    for _ in range(40):
        g = random_admg(rng, int(rng.integers(2, 7)))
        for x, y in itertools.combinations(g.vertices, 2):
            rest = [v for v in g.vertices if v not in (x, y)]
            brute = any(
                m_separated(g, {x}, {y}, set(zs))
                for k in range(len(rest) + 1)
                for zs in itertools.combinations(rest, k)
            )
            w = separating_subset_exists(g, x, y)
            assert (w is not None) == brute
            if w is not None:
                assert w <= ancestors(g, {x, y}) - {x, y}


def test_proposition_ancestral_restriction():
    rng = np.random.default_rng(17)
    for _ in range(60):
        g = random_admg(rng, int(rng.integers(3, 8)))
        x, y = rng.choice(g.vertices, 2, replace=False)
        rest = [v for v in g.vertices if v not in (x, y)]
        s = {v for v in rest if rng.random() < 0.5}
        some = any(
            m_separated(g, {x}, {y}, set(zs))
            for k in range(len(s) + 1)
            for zs in itertools.combinations(sorted(s), k)
        )
        assert some == m_separated(g, {x}, {y}, s & ancestors(g, {x, y}))


def test_graph_text_round_trip(rem):
    text = format_graph(rem)
    assert parse_graph(text) == rem
    assert format_graph(parse_graph(text)) == text
    g = parse_graph("# comment\nA -> B  # trailing\nnode Z\nB <-> C\n")
    assert g.vertices == ("A", "B", "C", "Z")
    assert format_graph(g) == "A -> B\nB <-> C\nnode Z\n"
    with pytest.raises(InvalidArgumentError):
        parse_graph("A => B")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 7))
def test_ancestors_monotone_and_idempotent(seed, n):
    rng = np.random.default_rng(seed)
    g = random_admg(rng, n)
    xs = {v for v in g.vertices if rng.random() < 0.4}
    ys = xs | {v for v in g.vertices if rng.random() < 0.3}
    an = ancestors(g, xs)
    assert ancestors(g, an) == an
    assert an <= ancestors(g, ys)
    assert format_graph(parse_graph(format_graph(g))) == format_graph(g)
