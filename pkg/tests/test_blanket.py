import numpy as np
import pytest

from sctl.blanket import ALGORITHMS, benjamini_hochberg, fdr_iamb, gsmb, iamb, markov_blanket
from sctl.citest import OracleCI
from sctl.graph import Admg, graphical_markov_blanket
from sctl.reference import random_admg, two_context_graph, small_graph, target_m_graph

ALGOS = sorted(ALGORITHMS)


@pytest.mark.parametrize("algo", ALGOS)
def test_oracle_reference_blankets(algo):
    g = two_context_graph()
    res = markov_blanket(algo, OracleCI(g), g.vertices, "T")
    assert res.blanket == {"X", "Y", "C1"}
    g = small_graph()
    res = markov_blanket(algo, OracleCI(g), g.vertices, "T")
    assert res.blanket == {"C1", "P", "X", "Y"}
    g = target_m_graph()
    assert markov_blanket(algo, OracleCI(g), g.vertices, "M").blanket == {"J", "K", "L", "N"}


@pytest.mark.parametrize("algo", ALGOS)
def test_trivial_cases(algo):
    g = Admg(["T", "A", "B"], [("A", "B")])
    assert markov_blanket(algo, OracleCI(g), g.vertices, "T").blanket == frozenset()
    res = markov_blanket(algo, OracleCI(g), ["T"], "T")
    assert res.blanket == frozenset() and res.test_count == 0


@pytest.mark.parametrize("algo", ALGOS)
def test_oracle_recovers_graphical_blanket_on_corpus(algo):
    rng = np.random.default_rng(31)
    for _ in range(25):
        g = random_admg(rng, int(rng.integers(2, 9)))
        ci = OracleCI(g)
        for t in g.vertices:
            res = markov_blanket(algo, ci, g.vertices, t)
            assert res.blanket == graphical_markov_blanket(g, t), (algo, g, t)
            assert res.replay() == res.blanket
            assert res.test_count >= len(res.trace)
            again = markov_blanket(algo, ci, sorted(res.blanket | {t}), t)
            assert again.blanket == res.blanket


def test_trace_text_format():
    g = two_context_graph()
    res = iamb(OracleCI(g), g.vertices, "T")
    lines = res.trace_text().splitlines()
    assert lines[0] == "grow C1 p=0 admitted"
    assert all(line.split()[0] in ("grow", "shrink") for line in lines)


def test_max_cond_size_skips_and_logs():
    g = small_graph()
    res = gsmb(OracleCI(g), g.vertices, "T", max_cond_size=1)
    assert any(e.action == "skipped" for e in res.trace)
    assert res.replay() == res.blanket


def test_invalid_arguments():
    g = two_context_graph()
    with pytest.raises(ValueError):
        iamb(OracleCI(g), g.vertices, "T", alpha=0.0)
    with pytest.raises(ValueError):
        iamb(OracleCI(g), ["X", "Y"], "T")
    with pytest.raises(ValueError):
        markov_blanket("mmmb", OracleCI(g), g.vertices, "T")


def test_benjamini_hochberg():
    # hand computation: sorted 0.01 0.03 0.04 0.5 vs 0.0125 0.025 0.0375 0.05
    assert list(benjamini_hochberg([0.01, 0.04, 0.03, 0.5], 0.05)) == [True, False, False, False]
    assert list(benjamini_hochberg([0.01, 0.02, 0.03, 0.04], 0.05)) == [True] * 4
    assert list(benjamini_hochberg([0.0, 1.0, 0.0], 0.05)) == [True, False, True]
    assert benjamini_hochberg([], 0.05).size == 0


def test_fdr_reduces_to_threshold_on_binary_pvalues():
    g = small_graph()
    ci = OracleCI(g)
    assert fdr_iamb(ci, g.vertices, "T").blanket == iamb(ci, g.vertices, "T").blanket
