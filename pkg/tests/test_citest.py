import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from sctl.citest import (
    FisherZ,
    GSquared,
    OracleCI,
    ci_for,
    fisher_z_from_r,
    fisher_z_test,
    g2_from_counts,
    g2_mi_test,
    mutual_information,
    oracle_ci_test,
    partial_correlation,
)
from sctl.data import Dataset
from sctl.errors import DegenerateDataError, InsufficientSampleError, InvalidArgumentError
from sctl.reference import random_admg, two_context_graph


def gaussian(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    z = 0.8 * x + rng.standard_normal(n)
    y = -0.7 * z + rng.standard_normal(n)
    w = rng.standard_normal(n)
    return Dataset.from_columns({"x": x, "y": y, "z": z, "w": w})


def test_partial_correlation_copy_is_clamped():
    x = np.random.default_rng(0).standard_normal(50)
    d = Dataset.from_columns({"x": x, "y": x.copy()})
    assert partial_correlation(d, "x", "y") == 0.999999


def test_partial_correlation_independent_and_chain():
    d = gaussian(10_000, 1)
    assert abs(partial_correlation(d, "x", "w")) < 0.05
    assert abs(partial_correlation(d, "x", "y", {"z"})) < 0.05
    assert abs(partial_correlation(d, "x", "y")) > 0.2


def test_partial_correlation_matches_residual_regression():
    # independent route: correlate least-squares residuals
    d = gaussian(500, 2)
    Z = np.column_stack([np.ones(500), d["z"], d["w"]])
    rx = d["x"] - Z @ np.linalg.lstsq(Z, d["x"], rcond=None)[0]
    ry = d["y"] - Z @ np.linalg.lstsq(Z, d["y"], rcond=None)[0]
    expected = np.corrcoef(rx, ry)[0, 1]
    assert partial_correlation(d, "x", "y", {"z", "w"}) == pytest.approx(expected, abs=1e-10)


def test_partial_correlation_errors():
    rng = np.random.default_rng(3)
    a = rng.standard_normal(30)
    d = Dataset.from_columns({"a": a, "b": 2 * a, "c": rng.standard_normal(30), "k": np.ones(30)})
    with pytest.raises(DegenerateDataError):
        partial_correlation(d, "c", "a", {"b"})  # a determined by b
    with pytest.raises(DegenerateDataError):
        partial_correlation(d, "c", "k")
    small = Dataset.from_columns({"a": a[:4], "b": a[4:8], "c": a[8:12]})
    with pytest.raises(InsufficientSampleError):
        partial_correlation(small, "a", "b", {"c"})
    with pytest.raises(InvalidArgumentError):
        partial_correlation(d, "a", "a")


def test_fisher_z_fixtures():
    res = fisher_z_from_r(0.0, 57, 2)
    assert res.statistic == 0.0 and res.p_value == 1.0
    res = fisher_z_from_r(0.2, 100, 1)
    # 0.5 * ln(1.2 / 0.8) * sqrt(96), two-sided normal tail
    assert res.statistic == pytest.approx(1.9863652467, abs=1e-6)
    assert res.p_value == pytest.approx(0.0470, abs=1e-3)
    assert res.dof_or_n == 96
    assert fisher_z_from_r(0.999999, 100, 0).p_value < 1e-12
    with pytest.raises(InsufficientSampleError):
        fisher_z_from_r(0.1, 5, 2)


def test_fisher_z_test_on_data():
    d = gaussian(2000, 4)
    assert fisher_z_test(d, "x", "y").p_value < 1e-6
    assert fisher_z_test(d, "x", "y", {"z"}).p_value > 0.001


def test_fisher_provider_matches_function():
    d = gaussian(300, 5)
    ci = FisherZ(d)
    for args in [("x", "y", ()), ("x", "y", ("z",)), ("w", "z", ("x", "y"))]:
        assert ci(*args).p_value == pytest.approx(fisher_z_test(d, *args).p_value, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.9), st.floats(0.01, 0.9), st.integers(10, 5000), st.integers(0, 4))
def test_fisher_p_monotone_in_r_and_n(r1, r2, n, k):
    if abs(r1 - r2) < 1e-6:
        return
    lo, hi = sorted((r1, r2))
    a, b = fisher_z_from_r(lo, n, k), fisher_z_from_r(hi, n, k)
    if b.p_value > 0:
        assert b.p_value < a.p_value
    c = fisher_z_from_r(lo, n + 50, k)
    if a.p_value > 0:
        assert c.p_value < a.p_value


def test_g2_product_table_is_independent():
    counts = np.outer([10, 30], [20, 20, 40]) / 10
    res = g2_from_counts(counts)
    assert res.statistic == pytest.approx(0.0, abs=1e-12)
    assert res.p_value == pytest.approx(1.0)


def test_g2_identical_binary():
    x = ["0"] * 50 + ["1"] * 50
    d = Dataset.from_columns({"x": x, "y": x}, {"x": ["0", "1"], "y": ["0", "1"]})
    assert mutual_information(d, "x", "y") == pytest.approx(math.log(2))
    res = g2_mi_test(d, "x", "y")
    assert res.statistic == pytest.approx(138.629436, abs=1e-5)
    assert res.p_value < 1e-15


def test_g2_two_by_two_fixture():
    table = np.array([[30, 10], [10, 30]], dtype=float)
    # independent plug-in oracle
    p = table / table.sum()
    mi = sum(
        p[i, j] * math.log(p[i, j] / (p[i].sum() * p[:, j].sum())) for i in range(2) for j in range(2)
    )
    g2 = 2 * 80 * mi
    res = g2_from_counts(table)
    assert res.statistic == pytest.approx(g2, rel=1e-12)
    assert res.statistic == pytest.approx(20.92993, abs=1e-4)
    assert res.dof_or_n == 1
    assert res.p_value == pytest.approx(stats.chi2.sf(g2, 1), rel=0.05)


def test_g2_from_dataset_matches_counts_and_skips_empty_strata():
    rows = [("0", "0", "a")] * 30 + [("0", "1", "a")] * 10 + [("1", "0", "a")] * 10 + [("1", "1", "a")] * 30
    cols = list(zip(*rows))
    d = Dataset.from_columns(
        {"x": cols[0], "y": cols[1], "z": cols[2]},
        {"x": ["0", "1"], "y": ["0", "1"], "z": ["a", "b"]},
    )
    res = g2_mi_test(d, "x", "y", {"z"})
    assert res.dof_or_n == 1  # stratum z=b never observed
    assert res.statistic == pytest.approx(g2_from_counts([[30, 10], [10, 30]]).statistic)


def test_g2_shuffle_calibration():
    rng = np.random.default_rng(8)
    n = 400
    x = rng.integers(0, 3, n).astype(str)
    y = rng.integers(0, 2, n).astype(str)
    ps = []
    for _ in range(200):
        y = rng.permutation(y)
        d = Dataset.from_columns({"x": x, "y": y}, {"x": ["0", "1", "2"], "y": ["0", "1"]})
        res = g2_mi_test(d, "x", "y")
        assert res.statistic >= 0
        ps.append(res.p_value)
    assert 0.4 <= np.mean(ps) <= 0.6


def test_g2_rejects_continuous_columns():
    d = gaussian(20, 0)
    with pytest.raises(InvalidArgumentError):
        g2_mi_test(d, "x", "y")
    with pytest.raises(InsufficientSampleError):
        g2_from_counts(np.zeros((2, 2)))


def test_oracle_examples():
    g = two_context_graph()
    assert oracle_ci_test(g, "T", "C1", {"X"}).p_value == 1.0
    assert oracle_ci_test(g, "T", "C1", set()).p_value == 0.0
    assert oracle_ci_test(g, "X", "T", {"C2", "Y"}).p_value == 0.0


def test_oracle_symmetric_and_binary():
    rng = np.random.default_rng(21)
    for _ in range(20):
        g = random_admg(rng, 6)
        ci = OracleCI(g)
        for x in g.vertices:
            for y in g.vertices:
                if x == y:
                    continue
                s = [v for v in g.vertices if v not in (x, y) and rng.random() < 0.3]
                p = ci(x, y, s).p_value
                assert p in (0.0, 1.0)
                assert p == ci(y, x, s).p_value


def test_ci_for_dispatch():
    assert isinstance(ci_for(gaussian(20, 0)), FisherZ)
    d = Dataset.from_columns({"a": ["u", "v"], "b": ["u", "u"]}, {"a": ["u", "v"], "b": ["u", "v"]})
    assert isinstance(ci_for(d), GSquared)
    mixed = Dataset.from_columns({"a": ["u", "v"], "b": [0.1, 0.2]}, {"a": ["u", "v"]})
    with pytest.raises(InvalidArgumentError):
        ci_for(mixed)
