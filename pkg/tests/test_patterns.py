import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bohmpair import Pattern, compare_patterns, measure_gap
from bohmpair.errors import GridMismatch
from bohmpair.patterns import uniform_edges


def test_uniform_edges():
    e = uniform_edges(-1.0, 1.0, 0.1)
    assert e.size == 21 and e[0] == -1.0 and e[-1] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        uniform_edges(0, 1, 0)


def test_pattern_invariants():
    with pytest.raises(ValueError):
        Pattern([0, 1, 1], [1, 1])
    with pytest.raises(ValueError):
        Pattern([0, 1, 2], [1, -1])
    with pytest.raises(ValueError):
        Pattern([0, 1, 2], [1])
    p = Pattern([0, 1, 3], [2, 6])
    assert p.total_weight == 8
    np.testing.assert_allclose(p.normalized_density, [0.25, 0.375])


def test_identical_patterns_zero_divergence():
    p = Pattern(uniform_edges(0, 5, 0.5), np.arange(1, 11) * 10.0)
    d = compare_patterns(p, p)
    assert d.ks == 0 and d.tv == 0
    assert d.chi2 == pytest.approx(0, abs=1e-20) and d.chi2_pvalue == 1.0


def test_shifted_pattern_tv():
    counts = np.array([0, 5, 10, 20, 10, 5, 0, 0], float)
    edges = uniform_edges(0, 8, 1.0)
    a, b = Pattern(edges, counts), Pattern(edges, np.roll(counts, 1))
    d = compare_patterns(a, b)
    assert d.tv == pytest.approx(0.5 * np.abs(a.probabilities - b.probabilities).sum())


def test_grid_mismatch():
    with pytest.raises(GridMismatch):
        compare_patterns(Pattern([0, 1, 2], [1, 1]), Pattern([0, 1, 2.5], [1, 1]))


def test_compare_with_density_curve():
    edges = uniform_edges(-6, 6, 0.25)
    rng = np.random.default_rng(2)
    counts, _ = np.histogram(rng.normal(size=50_000), edges)
    d = compare_patterns(Pattern(edges, counts), lambda y: np.exp(-y * y / 2))
    assert d.ks < 0.01 and d.chi2_pvalue > 1e-3
    bad = compare_patterns(Pattern(edges, counts), lambda y: np.exp(-(y - 0.3) ** 2 / 2))
    assert bad.chi2_pvalue < 1e-6


@given(st.lists(st.integers(0, 50), min_size=3, max_size=30))
def test_divergence_ranges(counts):
    edges = np.arange(len(counts) + 1.0)
    a = Pattern(edges, counts)
    b = Pattern(edges, np.ones(len(counts)))
    d = compare_patterns(a, b)
    assert 0 <= d.ks <= 1 and 0 <= d.tv <= 1
    assert 0 <= d.chi2_pvalue <= 1


def test_gap_flat_pattern():
    g = measure_gap(Pattern(uniform_edges(0, 10, 1), np.ones(10)), 0.05)
    assert g.length == 0 and math.isnan(g.center)
    assert g.as_dict()["center"] is None


def test_gap_construction():
    w = 0.5
    p = Pattern(np.arange(7) * w, [1, 1, 0, 0, 0, 1])
    g = measure_gap(p, 0.05)
    assert g.length == pytest.approx(3 * w)
    assert g.center == pytest.approx(p.centers[3])


def test_gap_needs_both_flanks():
    p = Pattern(np.arange(6.0), [1, 1, 0, 0, 0])
    assert measure_gap(p, 0.05).length == 0


def test_gap_picks_widest():
    p = Pattern(np.arange(10.0), [1, 0, 1, 0, 0, 0, 1, 0, 1])
    g = measure_gap(p, 0.5)
    assert (g.left, g.right) == (3.0, 6.0)


def test_gap_bad_fraction():
    with pytest.raises(ValueError):
        measure_gap(Pattern([0, 1], [1]), 1.0)
