"""Tests for the selection rules and the p/z/r threshold maps."""

import numpy as np
import pytest
from scipy.stats import norm

from selcorr.errors import DomainError
from selcorr.selection import (
    BenjaminiHochberg,
    Bonferroni,
    FixedCorrelation,
    apply_rule,
    bh_select,
    bonferroni_select,
    correlation_from_p,
    fixed_select,
    p_from_correlation,
)


def brute_force_bh(pvalues, alpha):
    """O(m^2) literal step-up rule, used as the oracle."""
    p = np.asarray(pvalues, dtype=float)
    m = len(p)
    order = np.sort(p)
    k = 0
    for i in range(1, m + 1):
        if order[i - 1] <= i * alpha / m:
            k = i
    if k == 0:
        return np.array([], dtype=int), alpha / m
    cutoff = k * alpha / m
    return np.flatnonzero(p <= cutoff), cutoff


# ---------------------------------------------------------------------------
# p <-> r maps
# ---------------------------------------------------------------------------

def test_p_from_correlation_values():
    assert p_from_correlation(0.0, 20) == 1.0
    expected = 2 * norm.sf(np.arctanh(0.6) * 4)
    assert p_from_correlation(0.6, 19) == pytest.approx(float(expected), rel=1e-12)
    assert p_from_correlation(0.6, 19) == pytest.approx(0.005562, abs=1e-6)
    # two-sidedness
    assert p_from_correlation(-0.6, 19) == p_from_correlation(0.6, 19)


def test_p_from_correlation_monotone_in_magnitude():
    ps = [p_from_correlation(r, 25) for r in np.linspace(0.0, 0.95, 30)]
    assert np.all(np.diff(ps) < 0)


def test_p_from_correlation_domain():
    with pytest.raises(DomainError):
        p_from_correlation(1.0, 20)
    with pytest.raises(DomainError):
        p_from_correlation(0.5, 3)


def test_correlation_from_p_inverts():
    # 0.005562 is the 4-significant-digit p for r = 0.6; inverting it recovers
    # r to the precision that rounding supports
    assert correlation_from_p(0.005562, 19) == pytest.approx(0.6, abs=1e-5)
    exact_p = p_from_correlation(0.6, 19)
    assert correlation_from_p(exact_p, 19) == pytest.approx(0.6, abs=1e-9)
    for p in (0.9, 0.5, 0.05, 1e-4):
        for n in (5, 19, 100):
            r = correlation_from_p(p, n)
            assert p_from_correlation(r, n) == pytest.approx(p, abs=1e-9)
    assert correlation_from_p(0.999999, 20) == pytest.approx(0.0, abs=1e-3)


def test_correlation_from_p_domain():
    for bad in (0.0, 1.0, -0.2, 1.7):
        with pytest.raises(DomainError):
            correlation_from_p(bad, 20)


# ---------------------------------------------------------------------------
# BH
# ---------------------------------------------------------------------------

def test_bh_documented_example():
    result = bh_select([0.001, 0.02, 0.03, 0.9], 0.1)
    assert tuple(result.selected_indices) == (0, 1, 2)
    assert result.threshold_p == pytest.approx(3 * 0.1 / 4)
    assert result.m == 4
    assert not result.is_empty


def test_bh_nothing_selected():
    result = bh_select([1.0, 1.0, 1.0], 0.1)
    assert len(result.selected_indices) == 0
    assert result.is_empty
    assert result.threshold_p == pytest.approx(0.1 / 3)


def test_bh_single_test_reduces_to_level():
    result = bh_select([0.04], 0.05)
    assert tuple(result.selected_indices) == (0,)
    assert result.threshold_p == pytest.approx(0.05)


def test_bh_matches_brute_force_randomized():
    rng = np.random.default_rng(17)
    for _ in range(300):
        m = int(rng.integers(1, 201))
        # mix uniform nulls with a clump of small p-values
        p = rng.uniform(size=m)
        k = int(rng.integers(0, m + 1))
        p[:k] = rng.uniform(0, 0.05, size=k)
        alpha = float(rng.uniform(0.01, 0.3))
        want_idx, want_threshold = brute_force_bh(p, alpha)
        got = bh_select(p, alpha)
        assert np.array_equal(np.asarray(got.selected_indices), want_idx)
        assert got.threshold_p == pytest.approx(want_threshold, rel=1e-12)


def test_bh_ties_at_cutoff_all_selected():
    # three identical p-values exactly at the step-up boundary
    result = bh_select([0.075, 0.075, 0.075, 0.9], 0.1)
    assert tuple(result.selected_indices) == (0, 1, 2)


def test_bh_monotone_in_alpha():
    rng = np.random.default_rng(23)
    p = rng.uniform(size=60)
    previous: set = set()
    for alpha in (0.01, 0.05, 0.1, 0.2, 0.4):
        current = set(bh_select(p, alpha).selected_indices)
        assert previous <= current
        previous = current


def test_bh_superset_of_bonferroni():
    rng = np.random.default_rng(29)
    for _ in range(50):
        p = rng.uniform(0, 0.2, size=40)
        bh = set(bh_select(p, 0.1).selected_indices)
        bonf = set(bonferroni_select(p, 0.1).selected_indices)
        assert bonf <= bh


def test_bh_input_validation():
    with pytest.raises(DomainError):
        bh_select([], 0.1)
    with pytest.raises(DomainError):
        bh_select([0.5, 1.5], 0.1)
    with pytest.raises(DomainError):
        bh_select([0.5, 0.0], 0.1)
    with pytest.raises(DomainError):
        bh_select([0.5], 0.0)


# ---------------------------------------------------------------------------
# Bonferroni and fixed threshold
# ---------------------------------------------------------------------------

def test_bonferroni_threshold_is_alpha_over_m():
    result = bonferroni_select([0.5] * 10, 0.05)
    assert result.threshold_p == pytest.approx(0.005)
    assert result.is_empty


def test_bonferroni_documented_example():
    result = bonferroni_select([0.004, 0.006], 0.05)
    assert tuple(result.selected_indices) == (0, 1)
    assert result.threshold_p == pytest.approx(0.025)


def test_bonferroni_empty_when_min_p_large():
    result = bonferroni_select([0.3, 0.4], 0.05)
    assert result.is_empty


def test_fixed_select_boundary_inclusive():
    result = fixed_select([0.59, 0.60, -0.7], 20, 0.6)
    assert tuple(result.selected_indices) == (1, 2)
    assert result.threshold_r == pytest.approx(0.6)


def test_fixed_select_near_one_selects_nothing():
    result = fixed_select([0.3, -0.5, 0.8], 20, 0.999)
    assert result.is_empty


def test_fixed_select_matches_filter_oracle():
    rng = np.random.default_rng(31)
    r = rng.uniform(-0.99, 0.99, size=200)
    threshold = 0.45
    result = fixed_select(r, 30, threshold)
    expected = np.flatnonzero(np.abs(r) >= threshold)
    assert np.array_equal(np.asarray(result.selected_indices), expected)


# ---------------------------------------------------------------------------
# threshold scale consistency
# ---------------------------------------------------------------------------

def test_threshold_scales_consistent():
    rng = np.random.default_rng(37)
    r = rng.uniform(-0.9, 0.9, size=50)
    n = 24
    for rule in (FixedCorrelation(0.5), Bonferroni(0.05), BenjaminiHochberg(0.1)):
        result = apply_rule(rule, r, n)
        assert correlation_from_p(result.threshold_p, n) == pytest.approx(
            result.threshold_r, abs=1e-9
        )
        # selected set matches the threshold semantics on every scale
        p = np.array([p_from_correlation(float(v), n) for v in r])
        expected = np.flatnonzero(p <= result.threshold_p + 1e-15)
        assert np.array_equal(np.asarray(result.selected_indices), expected)


def test_selection_mask_shape():
    result = fixed_select([0.7, 0.1, -0.8], 20, 0.6)
    mask = result.mask()
    assert mask.tolist() == [True, False, True]


def test_rule_parameter_validation():
    with pytest.raises(DomainError):
        FixedCorrelation(0.0)
    with pytest.raises(DomainError):
        FixedCorrelation(1.0)
    with pytest.raises(DomainError):
        Bonferroni(1.0)
    with pytest.raises(DomainError):
        BenjaminiHochberg(0.0)
