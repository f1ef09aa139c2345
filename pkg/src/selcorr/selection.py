"""Selection rules mapping per-unit statistics to a selected set.

Three rules are supported: a fixed threshold on |r|, Bonferroni, and the
Benjamini-Hochberg step-up procedure. Each returns a ``SelectionResult``
carrying the selected indices and the effective threshold expressed on the
p-value, standardized-z, and correlation scales. For BH the effective
threshold is the realized step-up cutoff k*alpha/m — the quantity downstream
conditional estimation treats as the (asymptotically constant) selection
boundary.

Scale conventions: a correlation r with sample size n has standardized
statistic z = |atanh(r)|*sqrt(n-3) and two-sided p-value p = 2*(1 - Phi(z)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .correlation import fisher_transform, inverse_fisher
from .errors import DomainError

_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class FixedCorrelation:
    """Select |r| >= threshold_r (boundary inclusive)."""

    threshold_r: float

    def __post_init__(self):
        if not (0.0 < self.threshold_r < 1.0):
            raise DomainError(f"threshold_r must lie in (0, 1), got {self.threshold_r}")


@dataclass(frozen=True)
class Bonferroni:
    """Select p <= alpha/m."""

    alpha: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class BenjaminiHochberg:
    """Step-up FDR rule: select p <= k*alpha/m with k the largest qualifying rank."""

    alpha: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")


SelectionRule = FixedCorrelation | Bonferroni | BenjaminiHochberg


@dataclass(frozen=True)
class SelectionResult:
    """Selected indices plus the effective threshold on every relevant scale.

    threshold_r is None when no single sample size applies (it depends on n).
    When nothing is selected the threshold fields carry the rule's nominal
    cutoff for m tests and ``is_empty`` is True.
    """

    selected_indices: tuple[int, ...]
    threshold_p: float
    threshold_z: float
    threshold_r: float | None
    rule: SelectionRule
    m: int

    @property
    def is_empty(self) -> bool:
        return len(self.selected_indices) == 0

    def mask(self) -> np.ndarray:
        out = np.zeros(self.m, dtype=bool)
        out[list(self.selected_indices)] = True
        return out


def p_from_correlation(r: float, n: int) -> float:
    """Two-sided p-value of r under the Fisher-z normal approximation."""
    if not (math.isfinite(r) and abs(r) < 1.0):
        raise DomainError(f"|r| must be strictly below 1, got {r}")
    if int(n) != n or n < 4:
        raise DomainError(f"n must be an integer >= 4, got {n}")
    z = abs(fisher_transform(r)) * math.sqrt(n - 3)
    # 2*Phi(-z), floored at the smallest positive double so p stays in (0, 1]
    return max(2.0 * float(ndtr(-z)), _TINY)


def correlation_from_p(p: float, n: int) -> float:
    """Positive correlation whose two-sided p-value equals p; inverse of p_from_correlation."""
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if int(n) != n or n < 4:
        raise DomainError(f"n must be an integer >= 4, got {n}")
    z = -float(ndtri(p / 2.0))
    return inverse_fisher(z / math.sqrt(n - 3))


def _validate_pvalues(pvalues) -> np.ndarray:
    p = np.asarray(pvalues, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise DomainError("pvalues must be a nonempty one-dimensional collection")
    if not np.all(np.isfinite(p)) or np.any(p <= 0.0) or np.any(p > 1.0):
        raise DomainError("all p-values must be finite and in (0, 1]")
    return p


def _thresholds(threshold_p: float, n: int | None):
    threshold_z = -float(ndtri(threshold_p / 2.0))
    threshold_r = None
    if n is not None:
        threshold_r = inverse_fisher(threshold_z / math.sqrt(n - 3))
    return threshold_z, threshold_r


def bh_select(pvalues, alpha: float, n: int | None = None) -> SelectionResult:
    """Benjamini-Hochberg step-up selection.

    With ascending order statistics p_(1) <= ... <= p_(m), finds
    k = max{i : p_(i) <= i*alpha/m} and selects every p <= k*alpha/m (an
    identical set to p <= p_(k); ties at the cutoff are all selected). If no
    rank qualifies the selection is empty and threshold_p records alpha/m,
    the rule's nominal single-test cutoff.

    Passing the shared sample size ``n`` fills in threshold_r.
    """
    rule = BenjaminiHochberg(alpha)
    p = _validate_pvalues(pvalues)
    m = p.size
    ranked = np.sort(p)
    steps = alpha * np.arange(1, m + 1) / m
    qualifying = np.flatnonzero(ranked <= steps)
    if qualifying.size:
        k = int(qualifying[-1]) + 1
        threshold_p = k * alpha / m
        selected = tuple(int(i) for i in np.flatnonzero(p <= threshold_p))
    else:
        threshold_p = alpha / m
        selected = ()
    threshold_z, threshold_r = _thresholds(threshold_p, n)
    return SelectionResult(selected, threshold_p, threshold_z, threshold_r, rule, m)


def bonferroni_select(pvalues, alpha: float, n: int | None = None) -> SelectionResult:
    rule = Bonferroni(alpha)
    p = _validate_pvalues(pvalues)
    m = p.size
    threshold_p = alpha / m
    selected = tuple(int(i) for i in np.flatnonzero(p <= threshold_p))
    threshold_z, threshold_r = _thresholds(threshold_p, n)
    return SelectionResult(selected, threshold_p, threshold_z, threshold_r, rule, m)


def fixed_select(correlations, n: int, threshold_r: float) -> SelectionResult:
    """Select |r_i| >= threshold_r; the boundary itself counts as selected."""
    rule = FixedCorrelation(threshold_r)
    r = np.asarray(correlations, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise DomainError("correlations must be a nonempty one-dimensional collection")
    if not np.all(np.isfinite(r)) or np.any(np.abs(r) >= 1.0):
        raise DomainError("all correlations must be finite with |r| < 1")
    if int(n) != n or n < 4:
        raise DomainError(f"n must be an integer >= 4, got {n}")
    selected = tuple(int(i) for i in np.flatnonzero(np.abs(r) >= threshold_r))
    threshold_p = p_from_correlation(threshold_r, n)
    threshold_z = abs(fisher_transform(threshold_r)) * math.sqrt(n - 3)
    return SelectionResult(selected, threshold_p, threshold_z, threshold_r, rule, r.size)


def apply_rule(rule: SelectionRule, correlations, n) -> SelectionResult:
    """Run a selection rule against observed correlations.

    ``n`` may be a scalar sample size or one per observation (Bonferroni/BH
    only; a fixed r-threshold with heterogeneous n is still well defined on
    the r scale, and threshold_p/threshold_z are then reported for the
    smallest n, i.e. the loosest per-row image of the cutoff).
    """
    r = np.asarray(correlations, dtype=float)
    n_arr = np.broadcast_to(np.asarray(n), r.shape)
    shared_n = int(n_arr.flat[0]) if np.all(n_arr == n_arr.flat[0]) else None
    if isinstance(rule, FixedCorrelation):
        eff_n = shared_n if shared_n is not None else int(n_arr.min())
        return fixed_select(r, eff_n, rule.threshold_r)
    pvalues = [p_from_correlation(float(ri), int(ni)) for ri, ni in zip(r, n_arr)]
    if isinstance(rule, Bonferroni):
        return bonferroni_select(pvalues, rule.alpha, n=shared_n)
    if isinstance(rule, BenjaminiHochberg):
        return bh_select(pvalues, rule.alpha, n=shared_n)
    raise DomainError(f"unknown selection rule: {rule!r}")
