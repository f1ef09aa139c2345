"""scikit-learn style front end over selection + conditional estimation."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .correlation import CorrelationObservation, conditional_correlation_estimate
from .errors import DomainError
from .selection import (
    BenjaminiHochberg,
    Bonferroni,
    FixedCorrelation,
    SelectionRule,
    apply_rule,
)
from .truncnorm import DEFAULT_SOLVER


def _as_correlation_array(X) -> np.ndarray:
    r = np.asarray(X, dtype=float)
    if r.ndim == 2 and r.shape[1] == 1:
        r = r[:, 0]
    if r.ndim != 1:
        raise DomainError("expected a 1-d array of correlations (or a single column)")
    if r.size == 0:
        raise DomainError("expected at least one correlation")
    if not np.all(np.isfinite(r)) or np.any(np.abs(r) >= 1.0):
        raise DomainError("all correlations must be finite with |r| < 1")
    return r


class SelectiveCorrelationEstimator(TransformerMixin, BaseEstimator):
    """Select correlations by a threshold rule and debias the survivors.

    fit(X) runs the selection rule over the observed correlations and freezes
    the realized threshold (for BH the data-dependent step-up cutoff); it then
    computes the conditional MLE and, optionally, an equal-tailed conditional
    confidence interval for every selected entry. transform(X) maps
    correlations to their debiased estimates under the frozen threshold, with
    NaN for entries inside the selection boundary.

    Parameters
    ----------
    rule : {"fixed", "bonferroni", "bh"}
        Selection rule family.
    threshold : float
        |r| cutoff for the fixed rule.
    level : float
        alpha for the Bonferroni / BH rules.
    n : int or None
        Sample size behind each correlation; may instead be passed to fit.
    ci_alpha : float or None
        Miscoverage level of the conditional intervals; None skips them.
    """

    def __init__(self, rule="bh", threshold=0.6, level=0.1, n=None, ci_alpha=0.05):
        self.rule = rule
        self.threshold = threshold
        self.level = level
        self.n = n
        self.ci_alpha = ci_alpha

    def _make_rule(self) -> SelectionRule:
        if self.rule == "fixed":
            return FixedCorrelation(self.threshold)
        if self.rule == "bonferroni":
            return Bonferroni(self.level)
        if self.rule == "bh":
            return BenjaminiHochberg(self.level)
        raise DomainError(f"unknown rule {self.rule!r}; expected fixed, bonferroni or bh")

    def _resolve_n(self, n, size: int) -> np.ndarray:
        n = self.n if n is None else n
        if n is None:
            raise DomainError("a sample size n is required (constructor or fit argument)")
        n_arr = np.broadcast_to(np.asarray(n, dtype=int), (size,))
        if np.any(n_arr < 4):
            raise DomainError("all sample sizes must be >= 4")
        return n_arr

    def fit(self, X, y=None, n=None):
        r = _as_correlation_array(X)
        n_arr = self._resolve_n(n, r.size)
        rule = self._make_rule()
        result = apply_rule(rule, r, n_arr)

        self.m_ = r.size
        self.selection_ = result
        self.selected_mask_ = result.mask()
        self.threshold_p_ = result.threshold_p
        self.threshold_z_ = result.threshold_z

        estimates = np.full(r.size, np.nan)
        intervals = np.full((r.size, 2), np.nan)
        thresholds_r = np.full(r.size, np.nan)
        for i in result.selected_indices:
            obs = CorrelationObservation(float(r[i]), int(n_arr[i]))
            # p/z/r round-tripping can land the cutoff a hair above a selected
            # |r|; the selection event itself is authoritative
            thr = min(self._row_threshold(result, int(n_arr[i])), abs(float(r[i])))
            thresholds_r[i] = thr
            est = conditional_correlation_estimate(
                obs, thr, DEFAULT_SOLVER, alpha=self.ci_alpha
            )
            estimates[i] = est.rho_hat
            if est.interval is not None:
                intervals[i] = est.interval
        self.estimates_ = estimates
        self.intervals_ = intervals
        self.threshold_r_ = thresholds_r
        return self

    def _row_threshold(self, result, n: int) -> float:
        if isinstance(result.rule, FixedCorrelation):
            return result.rule.threshold_r
        return math.tanh(result.threshold_z / math.sqrt(n - 3))

    def transform(self, X, n=None):
        if not hasattr(self, "selection_"):
            raise DomainError("estimator is not fitted; call fit first")
        r = _as_correlation_array(X)
        n_arr = self._resolve_n(n, r.size)
        out = np.full(r.size, np.nan)
        for i in range(r.size):
            cutoff = self._row_threshold(self.selection_, int(n_arr[i]))
            if abs(r[i]) < cutoff:
                continue
            obs = CorrelationObservation(float(r[i]), int(n_arr[i]))
            out[i] = conditional_correlation_estimate(obs, cutoff, DEFAULT_SOLVER).rho_hat
        return out.reshape(-1, 1)
