"""Post-selection inference for Pearson correlations via the Fisher transform.

An observed correlation r from n samples maps to y = fisher_transform(r),
which is approximately N(theta, 1/(n-3)). When r was only reported because it
cleared a threshold, y follows the two-sided truncated normal of
``selcorr.truncnorm``, and the debiased estimate is the inverse transform of
that family's conditional MLE. Confidence intervals come from inverting the
conditional CDF in theta at equal tails, then back-transforming the endpoints.

Every quantity here works on the Fisher-z normal approximation; mixing it with
the exact Pearson sampling distribution would trade consistency for nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ConvergenceError, DomainError, SelectionViolationError
from .truncnorm import (
    DEFAULT_SOLVER,
    ConditionalModel,
    SolverConfig,
    conditional_cdf,
    conditional_mle,
)

#: absolute theta-scale tolerance for interval endpoint bisection
_ENDPOINT_TOL = 1e-9
#: bracket half-width for endpoint searches, in units of sigma
_BRACKET_SIGMAS = 20.0


@dataclass(frozen=True)
class CorrelationObservation:
    """An observed Pearson correlation with its sample size."""

    r: float
    n: int

    def __post_init__(self):
        if not math.isfinite(self.r) or abs(self.r) >= 1.0:
            raise DomainError(
                f"|r| must be strictly below 1 (r={self.r}); degenerate "
                "correlations cannot be Fisher-transformed"
            )
        if int(self.n) != self.n or self.n < 4:
            raise DomainError(f"n must be an integer >= 4, got {self.n}")

    @property
    def fisher_z(self) -> float:
        return fisher_transform(self.r)

    @property
    def sigma(self) -> float:
        """Standard deviation of the Fisher-z image, 1/sqrt(n-3)."""
        return 1.0 / math.sqrt(self.n - 3)


@dataclass(frozen=True)
class SelectiveEstimate:
    """Conditional correlation estimate, optionally with a confidence interval."""

    rho_hat: float
    theta_hat: float
    interval: tuple[float, float] | None
    threshold_r: float

    def __post_init__(self):
        if self.interval is not None:
            lo, hi = self.interval
            if not lo <= hi:
                raise DomainError(f"interval endpoints out of order: ({lo}, {hi})")


def fisher_transform(r: float) -> float:
    """y = atanh(r) = 0.5*log((1+r)/(1-r)); strictly increasing and odd."""
    if not math.isfinite(r) or abs(r) >= 1.0:
        raise DomainError(f"fisher_transform requires |r| < 1, got {r}")
    return math.atanh(r)


def inverse_fisher(theta: float) -> float:
    """rho = tanh(theta), the back-transform onto (-1, 1)."""
    if not math.isfinite(theta):
        raise DomainError(f"inverse_fisher requires finite input, got {theta}")
    return math.tanh(theta)


def _z_scale(obs: CorrelationObservation, threshold_r: float):
    if not (0.0 < threshold_r < 1.0):
        raise DomainError(f"threshold_r must lie in (0, 1), got {threshold_r}")
    if abs(obs.r) < threshold_r:
        raise SelectionViolationError(
            f"observation r={obs.r} was not selected at threshold {threshold_r}; "
            "conditional estimation is undefined for it"
        )
    return obs.fisher_z, obs.sigma, fisher_transform(threshold_r)


def conditional_correlation_estimate(
    obs: CorrelationObservation,
    threshold_r: float,
    cfg: SolverConfig = DEFAULT_SOLVER,
    alpha: float | None = None,
) -> SelectiveEstimate:
    """Debiased estimate of the true correlation given selection |r| >= threshold_r.

    Maps to the Fisher-z scale (sigma = 1/sqrt(n-3), cutoff = atanh(threshold_r)),
    solves for the conditional MLE there, and back-transforms. |rho_hat| never
    exceeds |r|. If ``alpha`` is given, an equal-tailed conditional confidence
    interval at level 1-alpha is attached.
    """
    y, sigma, cutoff = _z_scale(obs, threshold_r)
    theta_hat = conditional_mle(y, sigma, cutoff, cfg)
    estimate = SelectiveEstimate(
        rho_hat=inverse_fisher(theta_hat),
        theta_hat=theta_hat,
        interval=None,
        threshold_r=threshold_r,
    )
    if alpha is not None:
        estimate = replace(estimate, interval=conditional_interval(obs, threshold_r, alpha))
    return estimate


def _solve_theta_for_cdf(y, sigma, cutoff, target, lo, hi):
    # The conditional CDF at fixed y is nonincreasing in theta, so bisection
    # keeps cdf(lo) >= target >= cdf(hi) throughout.
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= _ENDPOINT_TOL:
            return mid
        val = conditional_cdf(y, ConditionalModel(mid, sigma, cutoff))
        if val > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def conditional_interval(
    obs: CorrelationObservation,
    threshold_r: float,
    alpha: float,
) -> tuple[float, float]:
    """Equal-tailed confidence interval for the true correlation, given selection.

    On the Fisher-z scale the upper endpoint solves
    conditional_cdf(y; theta) = alpha/2 and the lower endpoint solves
    conditional_cdf(y; theta) = 1 - alpha/2; both are back-transformed through
    inverse_fisher. Conditional on selection at a fixed threshold the interval
    covers the true correlation with probability exactly 1 - alpha (up to the
    Fisher-z approximation).
    """
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    y, sigma, cutoff = _z_scale(obs, threshold_r)

    lo_b = y - _BRACKET_SIGMAS * sigma
    hi_b = y + _BRACKET_SIGMAS * sigma

    def cdf_at(theta):
        return conditional_cdf(y, ConditionalModel(theta, sigma, cutoff))

    # Monotonicity of the CDF in theta is what makes the inversion well posed;
    # verify it numerically rather than assuming it silently.
    probe = [lo_b + k * (hi_b - lo_b) / 8.0 for k in range(9)]
    values = [cdf_at(t) for t in probe]
    for a, b in zip(values, values[1:]):
        if b > a + 1e-9:
            raise ConvergenceError(
                "conditional CDF is not monotone in theta at the observed value; "
                "cannot invert for interval endpoints",
                bracket=(lo_b, hi_b),
            )

    hi_target = alpha / 2.0
    lo_target = 1.0 - alpha / 2.0
    if values[0] < lo_target or values[-1] > hi_target:
        raise ConvergenceError(
            f"interval endpoints not bracketed within {_BRACKET_SIGMAS} sigma "
            f"of the observation",
            bracket=(lo_b, hi_b),
        )

    theta_lo = _solve_theta_for_cdf(y, sigma, cutoff, lo_target, lo_b, hi_b)
    theta_hi = _solve_theta_for_cdf(y, sigma, cutoff, hi_target, lo_b, hi_b)
    lo, hi = inverse_fisher(theta_lo), inverse_fisher(theta_hi)
    if lo > hi:  # can only happen through solver failure, not by construction
        raise ConvergenceError(f"interval endpoints crossed: ({lo}, {hi})")
    return lo, hi
