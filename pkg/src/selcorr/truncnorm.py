"""The two-sided truncated normal family and its conditional MLE.

A latent variable Y ~ N(theta, sigma^2) is observed only when it clears a
two-sided threshold, X = Y given |Y| >= cutoff. The density of X is the normal
density renormalized by the selection probability

    Q(theta) = P(|Y| >= cutoff),

and is zero inside (-cutoff, cutoff). Estimating theta by maximizing this
conditional likelihood removes the selection bias that afflicts the raw
observation: values just above the threshold are shrunk strongly, values far
above it are left nearly untouched (a compromise between soft and hard
thresholding).

The likelihood is continuous and unimodal in theta, so the MLE is the unique
root of the analytic score; ``conditional_mle`` finds it by bisection over an
expanding bracket below the observation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from .errors import ConvergenceError, DomainError

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ConditionalModel:
    """Parameters of the two-sided truncated normal distribution.

    theta:  location of the latent (untruncated) normal.
    sigma:  standard deviation of the latent normal, assumed known.
    cutoff: two-sided selection threshold, in the same units as theta.
    """

    theta: float
    sigma: float = 1.0
    cutoff: float = 1.0

    def __post_init__(self):
        _check_scale(self.sigma, self.cutoff)
        if not math.isfinite(self.theta):
            raise DomainError(f"theta must be finite, got {self.theta}")


@dataclass(frozen=True)
class SolverConfig:
    """Tuning knobs for the bisection MLE solver.

    tolerance:                    accepted score residual at the returned root.
    max_iterations:               bisection iteration cap.
    bracket_halfwidth_multiplier: initial bracket size in units of sigma.
    """

    tolerance: float = 1e-10
    max_iterations: int = 200
    bracket_halfwidth_multiplier: float = 12.0

    def __post_init__(self):
        if not (self.tolerance > 0 and math.isfinite(self.tolerance)):
            raise DomainError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise DomainError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not (self.bracket_halfwidth_multiplier > 0):
            raise DomainError(
                f"bracket_halfwidth_multiplier must be positive, got "
                f"{self.bracket_halfwidth_multiplier}"
            )


DEFAULT_SOLVER = SolverConfig()


def _check_scale(sigma, cutoff) -> None:
    if not (np.all(np.isfinite(sigma)) and np.all(np.asarray(sigma) > 0)):
        raise DomainError(f"sigma must be finite and positive, got {sigma}")
    if not (np.all(np.isfinite(cutoff)) and np.all(np.asarray(cutoff) > 0)):
        raise DomainError(f"cutoff must be finite and positive, got {cutoff}")


def _log_phi(z):
    return -0.5 * (z * z + _LOG_2PI)


def log_survival_mass(theta, sigma, cutoff):
    """log P(|Y| >= cutoff) for Y ~ N(theta, sigma^2); broadcasts like numpy.

    Each tail is evaluated on the log scale via log_ndtr and combined with
    logaddexp. Subtracting CDFs instead would cancel catastrophically once
    theta sits far from +/-cutoff and one tail carries all the mass.
    """
    upper = log_ndtr((theta - cutoff) / sigma)   # log P(Y >= cutoff)
    lower = log_ndtr(-(theta + cutoff) / sigma)  # log P(Y <= -cutoff)
    return np.logaddexp(upper, lower)


def survival_mass(theta: float, sigma: float, cutoff: float) -> float:
    """Selection probability Q(theta) = P(|Y| >= cutoff) for Y ~ N(theta, sigma^2)."""
    _check_scale(sigma, cutoff)
    if not np.all(np.isfinite(theta)):
        raise DomainError(f"theta must be finite, got {theta}")
    return float(np.exp(log_survival_mass(theta, sigma, cutoff)))


def conditional_pdf(x: float, model: ConditionalModel) -> float:
    """Density of X = Y | |Y| >= cutoff at x; zero inside the truncation window."""
    if abs(x) < model.cutoff:
        return 0.0
    z = (x - model.theta) / model.sigma
    log_dens = _log_phi(z) - math.log(model.sigma) - log_survival_mass(
        model.theta, model.sigma, model.cutoff
    )
    return float(np.exp(log_dens))


def conditional_cdf(x: float, model: ConditionalModel) -> float:
    """P(X <= x) for the two-sided truncated normal.

    Constant on [-cutoff, cutoff) at the left-tail mass, since the density
    vanishes there.
    """
    theta, sigma, cutoff = model.theta, model.sigma, model.cutoff
    logq = log_survival_mass(theta, sigma, cutoff)
    if x <= -cutoff:
        return float(np.exp(log_ndtr((x - theta) / sigma) - logq))
    if x < cutoff:
        return float(np.exp(log_ndtr(-(cutoff + theta) / sigma) - logq))
    # P(X <= x) = 1 - P(Y > x)/Q; the complement form stays accurate deep in
    # the right tail where the additive form would subtract near-equal CDFs.
    return float(1.0 - np.exp(log_ndtr((theta - x) / sigma) - logq))


def _check_observed(x, cutoff) -> None:
    if np.any(np.abs(x) < cutoff):
        raise DomainError(
            f"observation must satisfy |x| >= cutoff; got x={x}, cutoff={cutoff}"
        )


def conditional_loglik(x: float, theta: float, sigma: float, cutoff: float) -> float:
    """Log-likelihood of theta given one observation selected at |x| >= cutoff."""
    _check_scale(sigma, cutoff)
    _check_observed(x, cutoff)
    z = (x - theta) / sigma
    return float(
        _log_phi(z) - math.log(sigma) - log_survival_mass(theta, sigma, cutoff)
    )


def score(x, theta, sigma, cutoff):
    """d/dtheta of conditional_loglik; broadcasts over numpy arrays.

    Equals (x - theta)/sigma^2 minus the derivative of log Q. Both correction
    terms are density-to-mass ratios, so they are formed from log differences
    to survive regions where density and mass underflow together.
    """
    _check_scale(sigma, cutoff)
    _check_observed(x, cutoff)
    logq = log_survival_mass(theta, sigma, cutoff)
    upper = np.exp(_log_phi((cutoff - theta) / sigma) - logq)
    lower = np.exp(_log_phi((cutoff + theta) / sigma) - logq)
    out = (x - theta) / sigma**2 - (upper - lower) / sigma
    if isinstance(out, np.ndarray) and out.ndim > 0:
        return out
    return float(out)


def _score_unchecked(x, theta, sigma, cutoff):
    logq = log_survival_mass(theta, sigma, cutoff)
    upper = np.exp(_log_phi((cutoff - theta) / sigma) - logq)
    lower = np.exp(_log_phi((cutoff + theta) / sigma) - logq)
    return (x - theta) / sigma**2 - (upper - lower) / sigma


def conditional_mle_batch(
    x: np.ndarray,
    sigma,
    cutoff,
    cfg: SolverConfig = DEFAULT_SOLVER,
) -> np.ndarray:
    """Vectorized conditional MLE for many observations at once.

    sigma and cutoff may be scalars or arrays broadcastable against x.
    Each element follows exactly the bisection path the scalar solver takes.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return np.empty(0, dtype=float)
    _check_scale(sigma, cutoff)
    if not np.all(np.isfinite(x)):
        raise DomainError("observations must be finite")
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), x.shape)
    cutoff = np.broadcast_to(np.asarray(cutoff, dtype=float), x.shape)
    _check_observed(x, cutoff)

    # Antisymmetry: solve on the positive side and restore the sign.
    sign = np.where(x < 0, -1.0, 1.0)
    ax = np.abs(x)

    hi = ax.copy()
    f_hi = _score_unchecked(ax, hi, sigma, cutoff)

    # The score is positive for theta far enough below x; expand the bracket
    # geometrically until the sign change is captured.
    width = cfg.bracket_halfwidth_multiplier * sigma
    lo = ax - width
    f_lo = _score_unchecked(ax, lo, sigma, cutoff)
    for _ in range(64):
        need = f_lo <= 0
        if not need.any():
            break
        width = np.where(need, 2.0 * width, width)
        lo = np.where(need, ax - width, lo)
        f_lo = np.where(need, _score_unchecked(ax, lo, sigma, cutoff), f_lo)
    if (f_lo <= 0).any():
        bad = int(np.flatnonzero(f_lo <= 0)[0])
        raise ConvergenceError(
            f"could not bracket the score root for x={x.flat[bad]}",
            bracket=(float(lo.flat[bad]), float(hi.flat[bad])),
        )

    result = np.where(np.abs(f_hi) <= cfg.tolerance, hi, np.nan)
    active = np.isnan(result)
    for _ in range(cfg.max_iterations):
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        f_mid = _score_unchecked(ax, mid, sigma, cutoff)
        done = active & (np.abs(f_mid) <= cfg.tolerance)
        result = np.where(done, mid, result)
        active = active & ~done
        go_up = f_mid > 0
        lo = np.where(active & go_up, mid, lo)
        hi = np.where(active & ~go_up, mid, hi)
    if active.any():
        bad = int(np.flatnonzero(active)[0])
        raise ConvergenceError(
            f"score residual above tolerance after {cfg.max_iterations} "
            f"iterations for x={x.flat[bad]}",
            bracket=(float(lo.flat[bad]), float(hi.flat[bad])),
        )
    return sign * result


def conditional_mle(
    x: float,
    sigma: float,
    cutoff: float,
    cfg: SolverConfig = DEFAULT_SOLVER,
) -> float:
    """Maximum-likelihood estimate of theta from one selected observation.

    Finds the unique root of the score by bisection on [x - k*sigma, x]
    (k = cfg.bracket_halfwidth_multiplier), expanding downward if the root
    is not yet bracketed. Negative observations are handled by antisymmetry,
    so conditional_mle(-x) == -conditional_mle(x).

    Raises DomainError for |x| < cutoff and ConvergenceError (carrying the
    best bracket) if the tolerance is not met within max_iterations.
    """
    out = conditional_mle_batch(np.array([x], dtype=float), sigma, cutoff, cfg)
    return float(out[0])
