"""Post-selection estimation of thresholded correlations.

Correlations that are only reported because they cleared a significance or
magnitude threshold are biased upward (the winner's curse). This package
models the surviving Fisher-z statistic as a two-sided truncated normal and
provides the conditional maximum-likelihood estimate, conditional confidence
intervals, the selection rules that define the truncation (fixed threshold,
Bonferroni, Benjamini-Hochberg), and a seeded simulation harness that
quantifies the bias/variance trade-offs against the raw and data-splitting
estimators.
"""

__version__ = "0.1.0"

from .correlation import (
    CorrelationObservation,
    SelectiveEstimate,
    conditional_correlation_estimate,
    conditional_interval,
    fisher_transform,
    inverse_fisher,
)
from .errors import ConvergenceError, DomainError, FitError, SelectionViolationError
from .estimator import SelectiveCorrelationEstimator
from .selection import (
    BenjaminiHochberg,
    Bonferroni,
    FixedCorrelation,
    SelectionResult,
    apply_rule,
    bh_select,
    bonferroni_select,
    correlation_from_p,
    fixed_select,
    p_from_correlation,
)
from .truncnorm import (
    ConditionalModel,
    SolverConfig,
    conditional_cdf,
    conditional_loglik,
    conditional_mle,
    conditional_mle_batch,
    conditional_pdf,
    score,
    survival_mass,
)

__all__ = [
    "__version__",
    "BenjaminiHochberg",
    "Bonferroni",
    "ConditionalModel",
    "ConvergenceError",
    "CorrelationObservation",
    "DomainError",
    "FitError",
    "FixedCorrelation",
    "SelectionResult",
    "SelectionViolationError",
    "SelectiveCorrelationEstimator",
    "SelectiveEstimate",
    "SolverConfig",
    "apply_rule",
    "bh_select",
    "bonferroni_select",
    "conditional_cdf",
    "conditional_correlation_estimate",
    "conditional_interval",
    "conditional_loglik",
    "conditional_mle",
    "conditional_mle_batch",
    "conditional_pdf",
    "correlation_from_p",
    "fisher_transform",
    "fixed_select",
    "inverse_fisher",
    "p_from_correlation",
    "score",
    "survival_mass",
]
