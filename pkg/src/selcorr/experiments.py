"""Seeded scenario runners and the metrics layer over selected subsets.

All studies simulate directly on the Fisher-z scale (one draw z ~ N(theta,
1/(n-3)) stands in for a correlation computed from n subjects) and derive
per-unit seeds from the master seed with ``selcorr.seeding.child_seed``, so a
study is a pure function of (config, master_seed): rerunning it reproduces
every table bit for bit, regardless of how the work is scheduled.

Estimators compared throughout:

* ``direct``       — the raw back-transformed observation tanh(z).
* ``conditional``  — the truncated-normal MLE given selection, back-transformed.
* ``split5050``    — select on one half of the subjects, estimate from the
                     other half's raw observation (unbiased, lower power).

Metric tables are emitted as CSV in a fixed column order with a JSON run
manifest next to them.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, replace
from itertools import product
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from . import __version__
from .correlation import fisher_transform
from .errors import DomainError
from .seeding import SeedLike, child_seed, rng_from
from .selection import bh_select
from .simfields import (
    FMRIGenConfig,
    GRFConfig,
    HMMConfig,
    MixtureSignalConfig,
    generate_fmri_like,
    generate_grf,
    generate_hmm_pvalues,
    generate_mixture_signal,
)
from .truncnorm import conditional_mle_batch

METRICS_COLUMNS = (
    "scenario", "rho", "n", "estimator", "scope",
    "bias", "median_bias", "mse", "power", "q05", "q95",
    "n_selected", "undefined",
)

BH_THRESHOLD_COLUMNS = (
    "generator", "m", "threshold_mean", "threshold_sd", "n_defined", "replications",
)

DATASET_COLUMNS = (
    "dataset", "estimator", "bias", "median_bias", "mse", "power",
    "n_selected", "undefined",
)

BY_OBSERVED_COLUMNS = (
    "bin_lo", "bin_hi", "estimator", "bias", "bias_q05", "bias_q95", "mse", "count",
)


@dataclass(frozen=True)
class Metrics:
    """Error and power summaries over a selected subset."""

    bias: float
    median_bias: float
    mse: float
    power: float
    q05: float
    q95: float
    n_selected: int
    undefined: bool


def compute_metrics(estimates, truths, selected_mask, nonnull_mask=None) -> Metrics:
    """Summarize estimation error over the selected entries.

    bias/median_bias/mse and the 5th/95th error percentiles are computed over
    entries with selected_mask set; power is the fraction of non-null entries
    that were selected (NaN without a mask or without non-null entries). An
    empty selection yields NaN error fields and the ``undefined`` flag.
    """
    est = np.asarray(estimates, dtype=float)
    tru = np.asarray(truths, dtype=float)
    sel = np.asarray(selected_mask, dtype=bool)
    if est.shape != tru.shape or est.shape != sel.shape:
        raise DomainError("estimates, truths and selected_mask must have equal length")

    power = float("nan")
    if nonnull_mask is not None:
        nonnull = np.asarray(nonnull_mask, dtype=bool)
        if nonnull.shape != est.shape:
            raise DomainError("nonnull_mask length mismatch")
        n_nonnull = int(nonnull.sum())
        if n_nonnull > 0:
            power = float((sel & nonnull).sum() / n_nonnull)

    n_selected = int(sel.sum())
    if n_selected == 0:
        nan = float("nan")
        return Metrics(nan, nan, nan, power, nan, nan, 0, True)

    errors = est[sel] - tru[sel]
    q05, q95 = np.percentile(errors, [5.0, 95.0])
    return Metrics(
        bias=float(errors.mean()),
        median_bias=float(np.median(errors)),
        mse=float(np.mean(errors**2)),
        power=power,
        q05=float(q05),
        q95=float(q95),
        n_selected=n_selected,
        undefined=False,
    )


def split_half_sizes(n: int) -> tuple[int, int]:
    """(selection half, estimation half); odd n gives the extra subject to selection."""
    n_select = (n + 1) // 2
    n_estimate = n // 2
    if n_estimate <= 3:
        raise DomainError(
            f"n={n} leaves an estimation half of {n_estimate} <= 3 subjects; "
            "need n > 7 for a 50-50 split"
        )
    return n_select, n_estimate


def split_half_estimate(
    theta_true: float, n: int, threshold_r: float, seed: SeedLike
) -> tuple[bool, float | None]:
    """One replication of the data-splitting comparator.

    Simulates independent Fisher-z draws for the two halves, selects on the
    first against the z-image of threshold_r, and (if selected) estimates by
    the raw inverse transform of the second half. Both draws are always
    consumed, so selected and non-selected replications stay seed-aligned.
    """
    n_select, n_estimate = split_half_sizes(n)
    rng = rng_from(seed)
    z_select = theta_true + rng.standard_normal() / math.sqrt(n_select - 3)
    z_estimate = theta_true + rng.standard_normal() / math.sqrt(n_estimate - 3)
    if abs(z_select) < fisher_transform(threshold_r):
        return False, None
    return True, math.tanh(z_estimate)


def _pvalues_from_z(z: np.ndarray, n: int) -> np.ndarray:
    p = 2.0 * ndtr(-np.abs(z) * math.sqrt(n - 3))
    return np.maximum(p, np.finfo(float).tiny)


def _conditional_cutoff(threshold_z: float, n: int, z_selected: np.ndarray) -> float:
    """Fisher-z-scale cutoff implied by a standardized threshold.

    Clamped to the smallest selected |z| so that boundary observations caused
    by p/z round-tripping never fall inside the truncation window.
    """
    cutoff = threshold_z / math.sqrt(n - 3)
    if z_selected.size:
        cutoff = min(cutoff, float(np.min(np.abs(z_selected))))
    return cutoff


# --------------------------------------------------------------------------
# fixed-threshold study
# --------------------------------------------------------------------------

_KNOWN_ESTIMATORS = ("direct", "conditional", "split5050")


def _check_study_grid(replications, n_grid=(), rho_grid=(), estimators=()) -> None:
    if replications < 1:
        raise DomainError("replications must be >= 1")
    for rho in rho_grid:
        if not -1.0 < rho < 1.0:
            raise DomainError(f"rho grid value {rho} lies outside (-1, 1)")
    needs_split = "split5050" in estimators
    for n in n_grid:
        if n <= 3:
            raise DomainError(f"n grid value {n} must exceed 3")
        if needs_split and n <= 7:
            raise DomainError(
                f"n grid value {n} must exceed 7 when the split5050 estimator runs"
            )
    for estimator in estimators:
        if estimator not in _KNOWN_ESTIMATORS:
            raise DomainError(
                f"unknown estimator {estimator!r}; expected a subset of "
                + ", ".join(_KNOWN_ESTIMATORS)
            )


@dataclass(frozen=True)
class FixedThresholdConfig:
    rho_grid: tuple[float, ...] = tuple(round(0.05 * i, 2) for i in range(1, 20))
    n_grid: tuple[int, ...] = (10, 25, 50, 100)
    threshold_r: float = 0.6
    estimators: tuple[str, ...] = ("direct", "conditional", "split5050")
    replications: int = 10_000
    master_seed: int = 0

    def __post_init__(self) -> None:
        _check_study_grid(self.replications, self.n_grid, self.rho_grid, self.estimators)
        if not 0.0 < self.threshold_r < 1.0:
            raise DomainError("threshold_r must lie in (0, 1)")


def run_fixed_threshold_study(cfg: FixedThresholdConfig) -> list[dict]:
    """Bias/MSE of the three estimators under a fixed |r| selection threshold.

    For each (rho, n) grid point, replications of a single observation are
    selected at threshold_r. Metrics are reported for two scopes: the entire
    sample, where non-selected entries contribute an estimate of zero for the
    conditional and split estimators (the direct estimator ignores selection),
    and the selected subset alone. The power column holds each estimator's
    selection frequency among non-null entries in both scopes.
    """
    cutoff = fisher_transform(cfg.threshold_r)
    reps = cfg.replications
    rows: list[dict] = []
    for point, (rho, n) in enumerate(product(cfg.rho_grid, cfg.n_grid)):
        theta = fisher_transform(rho)
        sigma = 1.0 / math.sqrt(n - 3)
        rng = rng_from(child_seed(cfg.master_seed, point))

        z = theta + sigma * rng.standard_normal(reps)
        selected = np.abs(z) >= cutoff
        truth = np.full(reps, rho)
        nonnull = np.full(reps, rho != 0.0, dtype=bool)
        everything = np.ones(reps, dtype=bool)

        estimates_entire: dict[str, np.ndarray] = {}
        masks: dict[str, np.ndarray] = {}
        if "direct" in cfg.estimators:
            estimates_entire["direct"] = np.tanh(z)
            masks["direct"] = selected
        if "conditional" in cfg.estimators:
            cond = np.zeros(reps)
            if selected.any():
                cond[selected] = np.tanh(
                    conditional_mle_batch(z[selected], sigma, cutoff)
                )
            estimates_entire["conditional"] = cond
            masks["conditional"] = selected
        if "split5050" in cfg.estimators:
            n_sel_half, n_est_half = split_half_sizes(n)
            z_a = theta + rng.standard_normal(reps) / math.sqrt(n_sel_half - 3)
            z_b = theta + rng.standard_normal(reps) / math.sqrt(n_est_half - 3)
            split_selected = np.abs(z_a) >= cutoff
            estimates_entire["split5050"] = np.where(split_selected, np.tanh(z_b), 0.0)
            masks["split5050"] = split_selected

        for estimator in cfg.estimators:
            est = estimates_entire[estimator]
            mask = masks[estimator]
            entire = compute_metrics(est, truth, everything, nonnull)
            subset = compute_metrics(est, truth, mask, nonnull)
            # the entire-sample scope scores every entry; selection frequency
            # is still the meaningful power figure for both scopes
            entire = replace(entire, power=subset.power)
            rows.append(_metrics_row("fixed-threshold", rho, n, estimator, "entire", entire))
            rows.append(_metrics_row("fixed-threshold", rho, n, estimator, "selected", subset))
    return rows


# --------------------------------------------------------------------------
# mixture + GRF study
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MixtureStudyConfig:
    rho_h1_grid: tuple[float, ...] = (0.2, 0.35, 0.5, 0.65, 0.8)
    n_grid: tuple[int, ...] = (8, 16, 32)
    dims: tuple[int, int, int] = (10, 10, 10)
    propensity: float = 0.2
    bh_alpha: float = 0.1
    noise_kernel_sd_voxels: float = 1.5
    signal_smoothing_sd_voxels: float = 0.0
    estimators: tuple[str, ...] = ("direct", "conditional", "split5050")
    replications: int = 200
    master_seed: int = 0

    def __post_init__(self) -> None:
        _check_study_grid(self.replications, self.n_grid, self.rho_h1_grid, self.estimators)
        if not 0.0 < self.bh_alpha < 1.0:
            raise DomainError("bh_alpha must lie in (0, 1)")
        if not 0.0 <= self.propensity <= 1.0:
            raise DomainError("propensity must lie in [0, 1]")


def _aggregate_replication_metrics(
    scenario: str, rho: float, n: int, estimator: str, per_rep: list[Metrics]
) -> dict:
    """Average per-replication metrics, skipping empty-selection replications
    for the error fields (their power still counts)."""
    defined = [m for m in per_rep if not m.undefined]
    powers = [m.power for m in per_rep if not math.isnan(m.power)]
    nan = float("nan")
    agg = Metrics(
        bias=float(np.mean([m.bias for m in defined])) if defined else nan,
        median_bias=float(np.mean([m.median_bias for m in defined])) if defined else nan,
        mse=float(np.mean([m.mse for m in defined])) if defined else nan,
        power=float(np.mean(powers)) if powers else nan,
        q05=float(np.mean([m.q05 for m in defined])) if defined else nan,
        q95=float(np.mean([m.q95 for m in defined])) if defined else nan,
        n_selected=int(sum(m.n_selected for m in per_rep)),
        undefined=not defined,
    )
    return _metrics_row(scenario, rho, n, estimator, "selected", agg)


def run_mixture_study(cfg: MixtureStudyConfig) -> list[dict]:
    """Sparse-signal lattices under smooth noise, selected by BH.

    Per replication a mixture signal (non-null voxels at atanh(rho_h1)) is
    summed with a Gaussian random field of marginal variance 1/(n-3); BH at
    bh_alpha runs on the two-sided Fisher-z p-values, and the conditional
    estimator conditions on the realized BH threshold. The split comparator
    redraws independent noise for each half and selects on the first half
    only. Metrics are per-replication over the selected voxels, then averaged.
    """
    rows: list[dict] = []
    voxels = int(np.prod(cfg.dims))
    for point, (rho, n) in enumerate(product(cfg.rho_h1_grid, cfg.n_grid)):
        signal_cfg = MixtureSignalConfig(
            propensity=cfg.propensity,
            h1_theta=fisher_transform(rho),
            smoothing_sd_voxels=cfg.signal_smoothing_sd_voxels,
        )
        sigma = 1.0 / math.sqrt(n - 3)
        per_rep: dict[str, list[Metrics]] = {e: [] for e in cfg.estimators}

        for rep in range(cfg.replications):
            seeds = child_seed(cfg.master_seed, point, rep).spawn(4)
            signal = generate_mixture_signal(signal_cfg, cfg.dims, seeds[0])
            truth = np.tanh(signal.values)
            nonnull = signal.nonnull_mask

            if "direct" in cfg.estimators or "conditional" in cfg.estimators:
                noise = generate_grf(
                    GRFConfig(cfg.dims, cfg.noise_kernel_sd_voxels, 1.0 / (n - 3)),
                    seeds[1],
                )
                z = signal.values + noise.values
                result = bh_select(_pvalues_from_z(z, n), cfg.bh_alpha, n=n)
                sel = result.mask()
                if "direct" in cfg.estimators:
                    per_rep["direct"].append(
                        compute_metrics(np.tanh(z), truth, sel, nonnull)
                    )
                if "conditional" in cfg.estimators:
                    cond = np.zeros(voxels)
                    if sel.any():
                        cutoff = _conditional_cutoff(result.threshold_z, n, z[sel])
                        cond[sel] = np.tanh(conditional_mle_batch(z[sel], sigma, cutoff))
                    per_rep["conditional"].append(
                        compute_metrics(cond, truth, sel, nonnull)
                    )

            if "split5050" in cfg.estimators:
                n_sel_half, n_est_half = split_half_sizes(n)
                noise_a = generate_grf(
                    GRFConfig(cfg.dims, cfg.noise_kernel_sd_voxels, 1.0 / (n_sel_half - 3)),
                    seeds[2],
                )
                noise_b = generate_grf(
                    GRFConfig(cfg.dims, cfg.noise_kernel_sd_voxels, 1.0 / (n_est_half - 3)),
                    seeds[3],
                )
                z_a = signal.values + noise_a.values
                z_b = signal.values + noise_b.values
                result_a = bh_select(_pvalues_from_z(z_a, n_sel_half), cfg.bh_alpha, n=n_sel_half)
                sel_a = result_a.mask()
                per_rep["split5050"].append(
                    compute_metrics(np.tanh(z_b), truth, sel_a, nonnull)
                )

        for estimator in cfg.estimators:
            rows.append(
                _aggregate_replication_metrics(
                    "mixture-grf", rho, n, estimator, per_rep[estimator]
                )
            )
    return rows


# --------------------------------------------------------------------------
# fMRI-like study
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FMRIStudyConfig:
    gen: FMRIGenConfig = FMRIGenConfig()
    n_datasets: int = 200
    bh_alpha: float = 0.1
    bin_width: float = 0.05
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_datasets < 1:
            raise DomainError("n_datasets must be >= 1")
        if not 0.0 < self.bh_alpha < 1.0:
            raise DomainError("bh_alpha must lie in (0, 1)")
        if self.bin_width <= 0.0:
            raise DomainError("bin_width must be positive")


@dataclass(frozen=True)
class FMRIStudyResult:
    summary_rows: list[dict]
    dataset_rows: list[dict]
    by_observed_rows: list[dict]


def run_fmri_study(cfg: FMRIStudyConfig) -> FMRIStudyResult:
    """Composite-volume study: per-dataset error distributions plus curves of
    bias and MSE against the observed correlation.

    Datasets with an empty BH selection report no error metrics (they are
    flagged and excluded from aggregation). The by-observed table pools
    voxel-level errors from all datasets into signed observed-r bins of width
    bin_width, with 5th/95th percentile bands.
    """
    n = cfg.gen.n_subjects
    sigma = 1.0 / math.sqrt(n - 3)
    estimators = ("direct", "conditional")
    dataset_rows: list[dict] = []
    per_dataset: dict[str, list[Metrics]] = {e: [] for e in estimators}
    observed_pool: list[np.ndarray] = []
    error_pool: dict[str, list[np.ndarray]] = {e: [] for e in estimators}

    for d in range(cfg.n_datasets):
        data, truth = generate_fmri_like(cfg.gen, child_seed(cfg.master_seed, d))
        z = data.values
        result = bh_select(_pvalues_from_z(z, n), cfg.bh_alpha, n=n)
        sel = result.mask()

        estimates = {"direct": np.tanh(z)}
        cond = np.zeros(z.size)
        if sel.any():
            cutoff = _conditional_cutoff(result.threshold_z, n, z[sel])
            cond[sel] = np.tanh(conditional_mle_batch(z[sel], sigma, cutoff))
        estimates["conditional"] = cond

        rho_truth = np.tanh(truth.values)
        for estimator in estimators:
            metrics = compute_metrics(
                estimates[estimator], rho_truth, sel, data.nonnull_mask
            )
            per_dataset[estimator].append(metrics)
            dataset_rows.append(
                {
                    "dataset": d,
                    "estimator": estimator,
                    "bias": metrics.bias,
                    "median_bias": metrics.median_bias,
                    "mse": metrics.mse,
                    "power": metrics.power,
                    "n_selected": metrics.n_selected,
                    "undefined": metrics.undefined,
                }
            )
        if sel.any():
            observed_pool.append(np.tanh(z[sel]))
            for estimator in estimators:
                error_pool[estimator].append(estimates[estimator][sel] - rho_truth[sel])

    summary_rows = [
        _aggregate_replication_metrics(
            "fmri-like", float("nan"), n, estimator, per_dataset[estimator]
        )
        for estimator in estimators
    ]

    by_observed_rows: list[dict] = []
    if observed_pool:
        observed = np.concatenate(observed_pool)
        lo_edge = math.floor(observed.min() / cfg.bin_width) * cfg.bin_width
        hi_edge = math.ceil(observed.max() / cfg.bin_width) * cfg.bin_width
        edges = np.arange(lo_edge, hi_edge + 0.5 * cfg.bin_width, cfg.bin_width)
        for estimator in estimators:
            errors = np.concatenate(error_pool[estimator])
            for lo, hi in zip(edges[:-1], edges[1:]):
                in_bin = (observed >= lo) & (observed < hi)
                if not in_bin.any():
                    continue
                err = errors[in_bin]
                q05, q95 = np.percentile(err, [5.0, 95.0])
                by_observed_rows.append(
                    {
                        "bin_lo": float(lo),
                        "bin_hi": float(hi),
                        "estimator": estimator,
                        "bias": float(err.mean()),
                        "bias_q05": float(q05),
                        "bias_q95": float(q95),
                        "mse": float(np.mean(err**2)),
                        "count": int(in_bin.sum()),
                    }
                )
    return FMRIStudyResult(summary_rows, dataset_rows, by_observed_rows)


# --------------------------------------------------------------------------
# BH threshold convergence study
# --------------------------------------------------------------------------

_DEFAULT_HMM = HMMConfig(
    transition_matrix=((0.9, 0.05, 0.05), (0.05, 0.9, 0.05), (0.05, 0.05, 0.9)),
    state_means=(0.0, 0.0, 3.0),
    state_sd=1.0,
)


@dataclass(frozen=True)
class BHConvergenceConfig:
    m_grid: tuple[int, ...] = (100, 1_000, 10_000, 100_000)
    generators: tuple[str, ...] = ("independent", "grf", "hmm", "vanishing-propensity")
    replications: int = 100
    alpha: float = 0.1
    propensity: float = 0.2
    effect_z: float = 3.0
    grf_kernel_sd_voxels: float = 1.5
    vanishing_reference_m: int = 100
    hmm: HMMConfig = _DEFAULT_HMM
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        if any(m < 1 for m in self.m_grid):
            raise DomainError("every m grid value must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")
        if not 0.0 <= self.propensity <= 1.0:
            raise DomainError("propensity must lie in [0, 1]")


def _convergence_pvalues(generator: str, m: int, cfg: BHConvergenceConfig, seed) -> np.ndarray:
    if generator == "independent" or generator == "vanishing-propensity":
        pi1 = cfg.propensity
        if generator == "vanishing-propensity":
            pi1 = cfg.propensity * math.sqrt(cfg.vanishing_reference_m / m)
            pi1 = min(pi1, 1.0)
        rng = rng_from(seed)
        alt = rng.random(m) < pi1
        z = rng.standard_normal(m) + cfg.effect_z * alt
        return np.maximum(2.0 * ndtr(-np.abs(z)), np.finfo(float).tiny)
    if generator == "grf":
        field_seed, mask_seed = seed.spawn(2)
        side = int(math.ceil(m ** (1.0 / 3.0)))
        grf = generate_grf(
            GRFConfig((side, side, side), cfg.grf_kernel_sd_voxels, 1.0), field_seed
        )
        rng = np.random.default_rng(mask_seed)
        alt = rng.random(m) < cfg.propensity
        z = grf.values[:m] + cfg.effect_z * alt
        return np.maximum(2.0 * ndtr(-np.abs(z)), np.finfo(float).tiny)
    if generator == "hmm":
        return generate_hmm_pvalues(cfg.hmm, m, seed)
    raise DomainError(
        f"unknown generator {generator!r}; expected one of independent, grf, "
        "hmm, vanishing-propensity"
    )


def run_bh_convergence_study(cfg: BHConvergenceConfig) -> list[dict]:
    """Dispersion of the realized BH threshold as the number of tests grows.

    Replications with an empty selection have no realized threshold and enter
    the table only through a reduced n_defined count.
    """
    rows: list[dict] = []
    for gi, generator in enumerate(cfg.generators):
        for mi, m in enumerate(cfg.m_grid):
            thresholds = []
            for rep in range(cfg.replications):
                seed = child_seed(cfg.master_seed, gi, mi, rep)
                result = bh_select(_convergence_pvalues(generator, m, cfg, seed), cfg.alpha)
                if not result.is_empty:
                    thresholds.append(result.threshold_p)
            defined = np.asarray(thresholds)
            rows.append(
                {
                    "generator": generator,
                    "m": m,
                    "threshold_mean": float(defined.mean()) if defined.size else float("nan"),
                    "threshold_sd": float(defined.std(ddof=1)) if defined.size > 1 else float("nan"),
                    "n_defined": int(defined.size),
                    "replications": cfg.replications,
                }
            )
    return rows


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def _metrics_row(scenario, rho, n, estimator, scope, metrics: Metrics) -> dict:
    row = {
        "scenario": scenario,
        "rho": rho,
        "n": n,
        "estimator": estimator,
        "scope": scope,
    }
    row.update(asdict(metrics))
    return row


def format_value(value) -> str:
    """Fixed 6-significant-digit formatting for every numeric table cell."""
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.6g" % value
    return str(value)


def write_table_csv(rows: list[dict], columns: tuple[str, ...], path) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row[c]) for c in columns])


def write_metrics_csv(rows: list[dict], path) -> None:
    write_table_csv(rows, METRICS_COLUMNS, path)


def write_manifest(path, scenario: str, seed: int, config, tables: dict[str, tuple[str, ...]]) -> None:
    """JSON run manifest: config echo, seed, version, and table schemas.

    Deliberately contains nothing volatile (no timestamps, hosts, or paths)
    so reruns with the same (config, seed) are byte-identical.
    """
    manifest = {
        "scenario": scenario,
        "seed": seed,
        "version": __version__,
        "config": asdict(config) if not isinstance(config, dict) else config,
        "tables": {name: list(cols) for name, cols in tables.items()},
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
