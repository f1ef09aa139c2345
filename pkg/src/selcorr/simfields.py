"""Synthetic-field generators for the simulation studies.

Everything here is a pure function of (config, seed): smooth Gaussian noise
lattices, sparse mixture signals, composite fMRI-like volumes (mixture draw,
shrinkage toward the component mean, spatial smoothing, plus calibrated
noise), and dependent p-value streams from a three-state normal HMM.

Values live on the Fisher-z scale throughout. Lattices serialize to a flat
CSV (x,y,z,value[,nonnull]) alongside a JSON header with dims, units, seed,
and a config echo.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d
from scipy.special import ndtr

from .errors import DomainError, FitError
from .seeding import SeedLike, as_seed_sequence, rng_from

Dims = tuple[int, int, int]


@dataclass(frozen=True)
class Lattice3D:
    """A 3-D voxel grid stored flat in C order (x slowest, z fastest)."""

    dims: Dims
    values: np.ndarray
    nonnull_mask: np.ndarray | None = None

    def __post_init__(self):
        nx, ny, nz = self.dims
        if min(nx, ny, nz) < 1:
            raise DomainError(f"dims must all be positive, got {self.dims}")
        if self.values.size != nx * ny * nz:
            raise DomainError(
                f"values has size {self.values.size}, expected {nx * ny * nz}"
            )
        if self.nonnull_mask is not None and self.nonnull_mask.size != self.values.size:
            raise DomainError("nonnull_mask size must match values")

    @property
    def size(self) -> int:
        return int(self.values.size)

    def grid(self) -> np.ndarray:
        return self.values.reshape(self.dims)


def save_lattice(
    lattice: Lattice3D,
    csv_path,
    seed: int | None = None,
    config: dict | None = None,
    units: str = "fisher-z",
) -> None:
    """Write the flat CSV and its JSON header (same stem, .json suffix)."""
    csv_path = Path(csv_path)
    nx, ny, nz = lattice.dims
    with_mask = lattice.nonnull_mask is not None
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z", "value", "nonnull"] if with_mask else ["x", "y", "z", "value"])
        idx = 0
        for x in range(nx):
            for y in range(ny):
                for z in range(nz):
                    row = [x, y, z, "%.17g" % lattice.values[idx]]
                    if with_mask:
                        row.append(int(lattice.nonnull_mask[idx]))
                    writer.writerow(row)
                    idx += 1
    header = {
        "dims": list(lattice.dims),
        "units": units,
        "seed": seed,
        "config": config,
    }
    csv_path.with_suffix(".json").write_text(json.dumps(header, indent=2) + "\n")


def load_lattice(csv_path) -> Lattice3D:
    csv_path = Path(csv_path)
    header = json.loads(csv_path.with_suffix(".json").read_text())
    dims = tuple(header["dims"])
    values = []
    mask = []
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        has_mask = "nonnull" in columns
        for row in reader:
            values.append(float(row[3]))
            if has_mask:
                mask.append(bool(int(row[4])))
    return Lattice3D(
        dims,
        np.asarray(values),
        np.asarray(mask, dtype=bool) if has_mask else None,
    )


# --- smoothing -------------------------------------------------------------

def gaussian_kernel1d(sd: float) -> np.ndarray:
    """Discrete Gaussian weights truncated at 4 sd, normalized to sum 1."""
    if sd < 0:
        raise DomainError(f"kernel sd must be nonnegative, got {sd}")
    radius = int(4.0 * sd + 0.5)
    if radius == 0:
        return np.ones(1)
    offsets = np.arange(-radius, radius + 1, dtype=float)
    weights = np.exp(-0.5 * (offsets / sd) ** 2)
    return weights / weights.sum()


def smooth3d(field: np.ndarray, sd: float) -> np.ndarray:
    """Separable 3-D Gaussian smoothing with reflective boundaries.

    Reflection plus a symmetric sum-1 kernel preserves the field average
    exactly, which the variance calibration below relies on.
    """
    weights = gaussian_kernel1d(sd)
    if weights.size == 1:
        return np.array(field, dtype=float)
    out = np.asarray(field, dtype=float)
    for axis in range(3):
        out = correlate1d(out, weights, axis=axis, mode="reflect")
    return out


def _mean_variance_gain(sd: float, length: int) -> float:
    """Average white-noise variance multiplier of one reflective smoothing pass.

    Reflection folds kernel mass back onto boundary samples, so edge voxels
    keep more variance than the interior value sum(w^2); on small lattices
    (kernel radius comparable to the side) that inflation reaches every voxel.
    The exact per-row multiplier is the squared row norm of the smoothing
    operator, obtained by pushing the identity matrix through the smoother.
    """
    weights = gaussian_kernel1d(sd)
    if weights.size == 1:
        return 1.0
    operator = correlate1d(np.eye(length), weights, axis=0, mode="reflect")
    return float(np.mean(np.sum(operator**2, axis=1)))


# --- generators ------------------------------------------------------------

@dataclass(frozen=True)
class GRFConfig:
    """Smooth Gaussian noise: white noise convolved with a separable kernel."""

    dims: Dims
    kernel_sd_voxels: float
    target_variance: float

    def __post_init__(self):
        if min(self.dims) < 1:
            raise DomainError(f"dims must all be positive, got {self.dims}")
        if not (self.kernel_sd_voxels > 0):
            raise DomainError(f"kernel_sd_voxels must be positive, got {self.kernel_sd_voxels}")
        if not (self.target_variance > 0):
            raise DomainError(f"target_variance must be positive, got {self.target_variance}")


def generate_grf(cfg: GRFConfig, seed: SeedLike) -> Lattice3D:
    """Smooth Gaussian random field with mean marginal variance target_variance.

    Smoothing white noise scales the variance of voxel (i, j, k) by the product
    of the per-axis operator row norms, so the lattice-average variance is the
    product of the per-axis mean gains.  The field is rescaled by that analytic
    (config-determined, not per-field empirical) constant; voxel-level variance
    still varies slightly near reflective edges, but the lattice average equals
    target_variance exactly in expectation on any lattice size.
    """
    rng = rng_from(seed)
    white = rng.standard_normal(cfg.dims)
    field = smooth3d(white, cfg.kernel_sd_voxels)
    gain = 1.0
    for length in cfg.dims:
        gain *= _mean_variance_gain(cfg.kernel_sd_voxels, length)
    field *= math.sqrt(cfg.target_variance / gain)
    return Lattice3D(cfg.dims, field.ravel())


@dataclass(frozen=True)
class MixtureSignalConfig:
    """Sparse signal: each voxel non-null with probability propensity."""

    propensity: float
    h1_theta: float
    smoothing_sd_voxels: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.propensity <= 1.0):
            raise DomainError(f"propensity must lie in [0, 1], got {self.propensity}")
        if self.smoothing_sd_voxels < 0:
            raise DomainError("smoothing_sd_voxels must be nonnegative")


def generate_mixture_signal(cfg: MixtureSignalConfig, dims: Dims, seed: SeedLike) -> Lattice3D:
    """Bernoulli(propensity) mask of voxels at value h1_theta, rest zero.

    Optional smoothing is applied to the value field only; the nonnull mask
    records the pre-smoothing membership.
    """
    rng = rng_from(seed)
    size = int(np.prod(dims))
    mask = rng.random(size) < cfg.propensity
    field = np.where(mask, cfg.h1_theta, 0.0).reshape(dims)
    if cfg.smoothing_sd_voxels > 0:
        field = smooth3d(field, cfg.smoothing_sd_voxels)
    return Lattice3D(tuple(dims), field.ravel(), mask)


@dataclass(frozen=True)
class MixtureFit:
    """Two-component normal mixture with the first mean pinned at zero."""

    weight_null: float
    sd_null: float
    mean_alt: float
    sd_alt: float
    loglik: float
    n_iter: int
    converged: bool
    degenerate: bool


def fit_two_component_mixture(values, max_iter: int = 500, rel_tol: float = 1e-8) -> MixtureFit:
    """EM fit of w*N(0, sd0^2) + (1-w)*N(mu, sd1^2) with the null mean fixed at 0.

    Stops when the relative log-likelihood improvement drops below rel_tol or
    after max_iter sweeps. A fit whose alternative component collapses onto
    the null (tiny weight or mean) is returned with ``degenerate=True`` rather
    than raised, since that is the honest answer for single-component data.
    """
    x = np.asarray(values, dtype=float).ravel()
    x = x[np.isfinite(x)]
    if x.size < 10:
        raise DomainError(f"need at least 10 finite values, got {x.size}")
    spread = float(np.std(x))
    if spread == 0.0:
        raise FitError("values have zero variance; mixture fit is degenerate")

    log_norm = 0.5 * math.log(2.0 * math.pi)

    def logpdf(data, mean, sd):
        z = (data - mean) / sd
        return -0.5 * z * z - math.log(sd) - log_norm

    w0 = 0.5
    sd0 = spread
    m1 = float(np.percentile(x, 90))
    sd1 = spread
    sd_floor = max(1e-8, 1e-6 * spread)

    loglik = -np.inf
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        lp0 = math.log(w0) + logpdf(x, 0.0, sd0)
        lp1 = math.log1p(-w0) + logpdf(x, m1, sd1)
        total = np.logaddexp(lp0, lp1)
        new_loglik = float(total.sum())
        resp1 = np.exp(lp1 - total)
        resp0 = 1.0 - resp1

        w0 = float(np.clip(resp0.mean(), 1e-10, 1.0 - 1e-10))
        sd0 = max(math.sqrt(float(np.sum(resp0 * x * x) / max(resp0.sum(), 1e-300))), sd_floor)
        denom = max(float(resp1.sum()), 1e-300)
        m1 = float(np.sum(resp1 * x) / denom)
        sd1 = max(math.sqrt(float(np.sum(resp1 * (x - m1) ** 2) / denom)), sd_floor)

        if np.isfinite(loglik) and new_loglik - loglik <= rel_tol * (abs(loglik) + 1e-12):
            loglik = new_loglik
            converged = True
            break
        loglik = new_loglik

    degenerate = (1.0 - w0) < 1e-3 or abs(m1) < 1e-3 or sd0 <= sd_floor or sd1 <= sd_floor
    return MixtureFit(w0, sd0, m1, sd1, loglik, n_iter, converged, degenerate)


@dataclass(frozen=True)
class FMRIGenConfig:
    """Recipe for composite volumes resembling group-level correlation maps.

    A raw value per voxel is drawn from a two-component normal mixture (null
    component centered at zero), shrunk toward its component mean by
    posterior-mean shrinkage under a normal kernel of sd shrink_kernel_sd,
    smoothed spatially, and finally observed under additive smooth Gaussian
    noise with marginal variance 1/(n_subjects - 3).
    """

    dims: Dims = (10, 10, 10)
    weight_null: float = 0.8
    sd_null: float = 0.2
    mean_alt: float = 0.5493061443340549  # atanh(0.5)
    sd_alt: float = 0.15
    shrink_kernel_sd: float = 0.13
    signal_smoothing_sd_voxels: float = 0.5
    noise_kernel_sd_voxels: float = 1.0
    n_subjects: int = 16

    def __post_init__(self):
        if min(self.dims) < 1:
            raise DomainError(f"dims must all be positive, got {self.dims}")
        if not (0.0 < self.weight_null < 1.0):
            raise DomainError(f"weight_null must lie in (0, 1), got {self.weight_null}")
        if not (self.sd_null > 0 and self.sd_alt > 0):
            raise DomainError("component standard deviations must be positive")
        if not (self.shrink_kernel_sd > 0):
            raise DomainError("shrink_kernel_sd must be positive")
        if not (self.signal_smoothing_sd_voxels > 0):
            raise DomainError("signal_smoothing_sd_voxels must be positive")
        if not (self.noise_kernel_sd_voxels > 0):
            raise DomainError("noise_kernel_sd_voxels must be positive")
        if int(self.n_subjects) != self.n_subjects or self.n_subjects < 4:
            raise DomainError(f"n_subjects must be an integer >= 4, got {self.n_subjects}")


def generate_fmri_like(cfg: FMRIGenConfig, seed: SeedLike) -> tuple[Lattice3D, Lattice3D]:
    """Return (data, truth): a noisy volume and its noiseless signal field.

    The nonnull mask on both lattices marks voxels drawn from the alternative
    mixture component. data - truth is exactly the noise field, so its
    empirical variance is ~1/(n_subjects - 3).
    """
    signal_seed, noise_seed = as_seed_sequence(seed).spawn(2)
    rng = np.random.default_rng(signal_seed)
    size = int(np.prod(cfg.dims))

    alt = rng.random(size) < (1.0 - cfg.weight_null)
    null_draws = rng.normal(0.0, cfg.sd_null, size)
    alt_draws = rng.normal(cfg.mean_alt, cfg.sd_alt, size)
    raw = np.where(alt, alt_draws, null_draws)

    # Posterior-mean shrinkage toward the component mean: with a normal prior
    # of sd tau around the mean, deviations scale by tau^2/(tau^2 + sd^2).
    tau2 = cfg.shrink_kernel_sd**2
    gain_null = tau2 / (tau2 + cfg.sd_null**2)
    gain_alt = tau2 / (tau2 + cfg.sd_alt**2)
    shrunk = np.where(
        alt,
        cfg.mean_alt + (raw - cfg.mean_alt) * gain_alt,
        raw * gain_null,
    )

    truth = smooth3d(shrunk.reshape(cfg.dims), cfg.signal_smoothing_sd_voxels).ravel()

    noise_cfg = GRFConfig(
        dims=cfg.dims,
        kernel_sd_voxels=cfg.noise_kernel_sd_voxels,
        target_variance=1.0 / (cfg.n_subjects - 3),
    )
    noise = generate_grf(noise_cfg, noise_seed)

    data = Lattice3D(cfg.dims, truth + noise.values, alt)
    return data, Lattice3D(cfg.dims, truth, alt)


@dataclass(frozen=True)
class HMMConfig:
    """Three-state normal hidden Markov model for dependent test statistics."""

    transition_matrix: tuple[tuple[float, float, float], ...]
    state_means: tuple[float, float, float]
    state_sd: float = 1.0
    n_states: int = 3

    def __post_init__(self):
        t = np.asarray(self.transition_matrix, dtype=float)
        if self.n_states != 3 or t.shape != (3, 3) or len(self.state_means) != 3:
            raise DomainError("exactly three states are supported")
        if np.any(t < 0) or np.any(np.abs(t.sum(axis=1) - 1.0) > 1e-12):
            raise DomainError("transition_matrix rows must be nonnegative and sum to 1")
        if not (self.state_sd > 0):
            raise DomainError(f"state_sd must be positive, got {self.state_sd}")


def generate_hmm_pvalues(cfg: HMMConfig, m: int, seed: SeedLike) -> np.ndarray:
    """Two-sided p-values of z-emissions from the hidden chain.

    The chain starts deterministically in state 0 (there is no initial
    distribution in the config; a fixed start keeps runs reproducible and lets
    an identity transition matrix pin the chain to a chosen state).
    """
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    rng = rng_from(seed)
    cumulative = np.cumsum(np.asarray(cfg.transition_matrix, dtype=float), axis=1)
    uniforms = rng.random(m)
    states = np.empty(m, dtype=np.int64)
    state = 0
    for t in range(m):
        states[t] = state
        state = int(np.searchsorted(cumulative[state], uniforms[t], side="right"))
        state = min(state, 2)
    z = np.asarray(cfg.state_means)[states] + cfg.state_sd * rng.standard_normal(m)
    return np.maximum(2.0 * ndtr(-np.abs(z)), np.finfo(float).tiny)
