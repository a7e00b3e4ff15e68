"""Monte Carlo photocount sampler for the balanced two-detector setup.

Each detector bin fires as an independent Poisson variable with mean
intensity |(alpha xi_s +/- beta xi_lo)/sqrt(2)|^2 dt; the scaled
difference x = sum_k f_k (n1_k - n2_k) / (sqrt(2) beta) realizes the
filtered quadrature measurement.  Piecewise-constant filters admit an
exact fast path: Poisson counts are additive, so bins sharing a filter
weight collapse to one Poisson draw per detector and shot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .snr_filtering import FilterSpec
from .temporal_modes import TemporalMode, TimeGrid, _check_grids

__all__ = [
    "ClickRecord",
    "EmpiricalStats",
    "bin_intensities",
    "sample_record",
    "reduce_record",
    "coarse_grain",
    "empirical_distribution",
]

BATCH_SHOTS = 4096
GROUPED_MAX_LEVELS = 64


@dataclass(frozen=True)
class ClickRecord:
    """Per-bin photocounts for a batch of shots, one row per shot."""

    grid: TimeGrid
    n1: np.ndarray
    n2: np.ndarray
    seed: int

    def __post_init__(self):
        n1 = np.asarray(self.n1)
        n2 = np.asarray(self.n2)
        if n1.ndim != 2 or n1.shape != n2.shape or n1.shape[1] != self.grid.n_points:
            raise ValueError("counts must be (n_shots, grid.n_points) arrays")
        for arr in (n1, n2):
            arr.flags.writeable = False
        object.__setattr__(self, "n1", n1)
        object.__setattr__(self, "n2", n2)

    @property
    def n_shots(self) -> int:
        return self.n1.shape[0]


@dataclass(frozen=True)
class EmpiricalStats:
    """Summary of sampled difference-variable values."""

    samples: np.ndarray
    n_shots: int
    seed: int

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (self.n_shots,):
            raise ValueError("samples must be a length n_shots vector")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def mean(self) -> float:
        return float(np.mean(self.samples))

    @property
    def variance(self) -> float:
        return float(np.var(self.samples, ddof=1))

    @property
    def snr(self) -> float:
        return self.mean**2 / self.variance

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.snr)

    def mean_stderr(self) -> float:
        return math.sqrt(self.variance / self.n_shots)


def bin_intensities(
    alpha: complex, beta: float, xi_s: TemporalMode, xi_lo: TemporalMode
) -> tuple[np.ndarray, np.ndarray]:
    """Mean counts per bin at the two detector ports."""
    _check_grids(xi_s, xi_lo)
    if not beta > 0:
        raise ValueError("beta must be positive")
    dt = xi_s.grid.dt
    plus = (complex(alpha) * xi_s.samples + beta * xi_lo.samples) / math.sqrt(2.0)
    minus = (complex(alpha) * xi_s.samples - beta * xi_lo.samples) / math.sqrt(2.0)
    return np.abs(plus) ** 2 * dt, np.abs(minus) ** 2 * dt


def sample_record(
    alpha: complex,
    beta: float,
    xi_s: TemporalMode,
    xi_lo: TemporalMode,
    n_shots: int,
    seed: int,
) -> ClickRecord:
    """Draw full per-bin count records (memory scales with shots x bins)."""
    if n_shots < 1:
        raise ValueError("n_shots must be positive")
    i1, i2 = bin_intensities(alpha, beta, xi_s, xi_lo)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    n1 = rng.poisson(i1, size=(n_shots, i1.size))
    n2 = rng.poisson(i2, size=(n_shots, i2.size))
    return ClickRecord(grid=xi_s.grid, n1=n1, n2=n2, seed=seed)


def reduce_record(record: ClickRecord, filt: FilterSpec, beta: float) -> np.ndarray:
    """Scaled filtered difference x per shot: sum f_k (n1_k - n2_k)/(sqrt(2) beta)."""
    if not record.grid.matches(filt.grid):
        raise ValueError("filter grid does not match the record grid")
    if not beta > 0:
        raise ValueError("beta must be positive")
    diff = record.n1.astype(float) - record.n2.astype(float)
    return diff @ filt.weights / (math.sqrt(2.0) * beta)


def coarse_grain(record: ClickRecord, factor: int) -> ClickRecord:
    """Merge adjacent bins by summing counts (exact by Poisson additivity)."""
    grid = record.grid.coarsened(factor)
    shape = (record.n_shots, grid.n_points, factor)
    return ClickRecord(
        grid=grid,
        n1=record.n1.reshape(shape).sum(axis=2),
        n2=record.n2.reshape(shape).sum(axis=2),
        seed=record.seed,
    )


def _grouped_rates(
    filt: FilterSpec, i1: np.ndarray, i2: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray] | None:
    levels, inverse = np.unique(filt.weights, return_inverse=True)
    if levels.size > GROUPED_MAX_LEVELS:
        return None
    lam1 = np.bincount(inverse, weights=i1, minlength=levels.size)
    lam2 = np.bincount(inverse, weights=i2, minlength=levels.size)
    keep = (levels != 0.0) & ((lam1 > 0) | (lam2 > 0))
    return levels[keep], lam1[keep], lam2[keep]


def empirical_distribution(
    alpha: complex,
    beta: float,
    xi_s: TemporalMode,
    xi_lo: TemporalMode,
    filt: FilterSpec,
    n_shots: int,
    seed: int,
    batch_shots: int = BATCH_SHOTS,
) -> EmpiricalStats:
    """Sample the filtered difference variable for many shots.

    Filters with few distinct weights use the exact grouped-Poisson path,
    one draw per weight level instead of per bin.  Results are
    deterministic in (seed, batch_shots): each batch draws from its own
    spawned bit generator and batches are reduced in order.
    """
    if n_shots < 1:
        raise ValueError("n_shots must be positive")
    if not xi_s.grid.matches(filt.grid):
        raise ValueError("filter grid does not match the mode grid")
    i1, i2 = bin_intensities(alpha, beta, xi_s, xi_lo)
    grouped = _grouped_rates(filt, i1, i2)

    samples = np.empty(n_shots)
    n_batches = -(-n_shots // batch_shots)
    children = np.random.SeedSequence(seed).spawn(n_batches)
    scale = math.sqrt(2.0) * beta
    for b, child in enumerate(children):
        start = b * batch_shots
        count = min(batch_shots, n_shots - start)
        rng = np.random.default_rng(child)
        if grouped is not None:
            levels, lam1, lam2 = grouped
            g1 = rng.poisson(lam1, size=(count, levels.size))
            g2 = rng.poisson(lam2, size=(count, levels.size))
            x = (g1 - g2).astype(float) @ levels / scale
        else:
            n1 = rng.poisson(i1, size=(count, i1.size))
            n2 = rng.poisson(i2, size=(count, i2.size))
            x = (n1 - n2).astype(float) @ filt.weights / scale
        samples[start : start + count] = x
    return EmpiricalStats(samples=samples, n_shots=n_shots, seed=seed)
