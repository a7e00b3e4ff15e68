"""Complex temporal mode functions on a discrete time grid.

A temporal mode is a normalized complex field envelope xi(t) over the
detection interval (0, T), sampled at bin midpoints.  All inner products
are rectangle-rule weighted dot products, so the mode model and the
click sampler's bin model coincide.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GridMismatchError",
    "ModeMatchedError",
    "TimeGrid",
    "TemporalMode",
    "ModeBasis",
    "inner_product",
    "gram_schmidt",
    "make_mode",
    "cw_mode",
    "gaussian_root_mode",
    "sech_root_mode",
    "tophat_mode",
    "pulse_train_mode",
    "mode_from_samples",
]

NORM_TOL = 1e-10
CLIP_TOL = 1e-6
MODE_MATCH_EPS = 1e-6
DEFAULT_N_POINTS = 4096


class GridMismatchError(ValueError):
    """Two modes live on incompatible time discretizations."""


class ModeMatchedError(ValueError):
    """Perpendicular mode is ill-defined because the modes are (nearly)
    proportional; use the single-mode treatment instead."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform midpoint-sampled grid on (0, T)."""

    t_end: float
    n_points: int = DEFAULT_N_POINTS

    def __post_init__(self):
        if not (self.t_end > 0):
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.n_points < 2:
            raise ValueError(f"n_points must be >= 2, got {self.n_points}")

    @property
    def dt(self) -> float:
        return self.t_end / self.n_points

    @property
    def times(self) -> np.ndarray:
        """Bin midpoints."""
        return (np.arange(self.n_points) + 0.5) * self.dt

    def matches(self, other: "TimeGrid") -> bool:
        return self.n_points == other.n_points and math.isclose(
            self.t_end, other.t_end, rel_tol=1e-12, abs_tol=0.0
        )

    def coarsened(self, factor: int) -> "TimeGrid":
        if self.n_points % factor:
            raise ValueError(f"n_points={self.n_points} not divisible by {factor}")
        return TimeGrid(self.t_end, self.n_points // factor)


@dataclass(frozen=True)
class TemporalMode:
    """Sampled complex envelope with unit grid norm.

    ``clipped`` flags analytic profiles that lose more than CLIP_TOL of
    their norm to the interval boundary before renormalization.
    """

    grid: TimeGrid
    samples: np.ndarray
    clipped: bool = False

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.shape != (self.grid.n_points,):
            raise ValueError("samples length must equal grid.n_points")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.grid.dt))

    def intensity(self) -> np.ndarray:
        """|xi(t)|^2 at the bin midpoints."""
        return np.abs(self.samples) ** 2

    def with_phase(self, phi: float) -> "TemporalMode":
        return dataclasses.replace(self, samples=self.samples * np.exp(1j * phi))


@dataclass(frozen=True)
class ModeBasis:
    """Orthonormal (LO, perpendicular) pair with the signal overlap gamma.

    The signal reconstructs as xi_s = gamma*xi_lo + sqrt(1-|gamma|^2)*xi_perp.
    """

    xi_lo: TemporalMode
    xi_perp: TemporalMode
    gamma: complex

    @property
    def gamma_abs_sq(self) -> float:
        return float(abs(self.gamma) ** 2)

    @property
    def perp_fraction(self) -> float:
        """sqrt(1 - |gamma|^2), the perpendicular-mode amplitude weight."""
        return math.sqrt(max(0.0, 1.0 - self.gamma_abs_sq))


def _check_grids(f: TemporalMode, g: TemporalMode) -> None:
    if not f.grid.matches(g.grid):
        raise GridMismatchError(
            f"incompatible discretizations: (T={f.grid.t_end}, n={f.grid.n_points}) "
            f"vs (T={g.grid.t_end}, n={g.grid.n_points})"
        )


def inner_product(f: TemporalMode, g: TemporalMode) -> complex:
    """<f, g> = integral f*(t) g(t) dt on the shared grid."""
    _check_grids(f, g)
    return complex(np.vdot(f.samples, g.samples) * f.grid.dt)


def gram_schmidt(
    xi_lo: TemporalMode, xi_s: TemporalMode, eps_match: float = MODE_MATCH_EPS
) -> ModeBasis:
    """Orthonormal basis around the LO mode.

    gamma = <xi_lo, xi_s>;  xi_perp = (xi_s - gamma xi_lo)/sqrt(1-|gamma|^2).

    Raises ModeMatchedError at the mode-matched limit |gamma| >= 1-eps_match,
    where the perpendicular mode is ill-defined.
    """
    gamma = inner_product(xi_lo, xi_s)
    if abs(gamma) >= 1.0 - eps_match:
        raise ModeMatchedError(
            f"mode-matched limit: |gamma|={abs(gamma):.3g}; perpendicular mode "
            "ill-defined, use the single-mode path with a phase-only gamma"
        )
    perp = (xi_s.samples - gamma * xi_lo.samples) / math.sqrt(1.0 - abs(gamma) ** 2)
    xi_perp = TemporalMode(xi_lo.grid, perp)
    return ModeBasis(xi_lo=xi_lo, xi_perp=xi_perp, gamma=gamma)


def _normalize(grid: TimeGrid, samples: np.ndarray, clipped: bool) -> TemporalMode:
    nrm = np.sqrt(np.sum(np.abs(samples) ** 2) * grid.dt)
    if nrm == 0.0 or not np.isfinite(nrm):
        raise ValueError("mode has no support on the detection interval")
    return TemporalMode(grid, samples / nrm, clipped=clipped)


def cw_mode(grid: TimeGrid, phi: float = 0.0) -> TemporalMode:
    """Continuous wave: constant e^{i phi}/sqrt(T)."""
    samples = np.full(grid.n_points, np.exp(1j * phi) / math.sqrt(grid.t_end))
    return TemporalMode(grid, samples)


def gaussian_root_mode(grid: TimeGrid, mu: float, sigma: float) -> TemporalMode:
    """Square root of a normal intensity profile: xi = [N(t | mu, sigma^2)]^{1/2}.

    sigma is the standard deviation of the *intensity* profile |xi|^2.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    t = grid.times
    samples = (2 * np.pi * sigma**2) ** (-0.25) * np.exp(
        -((t - mu) ** 2) / (4 * sigma**2)
    )
    # analytic norm loss to the interval boundary
    lost = 0.5 * (
        math.erfc(mu / (sigma * math.sqrt(2)))
        + math.erfc((grid.t_end - mu) / (sigma * math.sqrt(2)))
    )
    return _normalize(grid, samples.astype(complex), clipped=lost > CLIP_TOL)


def sech_root_mode(grid: TimeGrid, center: float, tau: float) -> TemporalMode:
    """Square root of a sech^2 intensity profile with width parameter tau."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    t = grid.times
    samples = (1.0 / np.sqrt(2 * tau)) / np.cosh((t - center) / tau)
    # integral of sech^2/(2 tau) outside (0, T)
    lost = 0.5 * (
        (1.0 + math.tanh(-center / tau)) + (1.0 - math.tanh((grid.t_end - center) / tau))
    )
    return _normalize(grid, samples.astype(complex), clipped=lost > CLIP_TOL)


def tophat_mode(grid: TimeGrid, t0: float, t1: float, phi: float = 0.0) -> TemporalMode:
    """Constant e^{i phi}/sqrt(t1-t0) on (t0, t1), zero elsewhere."""
    if not (0.0 <= t0 < t1 <= grid.t_end):
        raise ValueError(f"need 0 <= t0 < t1 <= T, got t0={t0}, t1={t1}")
    t = grid.times
    samples = np.where((t >= t0) & (t < t1), np.exp(1j * phi), 0.0)
    return _normalize(grid, samples, clipped=False)


def pulse_train_mode(
    grid: TimeGrid,
    base_kind: str,
    base_params: dict,
    period: float,
    phases=None,
) -> TemporalMode:
    """Train of identical pulses spaced by ``period`` with per-pulse phases.

    The base pulse parameters position the first pulse; the repetition
    period must divide the detection interval.
    """
    n_rep = round(grid.t_end / period)
    if n_rep < 1 or abs(n_rep * period - grid.t_end) > 1e-9 * grid.t_end:
        raise ValueError("repetition period must divide the detection interval")
    if phases is None:
        phases = np.zeros(n_rep)
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (n_rep,):
        raise ValueError(f"need {n_rep} per-pulse phases, got {phases.shape}")

    t = grid.times
    total = np.zeros(grid.n_points, dtype=complex)
    clipped = False
    for j, phase in enumerate(phases):
        params = dict(base_params)
        if base_kind == "gaussian_root":
            params["mu"] = params["mu"] + j * period
        elif base_kind == "sech_root":
            params["center"] = params["center"] + j * period
        elif base_kind == "tophat":
            params["t0"] = params["t0"] + j * period
            params["t1"] = params["t1"] + j * period
        else:
            raise ValueError(f"unsupported pulse-train base kind: {base_kind}")
        pulse = make_mode(base_kind, params, grid)
        clipped = clipped or pulse.clipped
        total += np.exp(1j * phase) * pulse.samples
    del t
    return _normalize(grid, total, clipped=clipped)


def mode_from_samples(grid: TimeGrid, samples) -> TemporalMode:
    """Arbitrary user-supplied envelope, renormalized on the grid."""
    return _normalize(grid, np.asarray(samples, dtype=complex), clipped=False)


_MODE_KINDS = {
    "cw": cw_mode,
    "gaussian_root": gaussian_root_mode,
    "sech_root": sech_root_mode,
    "tophat": tophat_mode,
    "pulse_train": pulse_train_mode,
    "samples": mode_from_samples,
}


def make_mode(kind: str, params: dict, grid: TimeGrid) -> TemporalMode:
    """Construct a normalized mode by kind name (used by CLI configs)."""
    try:
        ctor = _MODE_KINDS[kind]
    except KeyError:
        raise ValueError(
            f"unknown mode kind {kind!r}; choose from {sorted(_MODE_KINDS)}"
        ) from None
    return ctor(grid, **params)
