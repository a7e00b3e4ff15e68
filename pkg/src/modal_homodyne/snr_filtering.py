"""SNR bounds, temporal filter design, and the heterodyne shot-noise limit.

Power SNR hierarchy for a coherent signal with mode overlap gamma:

    conventional (no filter) <= achievable (filter inefficiency eta_f)
                             <= ideal (mode-matched homodyne),

with the achievable SNR 4 beta^2 Re(gamma alpha)^2 / (beta^2 + eta_f alpha^2).
Filters that preserve the measured quadrature are constant on the LO
support; eta_f is the perpendicular-mode weight they let through.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.constants import e as ELEMENTARY_CHARGE
from scipy.constants import h as PLANCK

from .temporal_modes import TemporalMode, TimeGrid, _check_grids

__all__ = [
    "FilterSpec",
    "FilterInefficiency",
    "HeterodyneParams",
    "SnrBounds",
    "TopHatSnr",
    "snr_unfiltered",
    "snr_filtered",
    "bound_ordering",
    "design_filter",
    "eta_f_of",
    "tophat_filtered_snr",
    "sech_overlap_sq",
    "sech_tau_from_bandwidth",
    "gaussian_overlap_sq",
    "gaussian_sigma_from_fwhm",
    "gaussian_sigma_from_sech_fwhm",
    "gaussian_fwhm_from_bandwidth",
    "cw_gate_inefficiency",
    "heterodyne_sql_snr",
    "filtering_gain_db",
    "photon_number",
    "db",
]

LO_PRESERVE_TOL = 1e-8

SECH_TBP = 0.315  # transform-limited sech: FWHM * bandwidth
SECH_FWHM_FACTOR = 1.76  # sech intensity FWHM = 1.76 tau (2 arccosh sqrt(2))
GAUSSIAN_TBP = 2.0 * math.log(2.0) / math.pi  # transform-limited Gaussian


def db(snr_linear: float) -> float:
    """Power SNR in dB."""
    return 10.0 * math.log10(snr_linear)


def photon_number(power_w: float, t: float, nu: float) -> float:
    """Mean photons collected in an interval t at optical frequency nu."""
    return power_w * t / (PLANCK * nu)


@dataclass(frozen=True)
class FilterSpec:
    """Photocurrent weighting function f(t) on the time grid."""

    grid: TimeGrid
    weights: np.ndarray
    lo_preserving: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights)
        if w.shape != (self.grid.n_points,):
            raise ValueError("weights length must equal grid.n_points")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @staticmethod
    def ones(grid: TimeGrid) -> "FilterSpec":
        return FilterSpec(grid, np.ones(grid.n_points), lo_preserving=True)

    def check_lo_preserving(self, xi_lo: TemporalMode, tol: float = LO_PRESERVE_TOL) -> bool:
        """True when f is a single constant on the support of xi_lo."""
        if not self.grid.matches(xi_lo.grid):
            return False
        intensity = xi_lo.intensity()
        support = intensity > tol * np.max(intensity)
        if not np.any(support):
            return False
        f = self.weights[support]
        return bool(np.max(np.abs(f - f[0])) <= tol)


@dataclass(frozen=True)
class FilterInefficiency:
    """Residual mode weights after filtering."""

    eta_f: float
    eta_lo: float = 1.0
    eta_s: float = 1.0


class SnrBounds(NamedTuple):
    conventional: float
    achievable: float
    ideal: float


@dataclass(frozen=True)
class TopHatSnr:
    general: float
    large_lo: float
    gamma: float
    eta_lo: float
    eta_s: float


def _re_sq(gamma, alpha) -> float:
    return (complex(gamma) * complex(alpha)).real ** 2


def snr_unfiltered(alpha, beta: float, gamma) -> float:
    """Total-photocurrent power SNR: 4 b^2 Re(ga)^2 / (b^2 + (1-|g|^2) a^2)."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    a2 = abs(complex(alpha)) ** 2
    g2 = abs(complex(gamma)) ** 2
    return 4.0 * _re_sq(gamma, alpha) * beta**2 / (beta**2 + (1.0 - g2) * a2)


def snr_filtered(alpha, beta: float, gamma, eta_f: float) -> float:
    """Filtered power SNR: 4 b^2 Re(ga)^2 / (b^2 + eta_f a^2)."""
    if not 0.0 <= eta_f <= 1.0:
        raise ValueError("eta_f must lie in [0, 1]")
    if not beta > 0:
        raise ValueError("beta must be positive")
    if beta**2 < 10.0 * abs(complex(gamma) * complex(alpha)) ** 2:
        warnings.warn(
            "filtered-SNR formula assumes |beta|^2 >> |gamma alpha|^2",
            stacklevel=2,
        )
    a2 = abs(complex(alpha)) ** 2
    return 4.0 * _re_sq(gamma, alpha) * beta**2 / (beta**2 + eta_f * a2)


def bound_ordering(alpha, beta: float, gamma, eta_f: float) -> SnrBounds:
    """(conventional, achievable, ideal) with the ordering guaranteed.

    Computed as a shared ideal prefactor times denominator ratios <= 1, so
    the inequalities hold exactly in floating point.
    """
    if not 0.0 <= eta_f <= 1.0:
        raise ValueError("eta_f must lie in [0, 1]")
    a2 = abs(complex(alpha)) ** 2
    ideal = 4.0 * _re_sq(gamma, alpha)
    b2 = beta**2
    conventional = ideal * (b2 / (b2 + a2))
    achievable = ideal * (b2 / (b2 + eta_f * a2))
    return SnrBounds(conventional, achievable, ideal)


def design_filter(
    xi_lo: TemporalMode, p: float, dtau: float
) -> tuple[FilterSpec, float]:
    """Binary gate keeping times where |xi_lo(t)|^2 >= p / dtau.

    Returns the filter and the LO norm fraction actually excluded; the
    filter is flagged lo-preserving only when that fraction is <= p.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    if not dtau > 0:
        raise ValueError("dtau must be positive")
    intensity = xi_lo.intensity()
    keep = intensity >= p / dtau if p > 0 else intensity > 0.0
    excluded = float(np.sum(intensity[~keep]) * xi_lo.grid.dt)
    spec = FilterSpec(xi_lo.grid, keep.astype(float), lo_preserving=excluded <= p)
    return spec, excluded


def eta_f_of(filt: FilterSpec, xi_perp: TemporalMode) -> float:
    """Filtering inefficiency: integral |f|^2 |xi_perp|^2 dt."""
    if not filt.grid.matches(xi_perp.grid):
        _check_grids(xi_perp, TemporalMode(filt.grid, np.zeros(filt.grid.n_points)))
    return float(
        np.sum(np.abs(filt.weights) ** 2 * xi_perp.intensity()) * filt.grid.dt
    )


def tophat_filtered_snr(alpha, beta: float, t0: float, t1: float, t_end: float) -> TopHatSnr:
    """SNR when gating onto the overlap (t0, t1) of two top-hat modes.

    Signal occupies (0, t1), LO occupies (t0, T).  The gate changes the
    measured quadrature mode and beats the unfiltered bound by 1/eta_lo.
    """
    if not (0.0 <= t0 < t1 <= t_end):
        raise ValueError(f"need 0 <= t0 < t1 <= T, got t0={t0}, t1={t1}, T={t_end}")
    if not beta > 0:
        raise ValueError("beta must be positive")
    eta_lo = (t1 - t0) / (t_end - t0)
    eta_s = (t1 - t0) / t1
    gamma = (t1 - t0) / math.sqrt(t1 * (t_end - t0))
    a2 = abs(complex(alpha)) ** 2
    num = 4.0 * (gamma * complex(alpha) * beta).real ** 2
    general = num / (eta_lo * beta**2 + eta_s * a2)
    large_lo = 4.0 * _re_sq(gamma, alpha) / eta_lo
    return TopHatSnr(general=general, large_lo=large_lo, gamma=gamma, eta_lo=eta_lo, eta_s=eta_s)


def sech_tau_from_bandwidth(delta_nu: float) -> float:
    """Width parameter of a transform-limited sech^2 pulse of bandwidth delta_nu."""
    if not delta_nu > 0:
        raise ValueError("delta_nu must be positive")
    return SECH_TBP / (SECH_FWHM_FACTOR * delta_nu)


def sech_overlap_sq(tau: float, t_end: float) -> float:
    """|gamma|^2 = pi^2 tau / (2 T) for a sech pulse LO against a CW signal."""
    if not (tau > 0 and t_end > 0):
        raise ValueError("tau and T must be positive")
    g2 = math.pi**2 * tau / (2.0 * t_end)
    if g2 > 1.0:
        raise ValueError(f"unphysical parameters: |gamma|^2 = {g2:.3g} > 1 (tau too long)")
    return g2


def gaussian_overlap_sq(sigma: float, t_end: float) -> float:
    """|gamma|^2 = sqrt(8 pi) sigma / T for a Gaussian-root LO against CW."""
    if not (sigma > 0 and t_end > 0):
        raise ValueError("sigma and T must be positive")
    g2 = math.sqrt(8.0 * math.pi) * sigma / t_end
    if g2 > 1.0:
        raise ValueError(f"unphysical parameters: |gamma|^2 = {g2:.3g} > 1 (pulse too long)")
    return g2


def gaussian_fwhm_from_bandwidth(delta_nu: float) -> float:
    """Intensity FWHM of a transform-limited Gaussian pulse."""
    return GAUSSIAN_TBP / delta_nu


def gaussian_sigma_from_fwhm(fwhm: float) -> float:
    """Intensity standard deviation from an intensity FWHM (Gaussian pulse)."""
    return fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))


def gaussian_sigma_from_sech_fwhm(fwhm: float) -> float:
    """Equivalent Gaussian sigma for a sech^2 pulse of given intensity FWHM.

    The mode-locked pulse is sech-shaped; the equivalent Gaussian is chosen
    to match the 1/e intensity half-width, which is the conversion that
    reproduces the published gate-inefficiency estimates.
    """
    tau = fwhm / (2.0 * math.acosh(math.sqrt(2.0)))
    half_1e = tau * math.acosh(math.sqrt(math.e))
    return half_1e / math.sqrt(2.0)


def cw_gate_inefficiency(k_sigma: float, sigma: float, t_end: float) -> float:
    """Gate inefficiency ~ k sigma / T for a CW signal and a k-sigma gate."""
    eta = k_sigma * sigma / t_end
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"gate inefficiency {eta:.3g} outside [0, 1]")
    return eta


@dataclass(frozen=True)
class HeterodyneParams:
    """Inputs of the heterodyne standard-quantum-limit calculator.

    gamma_sq overrides the pulse-profile overlap when given; otherwise it
    is derived from the transform-limited pulse of bandwidth delta_nu for
    the chosen profile ("sech" or "gaussian").
    """

    nu: float  # optical frequency, Hz
    t_rep: float  # repetition period, s
    delta_nu: float  # comb bandwidth, Hz
    eta_q: float  # detector quantum efficiency
    p_lo: float  # total comb power, W
    p_s: float  # CW signal power, W
    n_teeth: int
    bandwidth: float  # resolution bandwidth, Hz
    tau: float | None = None
    gamma_sq: float | None = None
    profile: str = "sech"

    def __post_init__(self):
        for name in ("nu", "t_rep", "delta_nu", "p_lo", "p_s", "bandwidth"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.n_teeth < 1:
            raise ValueError("n_teeth must be a positive integer")
        if not 0.0 < self.eta_q <= 1.0:
            raise ValueError("eta_q must lie in (0, 1]")
        if self.profile not in ("sech", "gaussian"):
            raise ValueError(f"unknown pulse profile {self.profile!r}")

    def overlap_sq(self) -> float:
        if self.gamma_sq is not None:
            return self.gamma_sq
        if self.profile == "sech":
            tau = self.tau if self.tau is not None else sech_tau_from_bandwidth(self.delta_nu)
            return sech_overlap_sq(tau, self.t_rep)
        sigma = gaussian_sigma_from_fwhm(gaussian_fwhm_from_bandwidth(self.delta_nu))
        return gaussian_overlap_sq(sigma, self.t_rep)


def heterodyne_sql_snr(params: HeterodyneParams) -> tuple[float, float]:
    """Shot-noise-limited heterodyne SNR (linear, dB) per comb tooth.

    Mean-square beat between the CW signal and one tooth of power P_LO/n
    against the 2eIB shot noise of the photocurrent in the LO temporal
    mode (total comb power plus the signal power overlapping that mode).
    """
    g2 = params.overlap_sq()
    resp = params.eta_q * ELEMENTARY_CHARGE / (PLANCK * params.nu)
    signal = 2.0 * resp**2 * (params.p_lo / params.n_teeth) * params.p_s
    noise = (
        2.0
        * ELEMENTARY_CHARGE
        * resp
        * (params.p_lo + g2 * params.p_s)
        * params.bandwidth
    )
    snr = signal / noise
    return snr, db(snr)


def filtering_gain_db(alpha2_over_beta2: float, gamma, eta_f: float) -> float:
    """SNR gain of filtering at inefficiency eta_f over no filtering, in dB."""
    r = alpha2_over_beta2
    if r < 0:
        raise ValueError("power ratio must be non-negative")
    g2 = abs(complex(gamma)) ** 2
    return 10.0 * math.log10((1.0 + r * (1.0 - g2)) / (1.0 + r * eta_f))
