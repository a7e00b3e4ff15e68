"""Probability laws for the scaled photocurrent difference variable x.

The measurement splits into a quadrature law in the LO mode and a
mean-zero intensity-like law in the perpendicular mode; the observed
distribution is their convolution.  The perpendicular law is either a
set of atoms at v = (r - s)/(sqrt(2) beta) (weak fields) or its Gaussian
central limit (bright fields).
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_hermite, gammaln
from scipy.stats import norm, poisson

from .quantum_states import CoherentAmplitude, decompose_coherent, decompose_fock
from .temporal_modes import ModeBasis

__all__ = [
    "DifferenceDistribution",
    "PerpLaw",
    "default_x_grid",
    "lo_quadrature_pdf",
    "perp_law",
    "convolve",
    "coherent_total_pdf",
    "single_photon_pdf",
    "fock_total_pdf",
    "gaussian_limit_ks_distance",
]

GAUSSIAN_THRESHOLD = 100.0
POISSON_TAIL_MASS = 1e-12
MASS_TOL = 1e-6
TAIL_MASS_LIMIT = 1e-8
DEFAULT_GRID_POINTS = 4096


class GridCoverageError(ValueError):
    """The x grid is too narrow for the requested convolution."""


@dataclass(frozen=True)
class DifferenceDistribution:
    """Mixed continuous/atomic law of the scaled difference variable x."""

    x: np.ndarray
    density: np.ndarray
    atoms: tuple = ()
    beta: float = float("nan")
    source: str = ""

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        d = np.asarray(self.density, dtype=float)
        if x.shape != d.shape:
            raise ValueError("x and density must have the same shape")
        for arr in (x, d):
            arr.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "density", d)
        object.__setattr__(self, "atoms", tuple((float(v), float(w)) for v, w in self.atoms))

    def continuous_mass(self) -> float:
        return float(np.trapezoid(self.density, self.x))

    def atom_mass(self) -> float:
        return sum(w for _, w in self.atoms)

    def total_mass(self) -> float:
        return self.continuous_mass() + self.atom_mass()

    def mean(self) -> float:
        m = float(np.trapezoid(self.x * self.density, self.x))
        m += sum(v * w for v, w in self.atoms)
        return m

    def variance(self) -> float:
        mu = self.mean()
        var = float(np.trapezoid((self.x - mu) ** 2 * self.density, self.x))
        var += sum((v - mu) ** 2 * w for v, w in self.atoms)
        return var

    def to_csv(self, path) -> None:
        """Write (x, density) rows plus a JSON sidecar for atoms/metadata."""
        path = str(path)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "density"])
            for xv, dv in zip(self.x, self.density):
                writer.writerow([f"{xv:.17g}", f"{dv:.17g}"])
        sidecar = {
            "beta": None if math.isnan(self.beta) else self.beta,
            "source": self.source,
            "atoms": [[v, w] for v, w in self.atoms],
            "mean": self.mean(),
            "variance": self.variance(),
            "total_mass": self.total_mass(),
        }
        with open(path + ".json", "w") as fh:
            json.dump(sidecar, fh, indent=2)


@dataclass(frozen=True)
class PerpLaw:
    """Mean-zero law of the perpendicular-mode difference contribution v.

    Either explicit atoms (locations, weights) or a Gaussian with the
    matching variance; the mean is exactly zero in both representations.
    """

    kind: str  # "atoms" | "gaussian"
    locations: np.ndarray = field(default_factory=lambda: np.zeros(0))
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    variance: float = 0.0

    def __post_init__(self):
        if self.kind not in ("atoms", "gaussian"):
            raise ValueError(f"unknown perp-law kind {self.kind!r}")
        loc = np.asarray(self.locations, dtype=float)
        wts = np.asarray(self.weights, dtype=float)
        for arr in (loc, wts):
            arr.flags.writeable = False
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "weights", wts)

    def mean(self) -> float:
        if self.kind == "gaussian":
            return 0.0
        return float(np.sum(self.locations * self.weights))

    def characteristic_function(self, k: np.ndarray) -> np.ndarray:
        if self.kind == "gaussian":
            return np.exp(-0.5 * self.variance * k**2)
        return np.sum(
            self.weights[:, None] * np.exp(-1j * np.outer(self.locations, k)), axis=0
        )


def default_x_grid(
    mu: float = 0.0, sigma: float = 1.0, n_points: int = DEFAULT_GRID_POINTS
) -> np.ndarray:
    """Default [-8, 8] grid, widened to cover mu +/- 8 sigma."""
    lo = min(-8.0, mu - 8.0 * sigma)
    hi = max(8.0, mu + 8.0 * sigma)
    return np.linspace(lo, hi, n_points)


def _fock_pdf(n: int, x: np.ndarray) -> np.ndarray:
    # |<x|n>|^2 with vacuum variance 1/2 (hbar-free convention)
    log_norm = -(n * math.log(2.0) + gammaln(n + 1) + 0.5 * math.log(math.pi))
    h = eval_hermite(n, x)
    return h * h * np.exp(-(x**2) + log_norm)


def lo_quadrature_pdf(state_lo, x: np.ndarray) -> np.ndarray:
    """Quadrature density in the LO mode.

    ``state_lo`` is an integer Fock occupation, or a complex coherent
    amplitude in the LO mode (beta-real convention): the coherent law is
    Normal(sqrt(2) Re(a), 1/2), the Fock-n law H_n(x)^2 e^{-x^2}/(2^n n! sqrt(pi)).
    """
    x = np.asarray(x, dtype=float)
    if isinstance(state_lo, (int, np.integer)):
        if state_lo < 0:
            raise ValueError("Fock occupation must be non-negative")
        return _fock_pdf(int(state_lo), x)
    if isinstance(state_lo, CoherentAmplitude):
        state_lo = state_lo.alpha
    if isinstance(state_lo, (complex, float, np.complexfloating, np.floating)):
        mu = math.sqrt(2.0) * complex(state_lo).real
        return np.exp(-((x - mu) ** 2)) / math.sqrt(math.pi)
    raise TypeError(f"unsupported LO-mode state: {type(state_lo).__name__}")


def _fock_perp_atoms(w: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(w + 1)
    locations = (2.0 * j - w) / (math.sqrt(2.0) * beta)
    log_w = gammaln(w + 1) - gammaln(j + 1) - gammaln(w - j + 1) - w * math.log(2.0)
    return locations, np.exp(log_w)


def perp_law(
    state_perp,
    beta: float,
    gaussian_threshold: float = GAUSSIAN_THRESHOLD,
    tail_mass: float = POISSON_TAIL_MASS,
) -> PerpLaw:
    """Law of the perpendicular-mode contribution v = (r - s)/(sqrt(2) beta).

    Fock w: shifted-binomial atoms at (2j - w)/(sqrt(2) beta), weights C(w,j)/2^w.
    Coherent a: Gaussian(0, |a|^2/(2 beta^2)) once |a|^2 >= gaussian_threshold,
    otherwise the exact Poisson mixture of those binomial atom sets.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    scale = math.sqrt(2.0) * beta
    if isinstance(state_perp, (int, np.integer)):
        w = int(state_perp)
        if w < 0:
            raise ValueError("Fock occupation must be non-negative")
        loc, wts = _fock_perp_atoms(w, beta)
        return PerpLaw("atoms", loc, wts, variance=w / (2.0 * beta**2))
    if isinstance(state_perp, CoherentAmplitude):
        state_perp = state_perp.alpha
    lam = abs(complex(state_perp)) ** 2
    variance = lam / (2.0 * beta**2)
    if lam >= gaussian_threshold:
        return PerpLaw("gaussian", variance=variance)
    # exact mixture over the Poisson photon-number layers, truncated in the tail
    w_max = int(poisson.isf(tail_mass, lam)) + 1 if lam > 0 else 0
    # atom support is the integer lattice m = 2j - w, |m| <= w_max
    weights = np.zeros(2 * w_max + 1)
    for w in range(w_max + 1):
        pw = poisson.pmf(w, lam)
        j = np.arange(w + 1)
        log_b = gammaln(w + 1) - gammaln(j + 1) - gammaln(w - j + 1) - w * math.log(2.0)
        weights[(2 * j - w) + w_max] += pw * np.exp(log_b)
    m = np.arange(-w_max, w_max + 1)
    keep = weights > 0
    # symmetrize exactly so the mean-zero invariant is not float-noise limited
    weights = 0.5 * (weights + weights[::-1])
    return PerpLaw("atoms", m[keep] / scale, weights[keep], variance=variance)


def _tail_mass(x: np.ndarray, density: np.ndarray, margin: float) -> float:
    """Probability mass within ``margin`` of either grid edge."""
    left = x <= x[0] + margin
    right = x >= x[-1] - margin
    mass = 0.0
    if left.sum() > 1:
        mass += float(np.trapezoid(density[left], x[left]))
    if right.sum() > 1:
        mass += float(np.trapezoid(density[right], x[right]))
    return mass


def convolve(
    x: np.ndarray,
    lo_density: np.ndarray,
    law: PerpLaw,
    beta: float = float("nan"),
    source: str = "convolve",
) -> DifferenceDistribution:
    """Convolve a gridded LO density with a perpendicular law.

    Implemented in Fourier space with the law's exact characteristic
    function, which handles both atom shifts and Gaussian smearing
    without resampling error.  The grid must hold the shifted tails:
    mass within the law's reach of either edge must be < TAIL_MASS_LIMIT.
    """
    x = np.asarray(x, dtype=float)
    lo_density = np.asarray(lo_density, dtype=float)
    dx = x[1] - x[0]
    reach = 6.0 * math.sqrt(law.variance)
    if law.kind == "atoms" and law.locations.size:
        reach = max(reach, float(np.max(np.abs(law.locations))))
    if _tail_mass(x, lo_density, reach) > TAIL_MASS_LIMIT:
        raise GridCoverageError(
            "x grid too narrow: tail mass near the edges exceeds "
            f"{TAIL_MASS_LIMIT} within the convolution reach {reach:.3g}"
        )
    n = len(x)
    n_fft = 1 << (2 * n - 1).bit_length()
    spec = np.fft.fft(lo_density, n_fft)
    k = 2.0 * np.pi * np.fft.fftfreq(n_fft, dx)
    out = np.fft.ifft(spec * law.characteristic_function(k))[:n].real
    np.clip(out, 0.0, None, out=out)
    return DifferenceDistribution(x, out, beta=beta, source=source)


def coherent_total_pdf(
    alpha,
    beta: float,
    basis: ModeBasis | complex,
    x: np.ndarray | None = None,
    n_points: int = DEFAULT_GRID_POINTS,
) -> DifferenceDistribution:
    """Closed-form difference-variable law for a coherent signal.

    Normal with mean sqrt(2) Re(gamma alpha) and variance
    1/2 + |alpha|^2 (1-|gamma|^2)/(2 beta^2).  Warns outside the
    large-LO regime |beta|^2 >= 10 |gamma alpha|^2.
    """
    if isinstance(alpha, CoherentAmplitude):
        alpha = alpha.alpha
    alpha = complex(alpha)
    gamma = basis.gamma if isinstance(basis, ModeBasis) else complex(basis)
    if not beta > 0:
        raise ValueError("beta must be positive")
    if beta**2 < 10.0 * abs(gamma * alpha) ** 2:
        warnings.warn(
            "large-LO assumption violated: |beta|^2 < 10 |gamma alpha|^2; "
            "the closed-form law drops the signal shot noise in the LO mode",
            stacklevel=2,
        )
    mu = math.sqrt(2.0) * (gamma * alpha).real
    var = 0.5 + abs(alpha) ** 2 * (1.0 - abs(gamma) ** 2) / (2.0 * beta**2)
    if x is None:
        x = default_x_grid(mu, math.sqrt(var), n_points)
    x = np.asarray(x, dtype=float)
    density = norm.pdf(x, loc=mu, scale=math.sqrt(var))
    return DifferenceDistribution(x, density, beta=beta, source="coherent_total_pdf")


def single_photon_pdf(
    gamma, beta: float, x: np.ndarray | None = None
) -> DifferenceDistribution:
    """Difference-variable law for a single-photon signal and finite LO.

    P(x) = (1/2 sqrt(pi)) [4|gamma|^2 x^2 e^{-x^2}
           + (1-|gamma|^2)(e^{-(x-s)^2} + e^{-(x+s)^2})],  s = 1/(sqrt(2) beta).
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    g2 = abs(complex(gamma)) ** 2
    if g2 > 1.0 + 1e-12:
        raise ValueError("|gamma| must be <= 1")
    g2 = min(g2, 1.0)
    shift = 1.0 / (math.sqrt(2.0) * beta)
    if x is None:
        x = default_x_grid(0.0, max(1.0, shift))
    x = np.asarray(x, dtype=float)
    density = (
        4.0 * g2 * x**2 * np.exp(-(x**2))
        + (1.0 - g2) * (np.exp(-((x - shift) ** 2)) + np.exp(-((x + shift) ** 2)))
    ) / (2.0 * math.sqrt(math.pi))
    return DifferenceDistribution(x, density, beta=beta, source="single_photon_pdf")


def fock_total_pdf(
    n: int,
    gamma,
    beta: float,
    x: np.ndarray | None = None,
    n_max: int | None = None,
) -> DifferenceDistribution:
    """Difference-variable law for an n-photon signal, summed over layers.

    Each layer |j>_LO |n-j>_perp contributes its Fock-j quadrature density
    shifted to the perpendicular atoms of w = n - j; cross terms vanish
    because the perpendicular measurement projects onto Fock states.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    if n_max is None:
        n_max = max(n, 1)
    if n > n_max:
        raise ValueError(f"truncation n_max={n_max} below photon number n={n}")
    gamma = complex(gamma)
    g2 = abs(gamma) ** 2
    if x is None:
        halfwidth = max(1.0, math.sqrt(n + 1.0)) + n / (math.sqrt(2.0) * beta)
        x = default_x_grid(0.0, halfwidth)
    x = np.asarray(x, dtype=float)
    density = np.zeros_like(x)
    perp_amp_sq = max(0.0, 1.0 - g2)
    for j in range(n + 1):
        w = n - j
        log_c = gammaln(n + 1) - gammaln(j + 1) - gammaln(w + 1)
        prob_j = math.exp(log_c) * g2**j * perp_amp_sq**w
        if prob_j == 0.0:
            continue
        loc, wts = _fock_perp_atoms(w, beta)
        for v, pw in zip(loc, wts):
            density += prob_j * pw * _fock_pdf(j, x - v)
    return DifferenceDistribution(x, density, beta=beta, source="fock_total_pdf")


def gaussian_limit_ks_distance(law: PerpLaw) -> float:
    """Continuity-corrected Kolmogorov distance of an atom law to its
    Gaussian limit with the same variance.

    The atoms sit on a lattice; the CDFs are compared at the lattice
    midpoints, the standard continuity correction for lattice central
    limits (the raw sup distance is dominated by the half-atom jumps).
    """
    if law.kind != "atoms":
        return 0.0
    order = np.argsort(law.locations)
    loc = law.locations[order]
    cdf = np.cumsum(law.weights[order])
    spacing = np.min(np.diff(loc)) if loc.size > 1 else 0.0
    sigma = math.sqrt(law.variance)
    ref = norm.cdf(loc + 0.5 * spacing, scale=sigma)
    return float(np.max(np.abs(cdf - ref)))
