"""Signal and LO states decomposed into the (LO, perpendicular) mode basis.

Convention: the LO amplitude beta is real and positive; any LO phase
structure lives in the LO temporal mode.  Coherent signals decompose as
|alpha> -> |gamma alpha> (LO mode) x |sqrt(1-|gamma|^2) alpha> (perp mode),
and an n-photon Fock signal spreads binomially over the two modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb

from .temporal_modes import ModeBasis

__all__ = [
    "CoherentAmplitude",
    "DecomposedCoherent",
    "TwoModeFockState",
    "lo_amplitude",
    "decompose_coherent",
    "decompose_fock",
    "mean_photons",
    "mean_photons_split",
]

DEFAULT_N_MAX = 32


@dataclass(frozen=True)
class CoherentAmplitude:
    """Dimensionless coherent amplitude; |alpha|^2 = mean photons in (0, T).

    ``reference_phase`` marks an amplitude used as the LO reference: it must
    then be real and positive, with the LO phase carried by the LO mode.
    """

    alpha: complex
    reference_phase: bool = False

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        if self.reference_phase:
            if self.alpha.imag != 0.0 or self.alpha.real <= 0.0:
                raise ValueError(
                    "reference-phase (LO) amplitude must be real and positive; "
                    "fold any LO phase into the LO temporal mode"
                )

    @property
    def mean_photons(self) -> float:
        return abs(self.alpha) ** 2


def lo_amplitude(beta: float) -> CoherentAmplitude:
    """Validated LO amplitude (real positive by convention)."""
    return CoherentAmplitude(beta, reference_phase=True)


@dataclass(frozen=True)
class DecomposedCoherent:
    """Coherent signal split over the basis: (gamma*alpha, sqrt(1-|gamma|^2)*alpha)."""

    alpha_lo: complex
    alpha_perp: complex
    basis: ModeBasis


@dataclass(frozen=True)
class TwoModeFockState:
    """Pure state over Fock layers |j>_LO |k>_perp with amplitudes c[j, k]."""

    basis: ModeBasis
    amplitudes: np.ndarray
    n_max: int = DEFAULT_N_MAX

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.n_max + 1, self.n_max + 1):
            raise ValueError("amplitudes must be (n_max+1) x (n_max+1)")
        amp = amp.copy()
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def decompose_coherent(alpha: CoherentAmplitude | complex, basis: ModeBasis) -> DecomposedCoherent:
    """Split a coherent signal into the LO and perpendicular modes."""
    a = alpha.alpha if isinstance(alpha, CoherentAmplitude) else complex(alpha)
    return DecomposedCoherent(
        alpha_lo=basis.gamma * a,
        alpha_perp=basis.perp_fraction * a,
        basis=basis,
    )


def decompose_fock(n: int, basis: ModeBasis, n_max: int = DEFAULT_N_MAX) -> TwoModeFockState:
    """n-photon signal in the two-mode basis.

    The amplitude on |j>_LO |n-j>_perp is sqrt(C(n,j)) gamma^j (1-|gamma|^2)^((n-j)/2);
    n = 1 gives (gamma, sqrt(1-|gamma|^2)) on (|1,0>, |0,1>).
    """
    if n < 0:
        raise ValueError("photon number must be non-negative")
    if n_max < n:
        raise ValueError(f"n_max={n_max} cannot hold an n={n} photon state")
    gamma = basis.gamma
    perp = basis.perp_fraction
    amp = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for j in range(n + 1):
        amp[j, n - j] = math.sqrt(comb(n, j, exact=True)) * gamma**j * perp ** (n - j)
    return TwoModeFockState(basis=basis, amplitudes=amp, n_max=n_max)


def mean_photons_split(state) -> tuple[float, float]:
    """Mean photon number in the (LO, perpendicular) modes."""
    if isinstance(state, DecomposedCoherent):
        return abs(state.alpha_lo) ** 2, abs(state.alpha_perp) ** 2
    if isinstance(state, TwoModeFockState):
        prob = np.abs(state.amplitudes) ** 2
        j = np.arange(state.n_max + 1)
        return float(np.sum(prob * j[:, None])), float(np.sum(prob * j[None, :]))
    raise TypeError(f"unsupported state type: {type(state).__name__}")


def mean_photons(state) -> float:
    """Total mean photon number of a decomposed state."""
    lo, perp = mean_photons_split(state)
    return lo + perp
