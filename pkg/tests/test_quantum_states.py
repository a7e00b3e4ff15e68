import math

import numpy as np
import pytest

from modal_homodyne.quantum_states import (
    CoherentAmplitude,
    decompose_coherent,
    decompose_fock,
    lo_amplitude,
    mean_photons,
    mean_photons_split,
)
from modal_homodyne.temporal_modes import TimeGrid, cw_mode, gaussian_root_mode, gram_schmidt


def make_basis(sigma=0.05, phi=0.0, n_points=1024):
    grid = TimeGrid(1.0, n_points)
    return gram_schmidt(gaussian_root_mode(grid, 0.5, sigma), cw_mode(grid, phi=phi))


def test_lo_amplitude_convention():
    assert lo_amplitude(3.0).alpha == 3.0 + 0j
    with pytest.raises(ValueError):
        lo_amplitude(-1.0)
    with pytest.raises(ValueError):
        CoherentAmplitude(1.0 + 0.5j, reference_phase=True)
    # signal amplitudes may be complex
    assert CoherentAmplitude(1.0 + 0.5j).mean_photons == pytest.approx(1.25)


def test_decompose_coherent_amplitudes():
    basis = make_basis(phi=0.4)
    alpha = 2.0 - 1.0j
    dec = decompose_coherent(alpha, basis)
    assert dec.alpha_lo == pytest.approx(basis.gamma * alpha)
    assert dec.alpha_perp == pytest.approx(basis.perp_fraction * alpha)
    lo, perp = mean_photons_split(dec)
    assert lo + perp == pytest.approx(abs(alpha) ** 2, rel=1e-12)


def test_decompose_fock_single_photon():
    basis = make_basis()
    state = decompose_fock(1, basis, n_max=4)
    assert state.amplitudes[1, 0] == pytest.approx(basis.gamma)
    assert state.amplitudes[0, 1] == pytest.approx(basis.perp_fraction)
    assert state.norm_sq() == pytest.approx(1.0, rel=1e-12)
    assert mean_photons(state) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("n", [0, 1, 2, 5, 12])
def test_decompose_fock_binomial_weights(n):
    basis = make_basis()
    state = decompose_fock(n, basis, n_max=16)
    g2 = basis.gamma_abs_sq
    # layer probabilities are Binomial(n, |gamma|^2)
    expected = np.array(
        [math.comb(n, j) * g2**j * (1 - g2) ** (n - j) if j <= n else 0.0 for j in range(17)]
    )
    lo_marginal = np.sum(np.abs(state.amplitudes) ** 2, axis=1)
    np.testing.assert_allclose(lo_marginal, expected, atol=1e-12)
    assert state.norm_sq() == pytest.approx(1.0, rel=1e-12)
    assert mean_photons(state) == pytest.approx(float(n), rel=1e-12, abs=1e-12)
    lo, _ = mean_photons_split(state)
    assert lo == pytest.approx(n * g2, rel=1e-10, abs=1e-12)


def test_decompose_fock_validation():
    basis = make_basis()
    with pytest.raises(ValueError):
        decompose_fock(-1, basis)
    with pytest.raises(ValueError):
        decompose_fock(5, basis, n_max=3)


def test_amplitudes_immutable():
    state = decompose_fock(2, make_basis(), n_max=4)
    with pytest.raises(ValueError):
        state.amplitudes[0, 0] = 1.0
