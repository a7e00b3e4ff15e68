import math

import numpy as np
import pytest

from modal_homodyne.click_sampler import (
    bin_intensities,
    coarse_grain,
    empirical_distribution,
    reduce_record,
    sample_record,
)
from modal_homodyne.snr_filtering import FilterSpec
from modal_homodyne.temporal_modes import TimeGrid, cw_mode, tophat_mode

GRID = TimeGrid(1.0, 4096)


def geometry(gamma=0.125, n_points=4096):
    # CW signal against a top-hat LO of width gamma^2 * T: overlap is exactly
    # gamma and the perpendicular mode vanishes on the LO support
    grid = TimeGrid(1.0, n_points)
    lo_bins = round(gamma**2 * n_points)
    assert lo_bins == gamma**2 * n_points
    return grid, cw_mode(grid), tophat_mode(grid, 0.0, lo_bins * grid.dt), lo_bins


def test_bin_intensities_energy():
    grid, xi_s, xi_lo, _ = geometry()
    alpha, beta = 30.0, 100.0
    i1, i2 = bin_intensities(alpha, beta, xi_s, xi_lo)
    # beamsplitter conserves energy: total mean counts = |alpha|^2 + |beta|^2
    assert np.sum(i1) + np.sum(i2) == pytest.approx(alpha**2 + beta**2, rel=1e-12)
    assert np.all(i1 >= 0) and np.all(i2 >= 0)


def test_vacuum_signal_splits_lo():
    grid, xi_s, xi_lo, _ = geometry()
    i1, i2 = bin_intensities(0.0, 50.0, xi_s, xi_lo)
    np.testing.assert_allclose(i1, i2, rtol=1e-12)
    assert np.sum(i1) == pytest.approx(50.0**2 / 2.0, rel=1e-12)


def test_all_dark_record():
    grid, xi_s, xi_lo, _ = geometry()
    with pytest.raises(ValueError):
        bin_intensities(0.0, 0.0, xi_s, xi_lo)


def test_sample_record_reproducible():
    grid, xi_s, xi_lo, _ = geometry()
    a = sample_record(10.0, 50.0, xi_s, xi_lo, n_shots=8, seed=11)
    b = sample_record(10.0, 50.0, xi_s, xi_lo, n_shots=8, seed=11)
    np.testing.assert_array_equal(a.n1, b.n1)
    np.testing.assert_array_equal(a.n2, b.n2)
    c = sample_record(10.0, 50.0, xi_s, xi_lo, n_shots=8, seed=12)
    assert not np.array_equal(a.n1, c.n1)


def test_reduce_record_scaling():
    grid, xi_s, xi_lo, _ = geometry()
    record = sample_record(10.0, 50.0, xi_s, xi_lo, n_shots=64, seed=3)
    x = reduce_record(record, FilterSpec.ones(grid), 50.0)
    manual = (record.n1.sum(axis=1) - record.n2.sum(axis=1)) / (math.sqrt(2.0) * 50.0)
    np.testing.assert_allclose(x, manual, rtol=1e-12)


def test_coarse_grain_preserves_unfiltered_reduction():
    grid, xi_s, xi_lo, _ = geometry()
    record = sample_record(20.0, 100.0, xi_s, xi_lo, n_shots=128, seed=7)
    merged = coarse_grain(record, 8)
    assert merged.grid.n_points == grid.n_points // 8
    x_fine = reduce_record(record, FilterSpec.ones(grid), 100.0)
    x_merged = reduce_record(merged, FilterSpec.ones(merged.grid), 100.0)
    np.testing.assert_array_equal(x_fine, x_merged)
    np.testing.assert_array_equal(
        merged.n1.sum(axis=1), record.n1.sum(axis=1)
    )


def test_empirical_distribution_moments():
    gamma = 0.125
    grid, xi_s, xi_lo, _ = geometry(gamma)
    alpha, beta = 40.0, 200.0
    stats = empirical_distribution(
        alpha, beta, xi_s, xi_lo, FilterSpec.ones(grid), n_shots=200000, seed=5
    )
    mu = math.sqrt(2.0) * gamma * alpha
    var = (alpha**2 + beta**2) / (2.0 * beta**2)
    assert stats.mean == pytest.approx(mu, abs=5 * stats.mean_stderr())
    assert stats.variance == pytest.approx(var, rel=0.02)


def test_empirical_distribution_deterministic():
    grid, xi_s, xi_lo, _ = geometry()
    runs = [
        empirical_distribution(
            10.0, 50.0, xi_s, xi_lo, FilterSpec.ones(grid), n_shots=5000, seed=9
        )
        for _ in range(2)
    ]
    np.testing.assert_array_equal(runs[0].samples, runs[1].samples)


def test_grouped_path_matches_per_bin_path():
    # a filter with many distinct weights forces the per-bin path; a
    # two-level filter takes the grouped path; the laws must agree
    gamma = 0.125
    grid, xi_s, xi_lo, lo_bins = geometry(gamma, n_points=1024)
    alpha, beta = 40.0, 200.0
    weights = np.zeros(grid.n_points)
    weights[: lo_bins + 64] = 1.0
    filt = FilterSpec(grid, weights)
    # tiny distinct perturbations off the gate keep the law identical
    # (weights multiply empty bins only after the gate region)
    noisy = weights.copy()
    noisy[lo_bins + 64 :] = 1e-9 * (1.0 + np.arange(grid.n_points - lo_bins - 64))
    filt_noisy = FilterSpec(grid, noisy)
    fast = empirical_distribution(alpha, beta, xi_s, xi_lo, filt, 100000, seed=21)
    slow = empirical_distribution(alpha, beta, xi_s, xi_lo, filt_noisy, 100000, seed=22)
    assert fast.mean == pytest.approx(slow.mean, abs=5 * (fast.mean_stderr() + slow.mean_stderr()))
    assert fast.variance == pytest.approx(slow.variance, rel=0.05)


def test_empirical_stats_snr():
    grid, xi_s, xi_lo, _ = geometry()
    stats = empirical_distribution(
        40.0, 200.0, xi_s, xi_lo, FilterSpec.ones(grid), n_shots=50000, seed=13
    )
    assert stats.snr_db == pytest.approx(10.0 * math.log10(stats.mean**2 / stats.variance))
