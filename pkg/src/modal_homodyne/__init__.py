"""Measurement statistics and SNR bounds for temporally mismatched homodyne detection."""

from .click_sampler import (
    ClickRecord,
    EmpiricalStats,
    bin_intensities,
    coarse_grain,
    empirical_distribution,
    reduce_record,
    sample_record,
)
from .povm_statistics import (
    DifferenceDistribution,
    GridCoverageError,
    PerpLaw,
    coherent_total_pdf,
    convolve,
    default_x_grid,
    fock_total_pdf,
    gaussian_limit_ks_distance,
    lo_quadrature_pdf,
    perp_law,
    single_photon_pdf,
)
from .quantum_states import (
    CoherentAmplitude,
    DecomposedCoherent,
    TwoModeFockState,
    decompose_coherent,
    decompose_fock,
    lo_amplitude,
    mean_photons,
    mean_photons_split,
)
from .snr_filtering import (
    FilterInefficiency,
    FilterSpec,
    HeterodyneParams,
    SnrBounds,
    TopHatSnr,
    bound_ordering,
    cw_gate_inefficiency,
    design_filter,
    eta_f_of,
    filtering_gain_db,
    gaussian_overlap_sq,
    heterodyne_sql_snr,
    photon_number,
    sech_overlap_sq,
    sech_tau_from_bandwidth,
    snr_filtered,
    snr_unfiltered,
    tophat_filtered_snr,
)
from .temporal_modes import (
    GridMismatchError,
    ModeBasis,
    ModeMatchedError,
    TemporalMode,
    TimeGrid,
    cw_mode,
    gaussian_root_mode,
    gram_schmidt,
    inner_product,
    make_mode,
    mode_from_samples,
    pulse_train_mode,
    sech_root_mode,
    tophat_mode,
)

__version__ = "0.1.0"
