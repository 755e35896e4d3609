"""Near-field polarized XL-MIMO analysis: dipole channels, holographic-limit
Gramians, waterfilling capacity, and aperture optimization."""

from .capacity import (
    PowerAllocation,
    RateReport,
    SnrConfig,
    capacity_finite,
    effective_dof,
    eig_sorted,
    snr_thresholds,
    spectral_efficiency,
    waterfill,
)
from .channel import (
    ChannelMatrix,
    FiniteGramian,
    Lemma1Report,
    PhysicalConstants,
    exact_block,
    finite_gramian,
    lemma1_verify,
    radiative_block,
    stack_channel,
)
from .geometry import (
    ArraySpec,
    PolarPlacement,
    RxSpec,
    UpaGeometry,
    element_positions,
    polar_to_cartesian,
    rayleigh_spacing_product,
    upa_geometry,
)
from .holographic import (
    AsymptoticGramian,
    Phi2Value,
    PsiSet,
    partial_sum_sk,
    phi2,
    psi_set,
    quadrature_oracle,
    ula_gramian,
    ula_gramian_offaxis,
    upa_gramian_2x3,
    upa_gramian_3x3,
    upa_single_integral_2x3,
)
from .sweep import (
    SweepResult,
    SweepRow,
    aperture_for_fraction,
    eigenvalue_size_study,
    optimal_aperture_ula,
    rx_separation_sweep,
    upa_aperture_sweep,
)

__version__ = "0.1.0"
