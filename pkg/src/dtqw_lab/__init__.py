"""Discrete-time quantum walks, their band structure and the lattice Dirac equation."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .state import (
    Lattice,
    MomentumState,
    WalkerState,
    dft,
    gaussian_packet,
    idft,
    point_state,
    position_distribution,
)
from .coin import CoinMatrix, CoinSpec, build_coin, hadamard, hadamard_xy, identity, preset
from .evolution import (
    PotentialProfile,
    StepConfig,
    Trajectory,
    evolve,
    make_step_potential,
    step,
    zero_potential,
)
from .spectral import (
    BandTouchingError,
    BandWeights,
    ConeGeometry,
    KleinReport,
    band_decompose,
    band_eigenvalues,
    band_eigenvectors,
    band_recompose,
    band_structure,
    closes_all_channels,
    cone_geometry,
    group_velocity,
    klein_classify,
    momentum_propagate,
    quasi_energies,
)
from .dirac import (
    DiracParams,
    dirac_coin,
    dirac_dispersion,
    dirac_evolve,
    dirac_step,
    gap_edge,
    spectral_equivalence_check,
)
from .observables import (
    NoOscillationError,
    SeamError,
    ZitterSeries,
    delta_x_operator,
    delta_x_series_analytic,
    delta_x_series_simulated,
    estimate_frequency,
    horn_positions,
    mean_position,
    standing_momentum,
)
from .klein import PacketParams, TransmissionRecord, run_confinement, run_klein

__all__ = [name for name in dir() if not name.startswith("_")]
