"""Krylov-space dynamics of the monitored (no-click) SSH chain."""

__version__ = "0.1.0"

from .bilanczos import (  # noqa: E402
    KrylovBasis,
    OperatorKrylovBasis,
    biorthogonality_report,
    operator_bilanczos,
    reconstruction_error,
    state_bilanczos,
)
from .evolution import TimeGrid, krylov_density_matrix, krylov_wavefunctions, propagate_exact  # noqa: E402
from .model import (  # noqa: E402
    ModelParams,
    PhaseLabel,
    build_hamiltonian,
    classify_pt_phase,
    dispersion,
    dispersion_grid,
    exceptional_momentum,
    full_spectrum,
    localized_state,
    measurement_operator,
    pair_state,
    sublattice_krylov_dim,
)
from .observables import (  # noqa: E402
    complexity_series,
    count_prominent_maxima,
    entropy_series,
    kipr_series,
    late_mean,
    power_law_fit,
    saturation_time,
    time_average,
)
from .qfi import averaged_qfi, qfi_operator, qfi_state  # noqa: E402
from .subsystem import kcop_scaling, kcop_series, purified_kipr_series  # noqa: E402

__all__ = [
    "KrylovBasis",
    "OperatorKrylovBasis",
    "ModelParams",
    "PhaseLabel",
    "TimeGrid",
    "averaged_qfi",
    "biorthogonality_report",
    "build_hamiltonian",
    "classify_pt_phase",
    "complexity_series",
    "count_prominent_maxima",
    "dispersion",
    "dispersion_grid",
    "entropy_series",
    "exceptional_momentum",
    "full_spectrum",
    "kcop_scaling",
    "kcop_series",
    "kipr_series",
    "krylov_density_matrix",
    "krylov_wavefunctions",
    "late_mean",
    "localized_state",
    "measurement_operator",
    "operator_bilanczos",
    "pair_state",
    "power_law_fit",
    "propagate_exact",
    "purified_kipr_series",
    "qfi_operator",
    "qfi_state",
    "reconstruction_error",
    "saturation_time",
    "state_bilanczos",
    "sublattice_krylov_dim",
    "time_average",
]
