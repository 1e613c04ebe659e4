"""Partial-collapse measurement and reversal simulator.

Simulates weak (partial-collapse) polarization measurements on one- and
two-qubit states, their local and nonlocal reversal, and the analysis
chain used to characterize them: maximum-likelihood state tomography,
single-qubit process tomography, concurrence, fidelity, CHSH values, and
a calibrated noise model for imperfect sources and interferometers.
"""

from ._version import __version__
from .core import (
    PAULI_BASIS,
    PAULI_LABELS,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    POLARIZATION_LABELS,
    bell_phi_plus,
    density,
    eigen_hermitian,
    ensure_density_matrix,
    ensure_state_vector,
    hermitize,
    ket,
    ket2,
    partial_trace,
    sqrt_psd,
    tensor,
)
from .errors import (
    DegenerateChannelError,
    IncompleteDataError,
    NotPositiveSemidefiniteError,
    SingularReversalError,
)
from .harness import (
    DEFAULT_P_GRID,
    RunReport,
    ScenarioConfig,
    run_chsh,
    run_fig2,
    run_fig3,
    run_fig4,
    run_scenario,
    write_report,
)
from .measurement import (
    PartialMeasurement,
    ReversalOp,
    apply_on_qubit,
    evolve_pm_on_bell,
    hwp_angle_to_strength,
    pm_operator,
    reversal_sequence,
    rm_operator,
)
from .metrics import (
    AnalyzerAngles,
    analyzer,
    bloch_vector,
    canonical_angle,
    chsh_optimize,
    chsh_value,
    concurrence,
    correlation,
    correlation_matrix,
    horodecki_smax,
    state_fidelity,
)
from .noise import (
    NoiseConfig,
    calibrate_initial_visibility,
    dephase,
    interferometer_channel,
    noisy_protocol,
    phase_perturb,
    read_noise_config,
    werner,
    write_noise_config,
)
from .tomography import (
    QPT_PROBE_LABELS,
    SINGLE_QUBIT_SETTINGS,
    TWO_QUBIT_SETTINGS_16,
    TWO_QUBIT_SETTINGS_36,
    CountRecord,
    MleResult,
    QptResult,
    born_probability,
    chi_analytic_pm,
    chi_identity,
    exact_records,
    linear_inversion_state,
    mle_state,
    mle_state_full,
    normalize_chi,
    process_fidelity,
    project_to_physical,
    projector,
    qpt_single_qubit,
    read_count_records,
    sample_counts,
    write_count_records,
)

__all__ = [
    "__version__",
    "PAULI_BASIS",
    "PAULI_LABELS",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "POLARIZATION_LABELS",
    "bell_phi_plus",
    "density",
    "eigen_hermitian",
    "ensure_density_matrix",
    "ensure_state_vector",
    "hermitize",
    "ket",
    "ket2",
    "partial_trace",
    "sqrt_psd",
    "tensor",
    "DegenerateChannelError",
    "IncompleteDataError",
    "NotPositiveSemidefiniteError",
    "SingularReversalError",
    "DEFAULT_P_GRID",
    "RunReport",
    "ScenarioConfig",
    "run_chsh",
    "run_fig2",
    "run_fig3",
    "run_fig4",
    "run_scenario",
    "write_report",
    "PartialMeasurement",
    "ReversalOp",
    "apply_on_qubit",
    "evolve_pm_on_bell",
    "hwp_angle_to_strength",
    "pm_operator",
    "reversal_sequence",
    "rm_operator",
    "AnalyzerAngles",
    "analyzer",
    "bloch_vector",
    "canonical_angle",
    "chsh_optimize",
    "chsh_value",
    "concurrence",
    "correlation",
    "correlation_matrix",
    "horodecki_smax",
    "state_fidelity",
    "NoiseConfig",
    "calibrate_initial_visibility",
    "dephase",
    "interferometer_channel",
    "noisy_protocol",
    "phase_perturb",
    "read_noise_config",
    "werner",
    "write_noise_config",
    "QPT_PROBE_LABELS",
    "SINGLE_QUBIT_SETTINGS",
    "TWO_QUBIT_SETTINGS_16",
    "TWO_QUBIT_SETTINGS_36",
    "CountRecord",
    "MleResult",
    "QptResult",
    "born_probability",
    "chi_analytic_pm",
    "chi_identity",
    "exact_records",
    "linear_inversion_state",
    "mle_state",
    "mle_state_full",
    "normalize_chi",
    "process_fidelity",
    "project_to_physical",
    "projector",
    "qpt_single_qubit",
    "read_count_records",
    "sample_counts",
    "write_count_records",
]
