"""SU(m,1) Gaussian states, their separability under noise, and 1 -> m telecloning."""

from .channels import NoiseParams, build_noisy_support, evolve
from .errors import (
    CVTCError,
    InfeasibleError,
    InvalidArgumentError,
    NumericError,
    TruncationError,
    UnsupportedInputError,
)
from .gaussian import (
    Bipartition,
    CovarianceMatrix,
    GaussianState,
    condition_on_gaussian_measurement,
    fidelity_to_coherent,
    partial_transpose,
    ppt_min_eigenvalue,
    reduce,
    symplectic_form,
    thermal_cm,
    vacuum_cm,
)
from .optimizer import (
    OptimizationResult,
    Regime,
    TradeoffResult,
    baseline_fidelities,
    f1_max_tradeoff_m3,
    n1_given_N0,
    n1_min_closed,
    optimize_symmetric_closed,
    optimize_symmetric_numeric,
    ratio_constrained_n1,
    symmetric_f,
    symmetric_fidelity,
)
from .separability import (
    SeparabilityReport,
    Verdict,
    cubic_factors_lossy,
    cubic_factors_thermal,
    lossy_threshold_mode0,
    lossy_threshold_mode1,
    thermal_threshold_closed,
    tripartite_report,
)
from .states import FockAmplitudes, SupportSpec, build_cm, cm_from_fock, fock_coefficients, thermal_cm_of_support
from .telecloning import (
    CloneReport,
    InputState,
    clone_fidelity_closed,
    heterodyne_povm_cm,
    ideal_clone_noise,
    ideal_fidelities,
    monte_carlo_protocol,
    run_protocol,
)

__version__ = "0.1.0"
