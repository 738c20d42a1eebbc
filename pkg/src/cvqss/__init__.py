"""Key-rate bounds and protocol simulation for continuous-variable quantum
secret sharing over Gaussian states."""

from .estimation import (
    ConditioningResult,
    DegenerateEstimatorError,
    JointVariable,
    conditional_variance_coords,
    conditional_variance_fixed,
    conditional_variance_optimal,
    gaussian_mutual_information,
)
from .gaussian import (
    GaussianState,
    StateDiagnostics,
    SymplecticTransform,
    UnphysicalStateError,
    apply_beamsplitter,
    apply_cz,
    partial_trace,
    squeezed_vacuum,
    symplectic_eigenvalues,
    symplectic_form,
    tensor,
    vacuum,
    validate,
)
from .keyrate import (
    EavesdroppingReport,
    DishonestReport,
    KeyRateReport,
    SECURITY_THRESHOLD,
    ThresholdScheme,
    enumerate_structures,
    keyrate_dishonest,
    keyrate_eavesdropping,
    keyrate_qss,
)
from .simulation import (
    EmpiricalConditioning,
    ProtocolReport,
    SampleBatch,
    UndersampledError,
    empirical_conditional_variance,
    run_protocol,
    sample_outcomes,
)
from .states import (
    ChannelSpec,
    PartyLayout,
    build_three_mode_chain,
    build_kn_state,
    chain_topology,
    pure_loss,
    star_topology,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelSpec",
    "ConditioningResult",
    "DegenerateEstimatorError",
    "DishonestReport",
    "EavesdroppingReport",
    "EmpiricalConditioning",
    "GaussianState",
    "JointVariable",
    "KeyRateReport",
    "PartyLayout",
    "ProtocolReport",
    "SampleBatch",
    "SECURITY_THRESHOLD",
    "StateDiagnostics",
    "SymplecticTransform",
    "ThresholdScheme",
    "UndersampledError",
    "UnphysicalStateError",
    "apply_beamsplitter",
    "apply_cz",
    "build_three_mode_chain",
    "build_kn_state",
    "chain_topology",
    "conditional_variance_coords",
    "conditional_variance_fixed",
    "conditional_variance_optimal",
    "empirical_conditional_variance",
    "enumerate_structures",
    "gaussian_mutual_information",
    "keyrate_dishonest",
    "keyrate_eavesdropping",
    "keyrate_qss",
    "partial_trace",
    "pure_loss",
    "run_protocol",
    "sample_outcomes",
    "squeezed_vacuum",
    "star_topology",
    "symplectic_eigenvalues",
    "symplectic_form",
    "tensor",
    "vacuum",
    "validate",
]
