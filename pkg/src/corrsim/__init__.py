"""Correlation erasure numerics: measure total, quantum and classical correlations
by the local noise needed to destroy them."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConsistencyError,
    ContractError,
    CorrsimError,
    DimensionCapError,
    InvariantError,
    PreconditionError,
    ProtocolError,
    SubsystemIndexError,
)
from .linalg import (  # noqa: E402
    hermitian_eigensystem,
    operator_in_interval,
    partial_trace,
    tensor,
    trace_norm,
)
from .states import (  # noqa: E402
    DensityMatrix,
    PureState,
    SchmidtForm,
    bell,
    bell_dephased,
    conditional_mutual_information,
    entanglement_entropy,
    eta,
    fannes_bound,
    ghz3,
    mutual_information,
    purify,
    random_state,
    schmidt,
    von_neumann_entropy,
    werner,
)
from .channels import (  # noqa: E402
    KrausChannel,
    Locality,
    MixedUnitaryChannel,
    NoiseCost,
    entropy_exchange,
    epsilon_decorrelates,
    epsilon_disentangles,
    local_instrument_check,
    noise_costs,
)
from .typicality import (  # noqa: E402
    TypicalProjector,
    UnitaryEnsembleSpec,
    chernoff_trial,
    gentle_measurement_check,
    generate_ensemble,
    typical_projector,
    typicality_report,
)
from .protocols import (  # noqa: E402
    bell_erasure_demo,
    classical_correlation_dephasing,
    conjecture_scan,
    decorrelate_typical,
    disentangle_pure,
    multipartite_erasure,
    ssa_scan,
    two_step_cost_comparison,
)
