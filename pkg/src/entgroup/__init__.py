"""Local-unitary stabilizers and entanglement groups of multipartite quantum states."""

from .analysis import (
    EntanglementReport,
    Witness,
    analyze,
    analyze_mixed,
    analyze_pure,
    lift_stabilizer,
    purification_equivalence,
    quotient_witness,
    theorem_checks,
)
from .catalog import (
    bell,
    ghz,
    haar_unitary,
    random_density,
    random_ensemble,
    random_state,
    random_symmetric_ensemble,
    werner,
    werner_disentangler,
    werner_ensemble,
    werner_min_purification,
    werner_purification,
)
from .discrete import DiscreteCandidate, pauli_search, verify_candidate
from .errors import (
    EntgroupError,
    MetadataMissingError,
    NotAStabilizerError,
    ParameterRangeError,
    ParseError,
    ScopeError,
    ValidationError,
)
from .separable import (
    ControlledUnitary,
    Ensemble,
    EnsemblePurification,
    build_disentangler,
    decompose_two_party_stabilizer,
    disentangle,
    full_separation,
    purify_ensemble,
)
from .stabilizer import (
    StabilizerAlgebra,
    mixed_stabilizer_algebra,
    pure_stabilizer_algebra,
    stabilizer_algebra,
)
from .tensor_core import (
    DensityMatrix,
    LocalUnitary,
    PartitionSpec,
    PureState,
    merge_parties,
    minimal_purification,
    partial_trace,
)

__version__ = "0.1.0"
