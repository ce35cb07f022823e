"""State-vector simulation of quantum search with imperfect selective phase operators.

The core pieces are a dense-or-structured state vector with unitary
families, diagonal selective phase operators with reproducible noise, three
search engines (amplitude amplification, the phase-matched iterative step and
the recursive construction), and analog search Hamiltonians.
"""

from .errors import CapabilityError, ConfigError, DegenerateError, DimensionError, DivergenceError, SearchError
from .hamiltonian import SearchHamiltonian, build_hamiltonian, evolve, scan_target_probability
from .search import (
    RecursiveUnitary,
    RunTrajectory,
    build_T_step,
    compute_recursion_diagnostics,
    compute_subspace_frame,
    exponent_p,
    kappa_lower_bound,
    predict_iterative_queries,
    recursion_query_count,
    run_amplitude_amplification,
    run_iterative,
    run_recursive,
)
from .selective import (
    DiagonalPhaseOp,
    NoiseSpec,
    build_conjugated,
    build_selective_rotation,
    sample_perturbed_inversion,
    selective_inversion,
    selectivity_diagnostics,
)
from .statevector import (
    DenseUnitary,
    QubitProduct,
    StateVector,
    TargetSet,
    WalshHadamard,
    apply_unitary,
    apply_walsh_hadamard,
    fidelity,
    inner_product,
    target_projection,
)

__version__ = "0.1.0"

__all__ = [
    "CapabilityError",
    "ConfigError",
    "DegenerateError",
    "DenseUnitary",
    "DiagonalPhaseOp",
    "DimensionError",
    "DivergenceError",
    "NoiseSpec",
    "QubitProduct",
    "RecursiveUnitary",
    "RunTrajectory",
    "SearchError",
    "SearchHamiltonian",
    "StateVector",
    "TargetSet",
    "WalshHadamard",
    "apply_unitary",
    "apply_walsh_hadamard",
    "build_T_step",
    "build_conjugated",
    "build_hamiltonian",
    "build_selective_rotation",
    "compute_recursion_diagnostics",
    "compute_subspace_frame",
    "evolve",
    "exponent_p",
    "fidelity",
    "inner_product",
    "kappa_lower_bound",
    "predict_iterative_queries",
    "recursion_query_count",
    "run_amplitude_amplification",
    "run_iterative",
    "run_recursive",
    "sample_perturbed_inversion",
    "scan_target_probability",
    "selective_inversion",
    "selectivity_diagnostics",
    "target_projection",
]
