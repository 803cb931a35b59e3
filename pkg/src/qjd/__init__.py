"""Subspace eigensolvers with exact statevector quantum kernels.

Library layout:
  pauli         Pauli strings/sums, dense decompositions, the text format
  hamiltonians  dd matrices, the Ising chain, file loading, exact oracles
  states        reference-state constructors
  kernels       ancilla-register application, expectation and interference circuits
  subspace      orthonormal bases, projected eigenproblem, residuals
  sqdiag        sample-based reference refinement
  solvers       correction equations, preconditioners, the solver loop
  experiments   scenario configs, CSV/JSON reports
  cli           generate | run | compare | reproduce
"""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    DegenerateOperatorError,
    DegenerateOutcomeError,
    IllConditionedEpsilonError,
    NumericError,
    ParseError,
    QjdError,
    ShapeError,
    ValidationError,
)
from .hamiltonians import (
    DdMatrixSpec,
    IsingSpec,
    build_dd_matrix,
    build_ising,
    exact_ground_pair,
    is_diagonally_dominant,
    load_pauli_hamiltonian,
)
from .kernels import (
    LcuOutcome,
    apply_pauli_sum,
    expectation_pauli,
    expectation_sum,
    hadamard_test_re,
    lcu_apply,
    overlap_sum,
)
from .pauli import (
    PauliString,
    PauliSum,
    UnitaryCombination,
    decompose_hermitian,
    pauli_matrix,
    pauli_term_count,
    to_unitary_combination,
)
from .solvers import (
    ConvergenceTrace,
    PreconditionerKind,
    SolverConfig,
    SpectralCache,
    SqdiagFirstIteration,
    convergence_rate,
    gateaux_rayleigh_differential,
    jd_correction_diag,
    jd_correction_full,
    qd_correction,
    run_solver,
    shifted_inverse_apply,
    solve_correction_projected,
)
from .sqdiag import SqdiagResult, project_hamiltonian, sqdiag_refine, top_n_bases
from .states import (
    GaussianRefSpec,
    basis_state,
    gaussian_reference,
    hf_spread_reference,
)
from .subspace import (
    ConvergenceCriteria,
    RitzPair,
    Subspace,
    check_convergence,
    gram_schmidt_append,
    rayleigh_ritz,
    residual,
)
