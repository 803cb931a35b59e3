"""The solver family: Jacobi-Davidson corrections with full or diagonal
shifted-inverse preconditioners, the residue-driven baseline, and the loop
that grows the search subspace until convergence.

Correction equations.  With Ritz pair (E', |rv>) and residual r, the
orthogonal-direction solution of the projected correction equation is

    t = eps (H - E' I)^-1 |rv>  -  (H - E' I)^-1 |r>,
    eps = <rv|(H - E' I)^-1|r> / <rv|(H - E' I)^-1|rv>,

and its cheap variant replaces the shifted inverse by the inverse of
M = Diag(H) - E' I.  Because (H - E' I)^-1 r = rv identically, the numerator
equals <rv|rv> = 1 whenever the inverse is exact, so the quantum route only
measures the denominator (eps = 1 / <rv|(H-E' I)^-1|rv>) and applies the
combination through the ancilla-register kernel.

Shifted inverses are regularized with a spectral floor: eigenvalue gaps
smaller than delta are replaced by sign(gap) * delta, which keeps the
invariant subspace structure that the Newton-equivalence check relies on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    CapacityError,
    IllConditionedEpsilonError,
    ValidationError,
)
from .hamiltonians import (
    MAX_DENSE_DIM,
    apply_operator,
    diagonal_of,
    n_qubits_of,
    to_dense,
)
from .kernels import expectation_sum, lcu_apply_unnormalized, overlap_sum
from .pauli import (
    DROP_TOL,
    PauliSum,
    decompose_hermitian,
    dense_pauli_term_count,
    diagonal_pauli_sum,
    pauli_term_count,
)
from .sqdiag import sqdiag_refine
from .subspace import (
    ConvergenceCheck,
    ConvergenceCriteria,
    ProjectedProblem,
    RitzPair,
    Subspace,
    check_convergence,
    gram_schmidt_append,
    residual,
)
from .states import normalize

DEFAULT_DELTA = 1e-8
EPSILON_DENOMINATOR_FLOOR = 1e-14


class PreconditionerKind(str, enum.Enum):
    FULL_SHIFTED_INVERSE = "full"
    DIAGONAL_SHIFTED_INVERSE = "diag"
    RESIDUE_IDENTITY = "residue"


class SpectralCache:
    """Eigendecomposition of H, computed once and shared across iterations
    and across concurrent runs (immutable after construction)."""

    def __init__(self, h):
        m = to_dense(h)
        if m.shape[0] > MAX_DENSE_DIM:
            raise CapacityError(f"dense spectral cache capped at dim {MAX_DENSE_DIM}")
        if np.iscomplexobj(m) and np.abs(m.imag).max(initial=0.0) == 0.0:
            m = m.real
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(m)
        self.dim = m.shape[0]

    def ground_pair(self) -> tuple[float, np.ndarray]:
        return float(self.eigenvalues[0]), self.eigenvectors[:, 0].astype(complex)

    def _gaps(self, shift: float, delta: float) -> np.ndarray:
        g = self.eigenvalues - shift
        sign = np.where(g >= 0, 1.0, -1.0)
        return np.where(np.abs(g) < delta, sign * delta, g)

    def apply_shifted_inverse(self, shift: float, x: np.ndarray, delta: float) -> np.ndarray:
        coords = self.eigenvectors.conj().T @ x
        coords /= self._gaps(shift, delta)
        return self.eigenvectors @ coords

    def shifted_inverse_matrix(self, shift: float, delta: float) -> np.ndarray:
        g = self._gaps(shift, delta)
        return (self.eigenvectors / g) @ self.eigenvectors.conj().T


def shifted_inverse_apply(h, shift: float, x: np.ndarray, delta: float = DEFAULT_DELTA,
                          spectral: SpectralCache | None = None) -> np.ndarray:
    """(H - shift I)^-1 x with the spectral-floor regularization."""
    cache = spectral if spectral is not None else SpectralCache(h)
    return cache.apply_shifted_inverse(shift, x, delta)


def _floored_diagonal_shift(diag: np.ndarray, shift: float, delta: float) -> np.ndarray:
    m = diag - shift
    sign = np.where(m >= 0, 1.0, -1.0)
    return np.where(np.abs(m) < delta, sign * delta, m)


def _guard_denominator(value: float) -> None:
    if abs(value) < EPSILON_DENOMINATOR_FLOOR:
        raise IllConditionedEpsilonError(
            f"correction-scale denominator {value:.3e} below "
            f"{EPSILON_DENOMINATOR_FLOOR:.0e}"
        )


def jd_correction_full(h, pair: RitzPair, r: np.ndarray, delta: float = DEFAULT_DELTA,
                       spectral: SpectralCache | None = None,
                       quantum_kernels: bool = False,
                       simplified_epsilon: bool | None = None) -> np.ndarray:
    """Correction with the full shifted-inverse preconditioner.

    Direct route: both inverse applications by the cached eigendecomposition,
    eps as the explicit ratio (or its simplified reciprocal form).  Kernel
    route: the denominator is measured as a Pauli-decomposed expectation, eps
    uses the simplified form, and t is produced by the ancilla-register
    application of eps (H - E' I)^-1 - I to the Ritz vector.
    """
    cache = spectral if spectral is not None else SpectralCache(h)
    rv, shift = pair.vector, pair.value
    if quantum_kernels:
        b_sum = decompose_hermitian(cache.shifted_inverse_matrix(shift, delta))
        den = expectation_sum(b_sum, rv)
        _guard_denominator(den)
        a_sum = b_sum.scaled(1.0 / den).with_identity_added(-1.0)
        return lcu_apply_unnormalized(a_sum, rv)
    b_rv = cache.apply_shifted_inverse(shift, rv, delta)
    b_r = cache.apply_shifted_inverse(shift, r, delta)
    den = float(np.vdot(rv, b_rv).real)
    _guard_denominator(den)
    if simplified_epsilon:
        eps = 1.0 / den
    else:
        eps = np.vdot(rv, b_r) / den
    return eps * b_rv - b_r


def jd_correction_diag(h, pair: RitzPair, r: np.ndarray, delta: float = DEFAULT_DELTA,
                       diag: np.ndarray | None = None,
                       quantum_kernels: bool = False,
                       real_epsilon: bool | None = None) -> np.ndarray:
    """Correction with the diagonal preconditioner M = Diag(H) - E' I.

    Kernel route: the eps numerator Re<rv|M^-1|r> comes from per-term
    interference tests, the denominator from the expectation circuit, and the
    two M^-1 applications from the ancilla-register kernel.
    """
    d = diag if diag is not None else diagonal_of(h)
    rv, shift = pair.vector, pair.value
    m = _floored_diagonal_shift(d, shift, delta)
    minv = 1.0 / m
    if quantum_kernels:
        m_sum = diagonal_pauli_sum(minv)
        num = overlap_sum(m_sum, rv, r)
        den = expectation_sum(m_sum, rv)
        _guard_denominator(den)
        eps = num / den
        m_rv = lcu_apply_unnormalized(m_sum, rv)
        rn = float(np.linalg.norm(r))
        m_r = rn * lcu_apply_unnormalized(m_sum, r / rn) if rn > 0 else np.zeros_like(r)
        return eps * m_rv - m_r
    m_rv = minv * rv
    m_r = minv * r
    den = float(np.vdot(rv, m_rv).real)
    _guard_denominator(den)
    num = np.vdot(rv, m_r)
    if real_epsilon:
        num = num.real
    return (num / den) * m_rv - m_r


def qd_correction(h, pair: RitzPair, r: np.ndarray, kind: PreconditionerKind,
                  delta: float = DEFAULT_DELTA,
                  spectral: SpectralCache | None = None,
                  diag: np.ndarray | None = None,
                  quantum_kernels: bool = False) -> np.ndarray:
    """Davidson-style corrections without the orthogonality term.

    The residue kind returns r itself; the diagonal kind preconditions it
    entrywise.  The full kind applies the regularized shifted inverse, which
    for an exact inverse reproduces the Ritz vector and is therefore rejected
    by the subsequent orthogonalization (the run stagnates); it is kept for
    completeness and the discrepancy is documented rather than hidden.
    """
    if kind is PreconditionerKind.RESIDUE_IDENTITY:
        return r.copy()
    if kind is PreconditionerKind.DIAGONAL_SHIFTED_INVERSE:
        d = diag if diag is not None else diagonal_of(h)
        minv = 1.0 / _floored_diagonal_shift(d, pair.value, delta)
        if quantum_kernels:
            m_sum = diagonal_pauli_sum(minv)
            rn = float(np.linalg.norm(r))
            if rn == 0.0:
                return np.zeros_like(r)
            return rn * lcu_apply_unnormalized(m_sum, r / rn)
        return minv * r
    cache = spectral if spectral is not None else SpectralCache(h)
    if quantum_kernels:
        b_sum = decompose_hermitian(cache.shifted_inverse_matrix(pair.value, delta))
        rn = float(np.linalg.norm(r))
        if rn == 0.0:
            return np.zeros_like(r)
        return rn * lcu_apply_unnormalized(b_sum, r / rn)
    return cache.apply_shifted_inverse(pair.value, r, delta)


@dataclass(frozen=True)
class ProjectedSolve:
    vector: np.ndarray
    equation_residual: float
    rank_deficient: bool


def solve_correction_projected(h, pair: RitzPair, r: np.ndarray) -> ProjectedSolve:
    """Exact least-squares solution of the projected correction equation.

    Solves (I - |rv><rv|)(H - E' I)(I - |rv><rv|) t = -r on the orthogonal
    complement of the Ritz vector; used as the Newton-equivalence oracle at
    validation scale (dim <= 1024).
    """
    dense = to_dense(h)
    dim = dense.shape[0]
    if dim > 1 << 10:
        raise CapacityError("projected correction solve capped at dim 1024")
    rv = pair.vector
    q = scipy.linalg.null_space(rv.conj()[None, :])  # dim x (dim-1), orthonormal
    a = q.conj().T @ (dense - pair.value * np.eye(dim)) @ q
    rhs = -(q.conj().T @ r)
    y, _, rank, _ = np.linalg.lstsq(a, rhs, rcond=None)
    t = q @ y
    eq_res = float(np.linalg.norm(a @ y - rhs))
    return ProjectedSolve(t, eq_res, rank < dim - 1)


def gateaux_rayleigh_differential(h, x: np.ndarray, xp: np.ndarray) -> float:
    """Directional differential of the Rayleigh quotient at unit x: 2 Re<x'|H|x>."""
    return float(2.0 * np.vdot(xp, apply_operator(h, x)).real)


# ---------------------------------------------------------------------------
# solver loop


@dataclass(frozen=True)
class SqdiagFirstIteration:
    """Reference-state refinement applied once, before the first projection."""

    n: int = 3
    mode: str = "exact"  # or "shots"
    shots: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("refinement needs n >= 1 basis states")
        if self.mode not in ("exact", "shots"):
            raise ValidationError(f"unknown refinement mode {self.mode!r}")
        if self.mode == "shots" and (self.shots is None or self.shots < 1):
            raise ValidationError("shots mode requires a positive shot count")


@dataclass(frozen=True)
class SolverConfig:
    method: str  # "jd" | "qjd" | "qd"
    preconditioner: PreconditionerKind
    use_quantum_kernels: bool = False
    sqdiag_first_iteration: SqdiagFirstIteration | None = None
    max_iterations: int = 300
    residual_tol: float | None = None
    energy_tol: float | None = 1e-10
    delta: float = DEFAULT_DELTA
    reject_tol: float = 1e-8
    count_pauli_terms: bool = True

    def __post_init__(self):
        if self.method not in ("jd", "qjd", "qd"):
            raise ValidationError(f"unknown method {self.method!r}")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if self.method in ("jd", "qjd") and self.preconditioner is PreconditionerKind.RESIDUE_IDENTITY:
            raise ValidationError("Jacobi-Davidson corrections need an invertible preconditioner")
        if self.method == "jd" and self.use_quantum_kernels:
            raise ValidationError("the classical method does not use quantum kernels")
        if self.delta <= 0 or self.reject_tol <= 0:
            raise ValidationError("delta and reject_tol must be positive")
        # raises if neither criterion is set or a tolerance is non-positive
        ConvergenceCriteria(self.residual_tol, self.energy_tol)

    @property
    def criteria(self) -> ConvergenceCriteria:
        return ConvergenceCriteria(self.residual_tol, self.energy_tol)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    ritz_value: float
    energy_error: float | None
    residual_norm: float
    subspace_dim: int
    cumulative_pauli_terms: int
    rejected: bool
    epsilon_fallback: bool


@dataclass
class ConvergenceTrace:
    records: list[IterationRecord]
    status: str  # converged-by-residual | converged-by-energy | stagnated | max-iterations
    sqdiag_event: dict | None
    accounting_rule: str

    @property
    def converged(self) -> bool:
        return self.status.startswith("converged")

    @property
    def iterations_to_convergence(self) -> int | None:
        return self.records[-1].iteration if self.converged else None

    @property
    def ritz_values(self) -> list[float]:
        return [rec.ritz_value for rec in self.records]


#: documented Pauli-measurement accounting, echoed in run manifests
ACCOUNTING_RULE = (
    "qd: term count of H once per projection solve; "
    "qjd-full: term count of the regularized shifted inverse once per computed "
    "correction; qjd-diag: twice the term count of the inverted diagonal "
    "preconditioner per computed correction; jd: none (classical); coherent "
    "ancilla-register applications are not counted as measurements"
)


def _operator_term_count(h) -> int:
    if isinstance(h, PauliSum):
        return pauli_term_count(h, DROP_TOL)
    return dense_pauli_term_count(to_dense(h), DROP_TOL)


def run_solver(h, reference: np.ndarray, config: SolverConfig,
               oracle: tuple[float, np.ndarray] | None = None,
               spectral: SpectralCache | None = None) -> tuple[RitzPair, ConvergenceTrace]:
    """Grow the search subspace from the reference state until convergence.

    Each iteration solves the projected problem, checks the convergence
    criteria, computes the configured correction vector, and appends its
    orthogonalized remainder.  Every exit path (converged, stagnated on a
    rejected correction, iteration budget) yields a trace with a terminal
    status.  The returned pair carries the best Ritz value seen, so a late
    stagnation never degrades the reported energy.
    """
    n = n_qubits_of(h)
    ref = normalize(np.asarray(reference, dtype=complex))
    if ref.shape[0] != (1 << n):
        raise ValidationError("reference state does not match the operator size")

    sqdiag_event = None
    if config.sqdiag_first_iteration is not None:
        sq = config.sqdiag_first_iteration
        result = sqdiag_refine(h, ref, sq.n, sq.mode, shots=sq.shots, seed=sq.seed)
        ref = result.refined_state
        sqdiag_event = {
            "n": sq.n,
            "mode": sq.mode,
            "shots": sq.shots,
            "seed": sq.seed,
            "selected_indices": list(result.selected_indices),
            "reduced_energy": result.reduced_energy,
            "shortfall": result.shortfall,
        }

    needs_spectral = config.preconditioner is PreconditionerKind.FULL_SHIFTED_INVERSE
    if needs_spectral and spectral is None:
        spectral = SpectralCache(h)
    diag = (
        diagonal_of(h)
        if config.preconditioner is PreconditionerKind.DIAGONAL_SHIFTED_INVERSE
        else None
    )
    oracle_energy = oracle[0] if oracle is not None else None
    counting = config.count_pauli_terms
    h_count = _operator_term_count(h) if (counting and config.method == "qd") else 0

    subspace = Subspace.initial(ref)
    problem = ProjectedProblem(h)
    problem.append(subspace.vectors[0])

    records: list[IterationRecord] = []
    status = "max-iterations"
    cumulative = 0
    best: RitzPair | None = None

    for it in range(1, config.max_iterations + 1):
        pair = problem.lowest_pair()
        r = residual(h, pair)
        r_norm = float(np.linalg.norm(r))
        err = abs(pair.value - oracle_energy) if oracle_energy is not None else None
        if best is None or pair.value < best.value:
            best = pair

        if counting and config.method == "qd":
            cumulative += h_count

        check = check_convergence(r, pair, oracle_energy, config.criteria)
        if check.converged:
            records.append(IterationRecord(
                it, pair.value, err, r_norm, subspace.dimension, cumulative,
                rejected=False, epsilon_fallback=False,
            ))
            status = f"converged-by-{check.criterion}"
            break

        fallback = False
        try:
            t, corr_count = _correction_with_count(
                h, pair, r, config, spectral, diag, counting
            )
        except IllConditionedEpsilonError:
            # the denominator was measured before failing; its cost stands
            t = r.copy()
            corr_count = _measured_count_on_failure(config, spectral, pair, counting, diag)
            fallback = True
        cumulative += corr_count

        subspace_after, accepted = gram_schmidt_append(subspace, t, config.reject_tol)
        records.append(IterationRecord(
            it, pair.value, err, r_norm, subspace.dimension, cumulative,
            rejected=not accepted, epsilon_fallback=fallback,
        ))
        if not accepted:
            status = "stagnated"
            break
        subspace = subspace_after
        problem.append(subspace.vectors[-1])

    trace = ConvergenceTrace(
        records=records,
        status=status,
        sqdiag_event=sqdiag_event,
        accounting_rule=ACCOUNTING_RULE if counting else "disabled",
    )
    return best, trace


def _correction_with_count(h, pair, r, config: SolverConfig,
                           spectral: SpectralCache | None,
                           diag: np.ndarray | None,
                           counting: bool) -> tuple[np.ndarray, int]:
    kind = config.preconditioner
    kernels = config.use_quantum_kernels
    count = 0
    if config.method == "qd":
        t = qd_correction(h, pair, r, kind, config.delta, spectral, diag, kernels)
        return t, count
    if kind is PreconditionerKind.FULL_SHIFTED_INVERSE:
        if counting and config.method == "qjd":
            count = dense_pauli_term_count(
                spectral.shifted_inverse_matrix(pair.value, config.delta), DROP_TOL
            )
        t = jd_correction_full(
            h, pair, r, config.delta, spectral,
            quantum_kernels=kernels,
            simplified_epsilon=(config.method == "qjd"),
        )
        return t, count
    if counting and config.method == "qjd":
        m = _floored_diagonal_shift(diag, pair.value, config.delta)
        count = 2 * pauli_term_count(diagonal_pauli_sum(1.0 / m), 0.0)
    t = jd_correction_diag(
        h, pair, r, config.delta, diag,
        quantum_kernels=kernels,
        real_epsilon=(config.method == "qjd"),
    )
    return t, count


def _measured_count_on_failure(config: SolverConfig, spectral, pair, counting, diag) -> int:
    if not counting or config.method != "qjd":
        return 0
    if config.preconditioner is PreconditionerKind.FULL_SHIFTED_INVERSE:
        return dense_pauli_term_count(
            spectral.shifted_inverse_matrix(pair.value, config.delta), DROP_TOL
        )
    m = _floored_diagonal_shift(diag, pair.value, config.delta)
    return 2 * pauli_term_count(diagonal_pauli_sum(1.0 / m), 0.0)


def convergence_rate(trace: ConvergenceTrace, oracle_energy: float) -> list[float]:
    """Per-iteration error ratio |E_i - E0| / |E_{i-1} - E0|.

    Entries whose denominator is below 1e-15 are reported as 0: once the
    solution is found the rate pins to zero rather than dividing noise.
    """
    if len(trace.records) < 2:
        raise ValidationError("convergence rate needs at least two iterations")
    errors = [abs(rec.ritz_value - oracle_energy) for rec in trace.records]
    rates = []
    for prev, cur in zip(errors, errors[1:]):
        rates.append(0.0 if prev < 1e-15 else cur / prev)
    return rates
