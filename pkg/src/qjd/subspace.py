"""Rayleigh-Ritz machinery shared by all solvers: orthonormal subspace
maintenance, the projected eigenproblem, residuals, and convergence checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError
from .hamiltonians import apply_operator, n_qubits_of
from .states import normalize

ORTHONORMALITY_TOL = 1e-10
DEFAULT_REJECT_TOL = 1e-8
PROJECTED_HERMITICITY_TOL = 1e-8


class Subspace:
    """Ordered orthonormal basis, stored as rows of a (k, dim) array.

    Treated as a value: append returns a new Subspace.  A solver run owns its
    subspace exclusively.
    """

    def __init__(self, vectors: np.ndarray, n_qubits: int):
        self.vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
        self.n_qubits = n_qubits
        if self.vectors.shape[1] != (1 << n_qubits):
            raise ValidationError("basis vector length does not match qubit count")

    @classmethod
    def initial(cls, v: np.ndarray) -> "Subspace":
        n = (v.shape[0]).bit_length() - 1
        return cls(normalize(v)[None, :], n)

    @property
    def dimension(self) -> int:
        return self.vectors.shape[0]

    def gram_deviation(self) -> float:
        g = self.vectors.conj() @ self.vectors.T
        return float(np.abs(g - np.eye(self.dimension)).max())


def gram_schmidt_append(
    v: Subspace, t: np.ndarray, reject_tol: float = DEFAULT_REJECT_TOL
) -> tuple[Subspace, bool]:
    """Orthogonalize t against the basis twice, normalize, and append.

    Classical Gram-Schmidt applied twice ("twice is enough") keeps the basis
    orthonormal at large subspace dimensions where a single pass fails its own
    Galerkin test.  If the orthogonalized remainder is smaller than
    reject_tol * |t| the vector is rejected and the subspace returned
    unchanged with a False flag.
    """
    t = np.asarray(t, dtype=complex)
    if not np.all(np.isfinite(t.view(float))):
        raise NumericError("correction vector contains non-finite entries")
    t_norm = float(np.linalg.norm(t))
    if t_norm == 0.0:
        return v, False
    w = t.copy()
    for _ in range(2):
        w = w - v.vectors.T @ (v.vectors.conj() @ w)
    w_norm = float(np.linalg.norm(w))
    if w_norm < reject_tol * t_norm:
        return v, False
    new = np.vstack([v.vectors, w[None, :] / w_norm])
    return Subspace(new, v.n_qubits), True


@dataclass
class RitzPair:
    """Lowest projected eigenpair lifted to the full space."""

    value: float
    vector: np.ndarray
    subspace_coords: np.ndarray


class ProjectedProblem:
    """Incrementally maintained projected matrix <v_i|H|v_j>.

    Appending a basis vector computes one new row/column; the projected
    matrix is mathematically identical to rebuilding it from scratch.
    """

    def __init__(self, h):
        self.h = h
        self.n_qubits = n_qubits_of(h)
        self.basis: list[np.ndarray] = []
        self.h_basis: list[np.ndarray] = []
        self.matrix = np.zeros((0, 0), dtype=complex)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def append(self, v: np.ndarray) -> None:
        hv = apply_operator(self.h, v)
        k = self.dimension
        new = np.zeros((k + 1, k + 1), dtype=complex)
        new[:k, :k] = self.matrix
        for i, b in enumerate(self.basis):
            new[i, k] = np.vdot(b, hv)
            new[k, i] = np.conj(new[i, k])
        new[k, k] = np.vdot(v, hv)
        self.basis.append(v)
        self.h_basis.append(hv)
        self.matrix = new

    def lowest_pair(self) -> RitzPair:
        k = self.dimension
        if k == 0:
            raise ValidationError("empty subspace")
        dev = float(np.abs(self.matrix - self.matrix.conj().T).max())
        if dev > PROJECTED_HERMITICITY_TOL:
            raise NumericError(
                f"projected matrix lost Hermiticity ({dev:.3e}); "
                "subspace orthonormality is broken upstream"
            )
        hm = (self.matrix + self.matrix.conj().T) / 2
        vals, vecs = np.linalg.eigh(hm)
        coords = vecs[:, 0]
        rv = np.zeros_like(self.basis[0])
        for c, b in zip(coords, self.basis):
            rv += c * b
        rv = normalize(rv)
        return RitzPair(float(vals[0]), rv, coords)


def rayleigh_ritz(h, v: Subspace) -> RitzPair:
    """Project H onto the subspace, solve the dense Hermitian eigenproblem,
    and lift the lowest eigenpair."""
    if v.dimension == 0:
        raise ValidationError("empty subspace")
    if v.gram_deviation() > ORTHONORMALITY_TOL:
        raise NumericError("subspace basis is not orthonormal")
    proj = ProjectedProblem(h)
    for row in v.vectors:
        proj.append(row)
    return proj.lowest_pair()


def residual(h, pair: RitzPair) -> np.ndarray:
    """r = (H - E' I) |rv>; orthogonal to the search space by Galerkin."""
    return apply_operator(h, pair.vector) - pair.value * pair.vector


@dataclass(frozen=True)
class ConvergenceCriteria:
    """Residual-norm and/or energy-error thresholds; at least one required."""

    residual_tol: float | None = None
    energy_tol: float | None = None

    def __post_init__(self):
        if self.residual_tol is None and self.energy_tol is None:
            raise ValidationError("at least one convergence criterion required")
        for tol in (self.residual_tol, self.energy_tol):
            if tol is not None and tol <= 0:
                raise ValidationError("tolerances must be positive")


@dataclass(frozen=True)
class ConvergenceCheck:
    converged: bool
    criterion: str | None  # "residual" or "energy" when converged


def check_convergence(
    r: np.ndarray,
    pair: RitzPair,
    oracle_energy: float | None,
    criteria: ConvergenceCriteria,
) -> ConvergenceCheck:
    if criteria.residual_tol is not None:
        if float(np.linalg.norm(r)) <= criteria.residual_tol:
            return ConvergenceCheck(True, "residual")
    if criteria.energy_tol is not None and oracle_energy is not None:
        if abs(pair.value - oracle_energy) <= criteria.energy_tol:
            return ConvergenceCheck(True, "energy")
    return ConvergenceCheck(False, None)
