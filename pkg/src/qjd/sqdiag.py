"""Sample-based diagonalization: project H onto the most probable
computational-basis states of a statevector and solve the reduced problem.

Used to boost reference states before the first solver iteration.  The
overlap matrix of distinct basis states is the identity, so the reduced
problem is an ordinary (not generalized) eigenproblem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import ValidationError
from .hamiltonians import n_qubits_of, to_dense
from .pauli import PauliSum, _label_masks, _parity_signs


@dataclass(frozen=True)
class SqdiagResult:
    selected_indices: tuple[int, ...]
    reduced_matrix: np.ndarray
    reduced_energy: float
    reduced_coefficients: np.ndarray
    refined_state: np.ndarray
    shortfall: bool  # shots mode observed fewer distinct outcomes than requested


def top_n_bases(v: np.ndarray, n: int, mode: str = "exact",
                shots: int | None = None, seed: int | None = None):
    """Indices of the n most probable basis states, ties broken ascending.

    In shots mode, basis outcomes are sampled from |amplitude|^2 with the
    seeded splitmix64 stream and ranked by observed frequency; if fewer than
    n distinct outcomes appear, the shorter list is returned with a flag.
    """
    probs = np.abs(np.asarray(v)) ** 2
    dim = probs.shape[0]
    if not 1 <= n <= dim:
        raise ValidationError(f"n={n} outside [1, {dim}]")
    if mode == "exact":
        order = np.lexsort((np.arange(dim), -probs))
        return [int(i) for i in order[:n]], False
    if mode != "shots":
        raise ValidationError(f"unknown mode {mode!r}")
    if not shots or shots < 1:
        raise ValidationError("shots mode requires a positive shot count")
    u = rng.uniform_stream(0 if seed is None else seed, shots)
    cdf = np.cumsum(probs)
    cdf[-1] = max(cdf[-1], 1.0)  # guard the top edge against rounding
    outcomes = np.searchsorted(cdf, u, side="right")
    freq = np.bincount(outcomes, minlength=dim)
    order = np.lexsort((np.arange(dim), -freq))
    observed = int(np.count_nonzero(freq))
    take = min(n, observed)
    return [int(i) for i in order[:take]], take < n


def project_hamiltonian(h, indices) -> np.ndarray:
    """Reduced matrix with entries <e_i|H|e_j> over the selected indices."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        raise ValidationError("selected indices must be distinct")
    if isinstance(h, PauliSum):
        n = h.n_qubits
        pos = {j: k for k, j in enumerate(idx)}
        out = np.zeros((len(idx), len(idx)), dtype=complex)
        for label, c in zip(h.labels, h.coefficients):
            flip, yz, ny = _label_masks(label)
            signs = _parity_signs(n, yz)
            for l, j in enumerate(idx):
                k = pos.get(j ^ flip)
                if k is not None:
                    out[k, l] += c * (1j**ny) * signs[j]
        return out
    dense = to_dense(h)
    return dense[np.ix_(idx, idx)].astype(complex)


def sqdiag_refine(h, v: np.ndarray, n: int, mode: str = "exact",
                  shots: int | None = None, seed: int | None = None) -> SqdiagResult:
    """Refined state supported on the n dominant basis states of v.

    The reduced ground eigenvector is lifted back with a fixed global phase:
    the largest-magnitude coefficient is made real positive.
    """
    if v.shape[0] != (1 << n_qubits_of(h)):
        raise ValidationError("state dimension does not match the operator")
    indices, shortfall = top_n_bases(v, n, mode, shots=shots, seed=seed)
    reduced = project_hamiltonian(h, indices)
    vals, vecs = np.linalg.eigh((reduced + reduced.conj().T) / 2)
    coeffs = vecs[:, 0]
    lead = coeffs[int(np.argmax(np.abs(coeffs)))]
    if abs(lead) > 0:
        coeffs = coeffs * (np.conj(lead) / abs(lead))
    refined = np.zeros_like(np.asarray(v, dtype=complex))
    refined[indices] = coeffs
    refined /= np.linalg.norm(refined)
    return SqdiagResult(
        selected_indices=tuple(indices),
        reduced_matrix=reduced,
        reduced_energy=float(vals[0]),
        reduced_coefficients=coeffs,
        refined_state=refined,
        shortfall=shortfall,
    )
