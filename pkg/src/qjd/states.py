"""Reference-state constructors seeding the subspace solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

#: default Gaussian width in basis-index units (CLI-overridable)
DEFAULT_SIGMA = 2.0

NORM_TOL = 1e-12


@dataclass(frozen=True)
class GaussianRefSpec:
    """Multi-peak Gaussian amplitude profile over basis indices.

    The number of peaks is len(centers); there is no wraparound, amplitudes
    simply truncate at the index bounds.
    """

    n_qubits: int
    centers: tuple[int, ...]
    sigma: float = DEFAULT_SIGMA

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(self.centers))
        if self.sigma <= 0:
            raise ValidationError("sigma must be positive")
        if not self.centers:
            raise ValidationError("at least one peak center required")
        dim = 1 << self.n_qubits
        for c in self.centers:
            if not 0 <= c < dim:
                raise ValidationError(f"center {c} outside [0, {dim})")


def normalize(v: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValidationError("cannot normalize the zero vector")
    return v / nrm


def gaussian_reference(spec: GaussianRefSpec) -> np.ndarray:
    """Amplitude at index j is sum_c exp(-(j-c)^2 / (2 sigma^2)), normalized."""
    j = np.arange(1 << spec.n_qubits, dtype=float)
    amp = np.zeros_like(j)
    for c in spec.centers:
        amp += np.exp(-((j - c) ** 2) / (2.0 * spec.sigma**2))
    return normalize(amp).astype(complex)


def bitstring_index(bitstring: str) -> int:
    """Basis index of a bitstring, leftmost character = most significant bit."""
    if not bitstring or set(bitstring) - {"0", "1"}:
        raise ValidationError(f"invalid bitstring {bitstring!r}")
    return int(bitstring, 2)


def hf_spread_reference(bitstring: str, spread_fraction: float) -> np.ndarray:
    """Basis state with probability weight spread to its index neighbors.

    Weight 1 - f stays on the bitstring's index and f/2 goes to each of
    index-1 and index+1; at the index range boundary the missing neighbor's
    weight is dropped and the rest renormalized.  Amplitudes are the
    nonnegative square roots.
    """
    if not 0.0 <= spread_fraction < 1.0:
        raise ValidationError("spread_fraction must lie in [0, 1)")
    n = len(bitstring)
    center = bitstring_index(bitstring)
    dim = 1 << n
    weights = np.zeros(dim)
    weights[center] = 1.0 - spread_fraction
    for nb in (center - 1, center + 1):
        if 0 <= nb < dim:
            weights[nb] = spread_fraction / 2.0
    weights /= weights.sum()
    return np.sqrt(weights).astype(complex)


def basis_state(index: int, n_qubits: int) -> np.ndarray:
    dim = 1 << n_qubits
    if not 0 <= index < dim:
        raise ValidationError(f"basis index {index} outside [0, {dim})")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v
