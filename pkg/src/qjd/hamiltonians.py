"""Experiment Hamiltonians: dd random matrices, the transverse-field Ising
chain, and Pauli-sum files, plus dense exact-diagonalization oracles.

Operators are passed around either as dense ndarrays (dd matrices) or as
:class:`~qjd.pauli.PauliSum` (Ising, molecular files); the small dispatch
helpers at the bottom let the solver layers accept both.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import CapacityError, ParseError, ShapeError, ValidationError
from .pauli import PauliSum, parse_pauli_text

#: paper-scale default for dd off-diagonals
DD_OFF_DIAG_SCALE = 1.0 / 256.0
DD_DEFAULT_SEED = 20240101

DENSE_MAGIC = b"QJDM"

#: dense eigensolver capacity guard (2**12)
MAX_DENSE_DIM = 4096


@dataclass(frozen=True)
class DdMatrixSpec:
    """Diagonally dominant random-matrix family.

    Diagonal entries are 1-based indices, except the ``minima_positions``
    which are set to 1; the strict upper triangle is drawn uniformly from
    [0, off_diag_scale] in row-major order from a splitmix64 stream.
    """

    n_qubits: int
    ns: int
    minima_positions: tuple[int, ...]
    off_diag_scale: float = DD_OFF_DIAG_SCALE
    seed: int = DD_DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, "minima_positions", tuple(self.minima_positions))
        if self.n_qubits < 1:
            raise ValidationError("n_qubits must be positive")
        dim = 1 << self.n_qubits
        if len(self.minima_positions) != self.ns:
            raise ValidationError(
                f"ns={self.ns} but {len(self.minima_positions)} minima positions given"
            )
        if len(set(self.minima_positions)) != self.ns:
            raise ValidationError("minima positions must be distinct")
        for p in self.minima_positions:
            if not 1 <= p <= dim:
                raise ValidationError(f"minimum position {p} outside [1, {dim}]")


@dataclass(frozen=True)
class IsingSpec:
    """Periodic 1-D transverse-field Ising chain.

    H = -J sum_i Z_i Z_{i+1} - h sum_i Z_i - g sum_i X_i with site n+1
    identified with site 1.  Energies are dimensionless.
    """

    n_sites: int
    J: float = 1.1
    h: float = 0.9
    g: float = 0.01

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValidationError("Ising chain needs at least 2 sites")


def build_dd_matrix(spec: DdMatrixSpec) -> np.ndarray:
    """Real symmetric dd matrix; identical spec gives a bit-identical matrix."""
    dim = 1 << spec.n_qubits
    diag = np.arange(1, dim + 1, dtype=float)
    diag[[p - 1 for p in spec.minima_positions]] = 1.0
    h = np.zeros((dim, dim))
    np.fill_diagonal(h, diag)
    draws = rng.uniform_stream(spec.seed, dim * (dim - 1) // 2) * spec.off_diag_scale
    iu = np.triu_indices(dim, k=1)  # row-major order of the strict upper triangle
    h[iu] = draws
    h[iu[1], iu[0]] = draws
    return h


def build_ising(spec: IsingSpec) -> PauliSum:
    """Pauli-sum form of the Ising chain; 3n terms for n >= 3.

    For n = 2 the periodic sum visits the bond twice, so the two ZZ terms
    merge into one with coefficient -2J (5 distinct terms).
    """
    n = spec.n_sites
    terms: list[tuple[str, complex]] = []

    def site_label(letter_by_site: dict[int, str]) -> str:
        return "".join(letter_by_site.get(i, "I") for i in range(1, n + 1))

    for i in range(1, n + 1):
        j = i % n + 1
        terms.append((site_label({i: "Z", j: "Z"}), -spec.J))
    for i in range(1, n + 1):
        terms.append((site_label({i: "Z"}), -spec.h))
    for i in range(1, n + 1):
        terms.append((site_label({i: "X"}), -spec.g))
    return PauliSum(terms, n)


def load_pauli_hamiltonian(path) -> PauliSum:
    """Read a Pauli-sum text file; merged coefficients must be real (1e-10)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    terms = parse_pauli_text(text)
    if not terms:
        raise ParseError(f"no Pauli terms found in {path}")
    ps = PauliSum(terms)
    if not ps.is_hermitian(1e-10):
        worst = float(np.abs(ps.coefficients.imag).max())
        raise ValidationError(
            f"{path}: merged coefficients are not real (max |Im| = {worst:.3e})"
        )
    return ps


def save_pauli_hamiltonian(ps: PauliSum, path) -> None:
    from .pauli import format_pauli_text

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# pauli-sum, {ps.n_qubits} qubits, {len(ps)} terms\n")
        fh.write(format_pauli_text(ps))


def write_dense_matrix(m: np.ndarray, path) -> None:
    """Binary dense format: magic QJDM, u32 dim (LE), row-major f64 (LE)."""
    m = np.asarray(m)
    if np.iscomplexobj(m):
        if np.abs(m.imag).max(initial=0.0) > 0.0:
            raise ValidationError("dense binary format stores real matrices only")
        m = m.real
    dim = m.shape[0]
    with open(path, "wb") as fh:
        fh.write(DENSE_MAGIC)
        fh.write(struct.pack("<I", dim))
        fh.write(np.ascontiguousarray(m, dtype="<f8").tobytes())


def read_dense_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != DENSE_MAGIC:
            raise ParseError(f"{path}: bad magic {magic!r}, expected {DENSE_MAGIC!r}")
        (dim,) = struct.unpack("<I", fh.read(4))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != dim * dim:
        raise ParseError(f"{path}: expected {dim * dim} doubles, found {data.size}")
    return data.reshape(dim, dim).astype(float)


def is_diagonally_dominant(m: np.ndarray) -> bool:
    m = np.asarray(m)
    absm = np.abs(m)
    diag = np.diag(absm)
    return bool(np.all(diag >= absm.sum(axis=1) - diag))


def exact_ground_pair(h) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and unit eigenvector by dense diagonalization."""
    if (1 << n_qubits_of(h)) > MAX_DENSE_DIM:
        raise CapacityError(f"dense eigensolver capped at dim {MAX_DENSE_DIM}")
    w, v = np.linalg.eigh(to_dense(h))
    return float(w[0]), v[:, 0].astype(complex)


# ---------------------------------------------------------------------------
# operator dispatch: dense ndarray | PauliSum


def n_qubits_of(h) -> int:
    if isinstance(h, PauliSum):
        return h.n_qubits
    dim = np.asarray(h).shape[0]
    n = dim.bit_length() - 1
    if (1 << n) != dim:
        raise ShapeError(f"operator dimension {dim} is not a power of two")
    return n


def to_dense(h) -> np.ndarray:
    if isinstance(h, PauliSum):
        return h.to_dense()
    return np.asarray(h)


def apply_operator(h, v: np.ndarray) -> np.ndarray:
    if isinstance(h, PauliSum):
        from .kernels import apply_pauli_sum

        return apply_pauli_sum(h, v)
    return np.asarray(h) @ v


def diagonal_of(h) -> np.ndarray:
    if isinstance(h, PauliSum):
        d = h.diagonal()
    else:
        d = np.diag(np.asarray(h))
    if np.abs(np.asarray(d).imag).max(initial=0.0) > 1e-12:
        raise ValidationError("operator diagonal is not real")
    return np.asarray(d).real.astype(float)
