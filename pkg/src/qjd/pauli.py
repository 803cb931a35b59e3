"""Pauli-string algebra: labels, sums, and dense decompositions.

Conventions (fixed globally):
  * A label is a string over {I, X, Y, Z}, one letter per qubit.
  * The leftmost letter acts on the most significant bit of the
    computational-basis index, so ``|0011110011>`` read left to right is
    basis index 243 on ten qubits.
  * The matrix of a label is the Kronecker product of the single-qubit
    matrices in label order.

A Pauli string P acts on basis states by a bit flip plus a phase:
``P|j> = phase(j) |j ^ flip>`` with ``flip`` the X/Y bit mask and
``phase(j) = i**nY * (-1)**popcount(j & yz_mask)``.  All vectorized kernels
below build on that identity instead of dense matrices.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapacityError,
    DegenerateOperatorError,
    ParseError,
    ShapeError,
    ValidationError,
)

PAULI_LETTERS = "IXYZ"

#: default threshold below which decomposition coefficients are dropped
DROP_TOL = 1e-12

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-qubit change of basis, vec(2x2 block) -> (I, X, Y, Z) coefficients
_T4 = 0.5 * np.array(
    [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1j, -1j, 0], [1, 0, 0, -1]], dtype=complex
)
# real variant with the Y row un-phased; true coefficient = i**nY * primed
_T4_PRIMED = 0.5 * np.array(
    [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1, -1, 0], [1, 0, 0, -1]], dtype=float
)


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-qubit Paulis, e.g. ``PauliString("XZI")``."""

    label: str

    def __post_init__(self):
        if not self.label:
            raise ValidationError("empty Pauli label")
        bad = set(self.label) - set(PAULI_LETTERS)
        if bad:
            raise ValidationError(f"invalid Pauli letters {sorted(bad)} in {self.label!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.label)

    def __str__(self):
        return self.label


@functools.lru_cache(maxsize=None)
def _label_masks(label: str) -> tuple[int, int, int]:
    """(flip_mask, yz_mask, n_y) for a label under the MSB-first convention."""
    n = len(label)
    flip = yz = ny = 0
    for k, ch in enumerate(label):
        bit = 1 << (n - 1 - k)
        if ch in "XY":
            flip |= bit
        if ch in "YZ":
            yz |= bit
        if ch == "Y":
            ny += 1
    return flip, yz, ny


def _parity_signs(n_qubits: int, mask: int) -> np.ndarray:
    """(-1)**popcount(j & mask) for every basis index j."""
    j = np.arange(1 << n_qubits, dtype=np.uint64)
    par = np.bitwise_count(j & np.uint64(mask)).astype(np.int64) & 1
    return 1.0 - 2.0 * par


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense matrix of a Pauli string via Kronecker products (n <= 12)."""
    if p.n_qubits > 12:
        raise CapacityError(f"pauli_matrix limited to 12 qubits, got {p.n_qubits}")
    m = np.array([[1.0 + 0j]])
    for ch in p.label:
        m = np.kron(m, _SINGLE[ch])
    return m


def apply_pauli_string(label: str, v: np.ndarray) -> np.ndarray:
    """P v through index arithmetic, never a dense matrix."""
    n = _n_qubits_of_dim(v.shape[0])
    if len(label) != n:
        raise ShapeError(f"label {label!r} does not match vector on {n} qubits")
    flip, yz, ny = _label_masks(label)
    w = v * ((1j**ny) * _parity_signs(n, yz))
    if flip:
        idx = np.arange(v.shape[0]) ^ flip
        w = w[idx]
    return w


class PauliSum:
    """Weighted sum of Pauli strings with duplicates merged on construction.

    Terms keep the first-occurrence order of their labels, which makes every
    downstream accumulation deterministic.
    """

    def __init__(self, terms, n_qubits: int | None = None):
        merged: dict[str, complex] = {}
        for label, coeff in terms:
            if isinstance(label, PauliString):
                label = label.label
            if n_qubits is None:
                n_qubits = len(label)
            elif len(label) != n_qubits:
                raise ShapeError(
                    f"label {label!r} has {len(label)} letters, expected {n_qubits}"
                )
            merged[label] = merged.get(label, 0j) + complex(coeff)
        if n_qubits is None:
            raise ValidationError("cannot infer qubit count of an empty PauliSum")
        bad = set("".join(merged)) - set(PAULI_LETTERS)
        if bad:
            raise ValidationError(f"invalid Pauli letters {sorted(bad)}")
        self.n_qubits = int(n_qubits)
        self._labels = tuple(merged)
        self._coeffs = np.array([merged[l] for l in self._labels], dtype=complex)

    @property
    def terms(self) -> list[tuple[complex, PauliString]]:
        return [(complex(c), PauliString(l)) for l, c in zip(self._labels, self._coeffs)]

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def coefficients(self) -> np.ndarray:
        return self._coeffs

    def __len__(self):
        return len(self._labels)

    def __repr__(self):
        head = ", ".join(f"{c:+.3g}*{l}" for l, c in list(zip(self._labels, self._coeffs))[:4])
        tail = ", ..." if len(self) > 4 else ""
        return f"PauliSum({head}{tail}; n_qubits={self.n_qubits})"

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return len(self) == 0 or float(np.abs(self._coeffs.imag).max()) <= tol

    def scaled(self, factor: complex) -> "PauliSum":
        return PauliSum(zip(self._labels, self._coeffs * factor), self.n_qubits)

    def with_identity_added(self, coeff: complex) -> "PauliSum":
        ident = "I" * self.n_qubits
        return PauliSum(
            list(zip(self._labels, self._coeffs)) + [(ident, coeff)], self.n_qubits
        )

    def diagonal(self) -> np.ndarray:
        """Diagonal of the dense matrix, assembled from the I/Z-only terms."""
        d = np.zeros(1 << self.n_qubits, dtype=complex)
        for label, c in zip(self._labels, self._coeffs):
            flip, yz, _ = _label_masks(label)
            if flip == 0:
                d += c * _parity_signs(self.n_qubits, yz)
        return d

    def to_dense(self) -> np.ndarray:
        """Dense matrix; real symmetric output when the sum allows it."""
        dim = 1 << self.n_qubits
        m = np.zeros((dim, dim), dtype=complex)
        idx = np.arange(dim)
        for label, c in zip(self._labels, self._coeffs):
            flip, yz, ny = _label_masks(label)
            m[idx ^ flip, idx] += c * ((1j**ny) * _parity_signs(self.n_qubits, yz))
        if np.abs(m.imag).max(initial=0.0) == 0.0:
            return np.ascontiguousarray(m.real)
        return m


@dataclass(frozen=True)
class UnitaryCombination:
    """A nonnegative-weight combination sum_i alpha_i * (phase_i * P_i).

    Phases are the unit-modulus factors absorbed from the source coefficients;
    ``s`` is the total weight sum(alpha_i).
    """

    weights: tuple[float, ...]
    phases: tuple[complex, ...]
    strings: tuple[PauliString, ...]
    s: float


def to_unitary_combination(ps: PauliSum) -> UnitaryCombination:
    """Split each coefficient into |c| and a unit phase folded into the unitary."""
    weights, phases, strings = [], [], []
    for label, c in zip(ps.labels, ps.coefficients):
        a = abs(c)
        if a == 0.0:
            continue
        weights.append(float(a))
        phases.append(complex(c / a))
        strings.append(PauliString(label))
    if not weights:
        raise DegenerateOperatorError("all coefficients are zero")
    return UnitaryCombination(
        tuple(weights), tuple(phases), tuple(strings), float(sum(weights))
    )


# ---------------------------------------------------------------------------
# dense <-> Pauli basis transforms


def _n_qubits_of_dim(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim <= 1 or (1 << n) != dim:
        raise ShapeError(f"dimension {dim} is not a power of two >= 2")
    return n


@functools.lru_cache(maxsize=8)
def _kron_pow_primed(k: int) -> np.ndarray:
    out = np.array([[1.0]])
    for _ in range(k):
        out = np.kron(out, _T4_PRIMED)
    return out


@functools.lru_cache(maxsize=8)
def _kron_pow_exact(k: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for _ in range(k):
        out = np.kron(out, _T4)
    return out


def _pairs_matrix(m: np.ndarray, n: int) -> np.ndarray:
    """Reorder the 2^n x 2^n matrix so qubit k's (row, col) bits pair up."""
    a = m.reshape((2,) * (2 * n))
    perm = []
    for k in range(n):
        perm += [k, n + k]
    n_left = (n + 1) // 2
    return np.ascontiguousarray(a.transpose(perm)).reshape(4**n_left, 4 ** (n - n_left))


def _coefficient_matrix(m: np.ndarray, n: int, primed: bool) -> np.ndarray:
    """All 4^n Pauli coefficients of m, as a (4^nl, 4^nr) matrix.

    Flat index read in base 4 (digits I=0, X=1, Y=2, Z=3, most significant
    digit = leftmost label letter) addresses the coefficient of that label.
    With ``primed`` the Y axes omit their factor i (exact magnitudes, real
    arithmetic); the true coefficient is i**nY times the primed one.
    """
    n_left = (n + 1) // 2
    a = _pairs_matrix(m, n)
    if primed:
        tl, tr = _kron_pow_primed(n_left), _kron_pow_primed(n - n_left)
    else:
        tl, tr = _kron_pow_exact(n_left), _kron_pow_exact(n - n_left)
    return (tl @ a) @ tr.T


def _flat_index_label(flat: int, n: int) -> tuple[str, int]:
    """Label and Y-count for a flat base-4 coefficient index."""
    letters = []
    ny = 0
    for k in range(n - 1, -1, -1):
        d = (flat >> (2 * k)) & 3
        letters.append(PAULI_LETTERS[d])
        ny += d == 2
    return "".join(letters), ny


def check_hermitian(m: np.ndarray, tol: float = 1e-10) -> None:
    dev = float(np.abs(m - m.conj().T).max())
    if dev > tol:
        raise ValidationError(f"matrix is not Hermitian (max |M - M^H| = {dev:.3e})")


def decompose_hermitian(m: np.ndarray, tol: float = DROP_TOL) -> PauliSum:
    """Pauli decomposition c_i = Tr(P_i M) / 2^n, dropping |c_i| <= tol."""
    m = np.asarray(m)
    n = _n_qubits_of_dim(m.shape[0])
    check_hermitian(m)
    m = (m + m.conj().T) / 2
    real_input = not np.iscomplexobj(m) or np.abs(m.imag).max(initial=0.0) == 0.0
    if real_input:
        coeffs = _coefficient_matrix(m.real if np.iscomplexobj(m) else m, n, primed=True)
    else:
        coeffs = _coefficient_matrix(m, n, primed=False)
    flat = coeffs.ravel()
    keep = np.flatnonzero(np.abs(flat) > tol)
    terms = []
    for fi in keep:
        label, ny = _flat_index_label(int(fi), n)
        c = flat[fi] * (1j**ny) if real_input else flat[fi]
        terms.append((label, complex(c.real)))
    return PauliSum(terms, n)


def dense_pauli_term_count(m: np.ndarray, tol: float = DROP_TOL) -> int:
    """Number of Pauli terms with |coefficient| > tol, without materializing them.

    Equals ``pauli_term_count(decompose_hermitian(m, tol), 0)`` but runs the
    magnitude count directly on the coefficient transform.
    """
    m = np.asarray(m)
    n = _n_qubits_of_dim(m.shape[0])
    real_input = not np.iscomplexobj(m) or np.abs(m.imag).max(initial=0.0) == 0.0
    if real_input:
        coeffs = _coefficient_matrix(m.real if np.iscomplexobj(m) else m, n, primed=True)
    else:
        coeffs = _coefficient_matrix(m, n, primed=False)
    return int(np.count_nonzero(np.abs(coeffs) > tol))


def pauli_term_count(ps: PauliSum, tol: float = 0.0) -> int:
    """Number of terms whose coefficient magnitude exceeds tol."""
    if len(ps) == 0:
        return 0
    return int(np.count_nonzero(np.abs(ps.coefficients) > tol))


def diagonal_pauli_sum(diag: np.ndarray, tol: float = DROP_TOL) -> PauliSum:
    """I/Z-string decomposition of a real diagonal operator.

    Coefficients are the scaled Walsh-Hadamard transform
    c_S = 2^-n sum_j diag_j (-1)**popcount(j & S).
    """
    d = np.asarray(diag, dtype=float).copy()
    n = _n_qubits_of_dim(d.shape[0])
    a = d.reshape((2,) * n)
    h = np.array([[1.0, 1.0], [1.0, -1.0]])
    for k in range(n):
        a = np.moveaxis(np.tensordot(h, a, axes=([1], [k])), 0, k)
    a = a.ravel() / (1 << n)
    terms = []
    for mask in np.flatnonzero(np.abs(a) > tol):
        label = "".join(
            "Z" if (int(mask) >> (n - 1 - k)) & 1 else "I" for k in range(n)
        )
        terms.append((label, float(a[mask])))
    if not terms:
        terms = [("I" * n, 0.0)]
    return PauliSum(terms, n)


# ---------------------------------------------------------------------------
# text format: one term per line, "<real> <imag> <label>", '#' comments


def parse_pauli_text(text: str) -> list[tuple[str, complex]]:
    terms = []
    length = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ParseError(f"expected '<real> <imag> <label>', got {line!r}", lineno)
        try:
            re_c, im_c = float(fields[0]), float(fields[1])
        except ValueError:
            raise ParseError(f"bad coefficient in {line!r}", lineno) from None
        label = fields[2]
        if set(label) - set(PAULI_LETTERS):
            raise ParseError(f"bad Pauli label {label!r}", lineno)
        if length is None:
            length = len(label)
        elif len(label) != length:
            raise ShapeError(
                f"line {lineno}: label length {len(label)} != {length} used earlier"
            )
        terms.append((label, complex(re_c, im_c)))
    return terms


def format_pauli_text(ps: PauliSum) -> str:
    lines = [
        f"{float(c.real)!r} {float(c.imag)!r} {l}"
        for l, c in zip(ps.labels, ps.coefficients)
    ]
    return "\n".join(lines) + "\n"
