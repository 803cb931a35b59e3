"""Exact statevector realizations of the quantum subroutines.

Three circuit families are simulated exactly (probability-weighted, no shot
noise): applying a non-unitary Pauli sum through an ancilla register with
postselection, measuring a Pauli expectation after a per-qubit basis change,
and estimating the real part of a matrix element with an ancilla-interference
test.  Each has a direct linear-algebra oracle used by the test suite.

State-preparation gates are synthesized as Householder reflections; any
unitary whose first column equals the target state gives the same measured
outcome, so the completion choice is irrelevant and tested as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateOutcomeError, ShapeError, ValidationError
from .pauli import (
    PauliString,
    PauliSum,
    _label_masks,
    _parity_signs,
    apply_pauli_string,
    to_unitary_combination,
)

_H2 = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
# circuit order "S-dagger then H", i.e. the matrix H @ S^dagger
_HSDAG = np.array([[1.0, -1.0j], [1.0, 1.0j]]) / math.sqrt(2.0)


def _check_normalized(v: np.ndarray, who: str) -> None:
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise ValidationError(f"{who} must be normalized")


def _check_qubits(n_qubits: int, v: np.ndarray, who: str) -> None:
    if v.shape[0] != (1 << n_qubits):
        raise ShapeError(f"{who} has dim {v.shape[0]}, expected {1 << n_qubits}")


def apply_pauli_sum(a: PauliSum, v: np.ndarray) -> np.ndarray:
    """Matrix-free sum_i c_i P_i v (generally unnormalized)."""
    _check_qubits(a.n_qubits, v, "state")
    out = np.zeros_like(v, dtype=complex)
    for label, c in zip(a.labels, a.coefficients):
        out += c * apply_pauli_string(label, v)
    return out


@dataclass(frozen=True)
class LcuOutcome:
    """Postselected result of the ancilla-register application of A.

    ``state`` is the normalized data-register state (parallel to A v),
    ``success_probability`` equals |A v|^2 / s^2, and ``s`` is the weight sum
    of the unitary combination.
    """

    state: np.ndarray
    success_probability: float
    s: float


def lcu_apply(a: PauliSum, v: np.ndarray) -> LcuOutcome:
    """PREPARE / SELECT / unPREPARE,  postselecting the all-zero ancillas.

    The ancilla register holds ceil(log2 m) qubits.  PREPARE loads
    sqrt(alpha_i / s) onto |i>, SELECT applies |i><i| (x) U_i, and the adjoint
    PREPARE maps the target amplitude back onto ancilla |0...0>.  Ancilla
    blocks with zero amplitude stay zero through SELECT, so only the m live
    blocks are tracked; the retained block equals the exact postselected
    component of the full composite state.
    """
    uc = to_unitary_combination(a)
    _check_qubits(a.n_qubits, v, "state")
    _check_normalized(v, "input state")
    prep = np.sqrt(np.array(uc.weights) / uc.s)
    out = np.zeros_like(v, dtype=complex)
    for amp, phase, p in zip(prep, uc.phases, uc.strings):
        block = amp * v
        block = phase * apply_pauli_string(p.label, block)
        out += np.conj(amp) * block
    success = float(np.vdot(out, out).real)
    if success <= 1e-30:
        raise DegenerateOutcomeError(
            "operator annihilates the input state", success_probability=0.0
        )
    return LcuOutcome(out / math.sqrt(success), success, uc.s)


def lcu_apply_unnormalized(a: PauliSum, v: np.ndarray) -> np.ndarray:
    """A v reconstructed from the postselected state and success probability."""
    out = lcu_apply(a, v)
    return out.state * (out.s * math.sqrt(out.success_probability))


def _expectation_label(label: str, v: np.ndarray) -> float:
    n = len(label)
    w = v.reshape((2,) * n)
    for k, ch in enumerate(label):
        if ch == "X":
            gate = _H2
        elif ch == "Y":
            gate = _HSDAG
        else:
            continue
        w = np.moveaxis(np.tensordot(gate, w, axes=([1], [k])), 0, k)
    probs = np.abs(w.ravel()) ** 2
    mask = 0
    for k, ch in enumerate(label):
        if ch != "I":
            mask |= 1 << (n - 1 - k)
    return float(probs @ _parity_signs(n, mask))


def expectation_pauli(p: PauliString, v: np.ndarray) -> float:
    """<v|P|v> from the basis-change measurement circuit.

    Hadamard for X, S-dagger-then-Hadamard for Y, nothing for Z/I; the
    outcome parity is taken over the non-identity positions.
    """
    _check_qubits(p.n_qubits, v, "state")
    _check_normalized(v, "state")
    return _expectation_label(p.label, v)


def expectation_sum(b: PauliSum, v: np.ndarray) -> float:
    """sum_i c_i <v|P_i|v> with exactly-rounded term accumulation.

    fsum makes the result independent of term evaluation order, which keeps
    traces reproducible if terms are ever evaluated in parallel.
    """
    if not b.is_hermitian(1e-10):
        raise ValidationError("expectation requires real coefficients")
    _check_qubits(b.n_qubits, v, "state")
    _check_normalized(v, "state")
    return math.fsum(
        c.real * _expectation_label(label, v)
        for label, c in zip(b.labels, b.coefficients)
    )


def _preparation_reflection(target: np.ndarray) -> tuple[float, np.ndarray | None]:
    """Phase and Householder vector of a unitary mapping |0...0> to target."""
    t0 = target[0]
    phi = float(np.angle(t0)) if abs(t0) > 0 else 0.0
    b = target * np.exp(-1j * phi)
    d = -b
    d = d.copy()
    d[0] += 1.0
    nd = np.linalg.norm(d)
    if nd < 1e-15:
        return phi, None
    return phi, d / nd


def _apply_preparation_adjoint(phi: float, h: np.ndarray | None, x: np.ndarray) -> np.ndarray:
    if h is None:
        return x * np.exp(-1j * phi)
    return (x - 2.0 * h * np.vdot(h, x)) * np.exp(-1j * phi)


def state_preparation_unitary(target: np.ndarray) -> np.ndarray:
    """Dense completion unitary whose first column is ``target`` (small dims)."""
    phi, h = _preparation_reflection(target)
    dim = target.shape[0]
    u = np.eye(dim, dtype=complex)
    if h is not None:
        u -= 2.0 * np.outer(h, h.conj())
    return u * np.exp(1j * phi)


def hadamard_test_re(u: np.ndarray, p: PauliString, w: np.ndarray) -> float:
    """Re <u|P|w> from the ancilla-interference circuit, 2 P(0) - 1.

    The data register starts in |0...0>; controlled preparation of w, a
    controlled P, and the controlled adjoint preparation of u run under an
    ancilla in |+>, and the final Hadamard interferes the two blocks.
    """
    if u.shape != w.shape:
        raise ShapeError("bra and ket states differ in dimension")
    _check_qubits(p.n_qubits, u, "bra state")
    _check_normalized(u, "bra state")
    _check_normalized(w, "ket state")
    dim = u.shape[0]
    zero = np.zeros(dim, dtype=complex)
    zero[0] = 1.0
    b0 = zero / math.sqrt(2.0)  # ancilla-0 block, untouched by controlled gates
    b1 = w / math.sqrt(2.0)  # controlled preparation sends |0...0> to w
    b1 = apply_pauli_string(p.label, b1)
    phi, h = _preparation_reflection(u)
    b1 = _apply_preparation_adjoint(phi, h, b1)
    amp0 = (b0 + b1) / math.sqrt(2.0)
    p0 = float(np.vdot(amp0, amp0).real)
    return 2.0 * p0 - 1.0


def overlap_sum(b: PauliSum, u: np.ndarray, w_unnormalized: np.ndarray) -> float:
    """Re <u|B|w> accumulated from per-term interference tests.

    w is normalized internally and the result rescaled by |w|; a zero w
    returns 0 by convention (zero residual implies zero overlap).
    """
    if not b.is_hermitian(1e-10):
        raise ValidationError("overlap requires real coefficients")
    if u.shape != w_unnormalized.shape:
        raise ShapeError("bra and ket states differ in dimension")
    _check_qubits(b.n_qubits, u, "bra state")
    _check_normalized(u, "bra state")
    wn = float(np.linalg.norm(w_unnormalized))
    if wn == 0.0:
        return 0.0
    w = w_unnormalized / wn
    total = math.fsum(
        c.real * hadamard_test_re(u, PauliString(label), w)
        for label, c in zip(b.labels, b.coefficients)
    )
    return wn * total
