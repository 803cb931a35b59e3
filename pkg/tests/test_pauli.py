import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qjd.errors import (
    CapacityError,
    DegenerateOperatorError,
    ParseError,
    ShapeError,
    ValidationError,
)
from qjd.pauli import (
    PauliString,
    PauliSum,
    decompose_hermitian,
    dense_pauli_term_count,
    diagonal_pauli_sum,
    format_pauli_text,
    parse_pauli_text,
    pauli_matrix,
    pauli_term_count,
    to_unitary_combination,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def random_hermitian(rng, dim, complex_valued=True):
    m = rng.standard_normal((dim, dim))
    if complex_valued:
        m = m + 1j * rng.standard_normal((dim, dim))
    return (m + m.conj().T) / 2


class TestPauliMatrix:
    def test_single_qubit_z(self):
        assert np.array_equal(pauli_matrix(PauliString("Z")), Z)

    def test_single_qubit_identity(self):
        assert np.array_equal(pauli_matrix(PauliString("I")), np.eye(2))

    def test_xz_is_kron_product(self):
        # X (x) Z written out by hand
        want = np.array(
            [
                [0, 0, 1, 0],
                [0, 0, 0, -1],
                [1, 0, 0, 0],
                [0, -1, 0, 0],
            ],
            dtype=complex,
        )
        assert np.array_equal(pauli_matrix(PauliString("XZ")), want)

    @pytest.mark.parametrize("label", ["Y", "XY", "ZYX"])
    def test_unitary_hermitian_involution(self, label):
        m = pauli_matrix(PauliString(label))
        dim = m.shape[0]
        assert np.allclose(m @ m.conj().T, np.eye(dim))
        assert np.allclose(m, m.conj().T)
        assert np.allclose(m @ m, np.eye(dim))

    def test_capacity_guard(self):
        with pytest.raises(CapacityError):
            pauli_matrix(PauliString("I" * 13))

    def test_bad_label(self):
        with pytest.raises(ValidationError):
            PauliString("XQ")


class TestPauliOrthogonality:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_trace_orthogonality(self, n):
        import itertools

        labels = ["".join(t) for t in itertools.product("IXYZ", repeat=n)]
        mats = {l: pauli_matrix(PauliString(l)) for l in labels}
        for a in labels:
            for b in labels:
                tr = np.trace(mats[a] @ mats[b])
                want = 2**n if a == b else 0.0
                assert abs(tr - want) < 1e-12


class TestDecompose:
    def test_diag_z(self):
        ps = decompose_hermitian(np.diag([1.0, -1.0]))
        assert ps.labels == ("Z",)
        assert np.allclose(ps.coefficients, [1.0])

    def test_x(self):
        ps = decompose_hermitian(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert ps.labels == ("X",)

    def test_i_plus_z(self):
        ps = decompose_hermitian(np.diag([2.0, 0.0]))
        got = dict(zip(ps.labels, ps.coefficients))
        assert got == {"I": 1.0, "Z": 1.0}

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValidationError):
            decompose_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ShapeError):
            decompose_hermitian(np.eye(3))

    def test_dd_matrix_term_budget(self):
        from qjd.hamiltonians import DdMatrixSpec, build_dd_matrix

        h = build_dd_matrix(DdMatrixSpec(n_qubits=8, ns=1, minima_positions=(1,)))
        assert dense_pauli_term_count(h, 1e-12) <= 4**8

    @settings(max_examples=25, deadline=None)
    @given(n=st.integers(1, 4), seed=st.integers(0, 2**32 - 1), cplx=st.booleans())
    def test_round_trip(self, n, seed, cplx):
        rng = np.random.default_rng(seed)
        m = random_hermitian(rng, 1 << n, cplx)
        ps = decompose_hermitian(m)
        rec = sum(c * pauli_matrix(s) for c, s in ps.terms)
        assert np.abs(rec - m).max() < 1e-10
        assert all(abs(c.imag) == 0 for c, _ in ps.terms)

    @settings(max_examples=15, deadline=None)
    @given(n=st.integers(1, 3), seed=st.integers(0, 2**32 - 1), cplx=st.booleans())
    def test_count_matches_materialized_decomposition(self, n, seed, cplx):
        rng = np.random.default_rng(seed)
        m = random_hermitian(rng, 1 << n, cplx)
        assert dense_pauli_term_count(m, 1e-12) == pauli_term_count(
            decompose_hermitian(m, 1e-12), 0.0
        )

    def test_truncation_error_bound(self):
        rng = np.random.default_rng(11)
        m = random_hermitian(rng, 8, False)
        tol = 0.05
        ps = decompose_hermitian(m, tol)
        dropped = 4**3 - len(ps)
        rec = sum(c * pauli_matrix(s) for c, s in ps.terms)
        assert np.abs(rec - m).max() <= tol * (dropped + 1)


class TestPauliSum:
    def test_merges_duplicates(self):
        ps = PauliSum([("X", 0.5), ("X", 0.5), ("Z", 1.0)])
        assert len(ps) == 2
        assert dict(zip(ps.labels, ps.coefficients))["X"] == 1.0

    def test_mixed_lengths_rejected(self):
        with pytest.raises(ShapeError):
            PauliSum([("X", 1.0), ("XX", 1.0)])

    def test_term_count_examples(self):
        assert pauli_term_count(PauliSum([("Z", 1.0)]), 0.0) == 1
        assert pauli_term_count(PauliSum([("Z", 1e-14), ("X", 0.5)]), 1e-12) == 1
        assert pauli_term_count(PauliSum([], n_qubits=2), 0.0) == 0

    def test_diagonal_assembly(self):
        ps = PauliSum([("ZI", 2.0), ("IZ", 1.0), ("XX", 5.0)])
        want = np.array([3.0, 1.0, -1.0, -3.0])
        assert np.allclose(ps.diagonal().real, want)

    def test_to_dense_matches_kron_sum(self):
        ps = PauliSum([("XY", 0.3), ("ZZ", -0.7), ("IX", 1.1)])
        want = sum(c * pauli_matrix(s) for c, s in ps.terms)
        assert np.allclose(ps.to_dense(), want)


class TestUnitaryCombination:
    def test_positive_coefficients(self):
        uc = to_unitary_combination(PauliSum([("X", 0.5), ("Z", 0.5)]))
        assert uc.weights == (0.5, 0.5)
        assert uc.s == 1.0
        assert uc.phases == (1.0 + 0j, 1.0 + 0j)

    def test_sign_absorbed_into_phase(self):
        uc = to_unitary_combination(PauliSum([("Z", -1.0)]))
        assert uc.weights == (1.0,)
        assert uc.phases == (-1.0 + 0j,)
        assert uc.s == 1.0

    def test_weight_sum(self):
        uc = to_unitary_combination(PauliSum([("X", 0.3), ("Y", -0.4), ("Z", 0.3)]))
        assert abs(uc.s - 1.0) < 1e-15

    def test_zero_operator_rejected(self):
        with pytest.raises(DegenerateOperatorError):
            to_unitary_combination(PauliSum([("X", 0.0)]))

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_reconstruction_on_random_vectors(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 4))
        labels = ["".join(rng.choice(list("IXYZ"), n)) for _ in range(4)]
        coeffs = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        ps = PauliSum(zip(labels, coeffs), n)
        uc = to_unitary_combination(ps)
        rebuilt = sum(
            a * ph * pauli_matrix(s)
            for a, ph, s in zip(uc.weights, uc.phases, uc.strings)
        )
        direct = sum(c * pauli_matrix(s) for c, s in ps.terms)
        for _ in range(20):
            v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
            assert np.abs(rebuilt @ v - direct @ v).max() < 1e-12 * max(
                1.0, np.linalg.norm(v)
            )


class TestDiagonalPauliSum:
    def test_matches_dense_decomposition(self):
        rng = np.random.default_rng(5)
        d = rng.standard_normal(8)
        ps = diagonal_pauli_sum(d)
        want = decompose_hermitian(np.diag(d))
        assert dict(zip(ps.labels, ps.coefficients)) == pytest.approx(
            dict(zip(want.labels, want.coefficients))
        )
        assert all(set(l) <= {"I", "Z"} for l in ps.labels)


class TestTextFormat:
    def test_parse_basic(self):
        terms = parse_pauli_text("# comment\n0.5 0.0 XZIIY\n\n-1.0 0.0 ZZZZZ\n")
        assert terms == [("XZIIY", 0.5 + 0j), ("ZZZZZ", -1.0 + 0j)]

    def test_field_count_error_carries_line(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_pauli_text("1.0 0.0 Z\n1.0 Z\n")

    def test_bad_coefficient(self):
        with pytest.raises(ParseError, match="line 1"):
            parse_pauli_text("one 0.0 Z\n")

    def test_bad_label(self):
        with pytest.raises(ParseError):
            parse_pauli_text("1.0 0.0 ZQ\n")

    def test_inconsistent_lengths(self):
        with pytest.raises(ShapeError):
            parse_pauli_text("1.0 0.0 Z\n1.0 0.0 ZZ\n")

    def test_format_round_trip(self):
        ps = PauliSum([("XZ", 0.25), ("YY", -1.5)])
        again = PauliSum(parse_pauli_text(format_pauli_text(ps)))
        assert again.labels == ps.labels
        assert np.allclose(again.coefficients, ps.coefficients)
