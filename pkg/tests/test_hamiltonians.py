import numpy as np
import pytest

from qjd.errors import CapacityError, ParseError, ShapeError, ValidationError
from qjd.hamiltonians import (
    DdMatrixSpec,
    IsingSpec,
    build_dd_matrix,
    build_ising,
    diagonal_of,
    exact_ground_pair,
    is_diagonally_dominant,
    load_pauli_hamiltonian,
    read_dense_matrix,
    save_pauli_hamiltonian,
    write_dense_matrix,
)
from qjd.pauli import decompose_hermitian, pauli_term_count
from qjd.states import basis_state


class TestDdMatrix:
    def test_single_minimum_diagonal(self):
        h = build_dd_matrix(DdMatrixSpec(n_qubits=8, ns=1, minima_positions=(1,)))
        d = np.diag(h)
        assert d[0] == 1.0
        assert d[1] == 2.0
        assert d[255] == 256.0

    def test_two_minima(self):
        h = build_dd_matrix(DdMatrixSpec(n_qubits=8, ns=2, minima_positions=(1, 256)))
        d = np.diag(h)
        assert d[0] == 1.0 and d[255] == 1.0
        assert d[127] == 128.0

    def test_zero_off_diagonals(self):
        spec = DdMatrixSpec(n_qubits=4, ns=1, minima_positions=(1,), off_diag_scale=0.0)
        h = build_dd_matrix(spec)
        assert np.array_equal(h, np.diag(np.diag(h)))
        e0, _ = exact_ground_pair(h)
        assert e0 == 1.0

    def test_determinism(self):
        spec = DdMatrixSpec(n_qubits=6, ns=1, minima_positions=(1,), seed=7)
        a, b = build_dd_matrix(spec), build_dd_matrix(spec)
        assert np.array_equal(a, b)

    def test_seed_changes_entries(self):
        a = build_dd_matrix(DdMatrixSpec(n_qubits=4, ns=1, minima_positions=(1,), seed=1))
        b = build_dd_matrix(DdMatrixSpec(n_qubits=4, ns=1, minima_positions=(1,), seed=2))
        assert not np.array_equal(a, b)

    def test_off_diagonal_range_and_symmetry(self):
        h = build_dd_matrix(DdMatrixSpec(n_qubits=8, ns=1, minima_positions=(1,)))
        off = h[~np.eye(256, dtype=bool)]
        assert off.min() >= 0.0 and off.max() <= 1.0 / 256.0
        assert np.array_equal(h, h.T)

    def test_always_diagonally_dominant(self):
        for seed in (1, 20240101, 999):
            h = build_dd_matrix(
                DdMatrixSpec(n_qubits=8, ns=2, minima_positions=(1, 256), seed=seed)
            )
            assert is_diagonally_dominant(h)

    def test_position_out_of_range(self):
        with pytest.raises(ValidationError):
            DdMatrixSpec(n_qubits=4, ns=1, minima_positions=(17,))

    def test_position_count_mismatch(self):
        with pytest.raises(ValidationError):
            DdMatrixSpec(n_qubits=4, ns=2, minima_positions=(1,))


class TestDominance:
    def test_diagonal_yes(self):
        assert is_diagonally_dominant(np.diag([1.0, 2.0]))

    def test_large_off_diagonal_no(self):
        assert not is_diagonally_dominant(np.array([[1.0, 2.0], [2.0, 1.0]]))


class TestIsing:
    def test_two_site_diagonal_energy(self):
        # the periodic 2-site ring carries both (1,2) and (2,1) bonds
        ps = build_ising(IsingSpec(n_sites=2, J=1.1, h=0.9, g=0.0))
        v00 = basis_state(0, 2)
        d = ps.diagonal().real
        assert abs(d[0] - (-2 * 1.1 - 2 * 0.9)) < 1e-12
        e0, v0 = exact_ground_pair(ps)
        assert abs(e0 - (-4.0)) < 1e-12
        assert abs(np.vdot(v0, v00)) > 1 - 1e-12

    @pytest.mark.parametrize("n", [3, 4, 6])
    def test_term_count(self, n):
        ps = build_ising(IsingSpec(n_sites=n, J=1.1, h=0.9, g=0.01))
        assert len(ps) == 3 * n

    def test_two_site_merges_double_bond(self):
        ps = build_ising(IsingSpec(n_sites=2, J=1.1, h=0.9, g=0.5))
        got = dict(zip(ps.labels, ps.coefficients))
        assert got["ZZ"] == pytest.approx(-2.2)
        assert len(ps) == 5

    def test_transverse_field_dominance_contrast(self):
        # strict row dominance fails even at g=0.01: spin configurations with
        # zero net bond and field energy have exactly zero diagonal entries.
        # The g=0.01 system is dominant in all but ~10% of rows while g=1
        # violates dominance almost everywhere; assert that contrast.
        def violating_rows(g):
            ps = build_ising(IsingSpec(n_sites=12, J=1.1, h=0.9, g=g))
            diag = np.abs(ps.diagonal().real)
            return int(np.count_nonzero(diag < 12 * g))

        nearly, non = violating_rows(0.01), violating_rows(1.0)
        assert nearly < 0.11 * 4096
        assert non > 0.9 * 4096
        assert not is_diagonally_dominant(
            build_ising(IsingSpec(n_sites=12, J=1.1, h=0.9, g=1.0)).to_dense()
        )

    def test_zero_field_is_diagonal(self):
        ps = build_ising(IsingSpec(n_sites=3, J=1.0, h=0.5, g=0.0))
        dense = ps.to_dense()
        assert np.array_equal(dense, np.diag(np.diag(dense)))

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_decompose_recovers_term_structure(self, n):
        ps = build_ising(IsingSpec(n_sites=n, J=1.1, h=0.9, g=0.3))
        redone = decompose_hermitian(ps.to_dense())
        assert pauli_term_count(redone, 1e-12) == len(ps)
        assert dict(zip(redone.labels, redone.coefficients)) == pytest.approx(
            dict(zip(ps.labels, ps.coefficients))
        )

    def test_too_few_sites(self):
        with pytest.raises(ValidationError):
            IsingSpec(n_sites=1)


class TestLoader:
    def test_single_term(self, tmp_path):
        p = tmp_path / "h.txt"
        p.write_text("1.0 0.0 Z\n")
        ps = load_pauli_hamiltonian(p)
        assert ps.labels == ("Z",)
        assert ps.coefficients[0] == 1.0

    def test_duplicates_merge(self, tmp_path):
        p = tmp_path / "h.txt"
        p.write_text("0.5 0.0 X\n0.5 0.0 X\n")
        ps = load_pauli_hamiltonian(p)
        assert len(ps) == 1
        assert ps.coefficients[0] == 1.0

    def test_ten_qubit_file(self, tmp_path):
        p = tmp_path / "h.txt"
        p.write_text(
            "# sample molecular-style file\n"
            "-4.25 0.0 IIIIIIIIII\n"
            "0.17 0.0 ZIIIIIIIII\n"
            "0.04 0.0 XXIIIIIIYY\n"
        )
        ps = load_pauli_hamiltonian(p)
        assert ps.n_qubits == 10
        assert len(ps) == 3

    def test_malformed_line_number(self, tmp_path):
        p = tmp_path / "h.txt"
        p.write_text("1.0 0.0 Z\nnot a line\n")
        with pytest.raises(ParseError, match="line 2"):
            load_pauli_hamiltonian(p)

    def test_inconsistent_lengths(self, tmp_path):
        p = tmp_path / "h.txt"
        p.write_text("1.0 0.0 ZZ\n1.0 0.0 Z\n")
        with pytest.raises(ShapeError):
            load_pauli_hamiltonian(p)

    def test_complex_coefficient_rejected(self, tmp_path):
        p = tmp_path / "h.txt"
        p.write_text("1.0 0.5 Z\n")
        with pytest.raises(ValidationError):
            load_pauli_hamiltonian(p)

    def test_save_load_round_trip(self, tmp_path):
        ps = build_ising(IsingSpec(n_sites=4, J=1.1, h=0.9, g=0.01))
        p = tmp_path / "ising.pauli"
        save_pauli_hamiltonian(ps, p)
        again = load_pauli_hamiltonian(p)
        assert again.labels == ps.labels
        assert np.allclose(again.coefficients, ps.coefficients)


class TestExactGroundPair:
    def test_diagonal(self):
        e0, v0 = exact_ground_pair(np.diag([3.0, 1.0, 2.0, 5.0]))
        assert e0 == 1.0
        assert abs(abs(v0[1]) - 1.0) < 1e-12

    def test_two_by_two_closed_form(self):
        h = np.array([[1.0, 0.1], [0.1, 2.0]])
        e0, v0 = exact_ground_pair(h)
        assert e0 == pytest.approx((3 - np.sqrt(1.04)) / 2, abs=1e-12)
        assert np.linalg.norm(h @ v0 - e0 * v0) < 1e-12

    def test_residual_contract_on_generated_hamiltonians(self):
        for h in (
            build_dd_matrix(DdMatrixSpec(n_qubits=6, ns=1, minima_positions=(1,))),
            build_ising(IsingSpec(n_sites=6, J=1.1, h=0.9, g=1.0)).to_dense(),
        ):
            e0, v0 = exact_ground_pair(h)
            scale = np.linalg.norm(h, 2)
            assert np.linalg.norm(h @ v0 - e0 * v0) <= 1e-9 * scale

    def test_capacity_guard(self):
        with pytest.raises(CapacityError):
            exact_ground_pair(np.zeros((8192, 8192)))


class TestDenseBinaryFormat:
    def test_round_trip(self, tmp_path):
        h = build_dd_matrix(DdMatrixSpec(n_qubits=4, ns=1, minima_positions=(1,)))
        p = tmp_path / "h.qjdm"
        write_dense_matrix(h, p)
        assert np.array_equal(read_dense_matrix(p), h)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "h.qjdm"
        p.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(ParseError):
            read_dense_matrix(p)

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "h.qjdm"
        import struct

        p.write_bytes(b"QJDM" + struct.pack("<I", 4) + b"\x00" * 8)
        with pytest.raises(ParseError):
            read_dense_matrix(p)


class TestDiagonalOf:
    def test_pauli_sum_diagonal(self):
        ps = build_ising(IsingSpec(n_sites=3, J=1.0, h=0.5, g=0.7))
        assert np.allclose(diagonal_of(ps), np.diag(ps.to_dense().real))

    def test_dense_diagonal(self):
        h = np.diag([1.0, 2.0])
        assert np.allclose(diagonal_of(h), [1.0, 2.0])
