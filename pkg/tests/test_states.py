import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qjd.errors import ValidationError
from qjd.states import (
    GaussianRefSpec,
    basis_state,
    bitstring_index,
    gaussian_reference,
    hf_spread_reference,
)


class TestGaussianReference:
    def test_neighbor_amplitude_ratio(self):
        v = gaussian_reference(GaussianRefSpec(n_qubits=4, centers=(0,), sigma=1.0))
        assert v[1].real / v[0].real == pytest.approx(np.exp(-0.5), abs=1e-12)

    def test_narrow_width_collapses_to_basis_state(self):
        v = gaussian_reference(GaussianRefSpec(n_qubits=4, centers=(5,), sigma=1e-3))
        assert np.linalg.norm(v - basis_state(5, 4)) < 1e-10

    def test_mirrored_peaks_are_symmetric(self):
        v = gaussian_reference(GaussianRefSpec(n_qubits=8, centers=(0, 255), sigma=1.0))
        assert np.allclose(v, v[::-1])

    def test_no_wraparound(self):
        # pre-normalization amplitudes depend only on index distance to the
        # centers, so amplitude ratios match across shifted peaks
        a = gaussian_reference(GaussianRefSpec(n_qubits=5, centers=(4,), sigma=2.0))
        b = gaussian_reference(GaussianRefSpec(n_qubits=5, centers=(10,), sigma=2.0))
        assert np.allclose(a[4:15].real / a[4].real, b[10:21].real / b[10].real)
        assert a[-1].real < a[4].real  # the tail decays instead of wrapping

    @settings(max_examples=30, deadline=None)
    @given(
        n=st.integers(2, 8),
        sigma=st.floats(0.1, 50.0),
        data=st.data(),
    )
    def test_normalized_nonnegative(self, n, sigma, data):
        dim = 1 << n
        centers = data.draw(
            st.lists(st.integers(0, dim - 1), min_size=1, max_size=4, unique=True)
        )
        v = gaussian_reference(GaussianRefSpec(n_qubits=n, centers=tuple(centers), sigma=sigma))
        assert abs(np.linalg.norm(v) - 1.0) < 1e-12
        assert np.all(v.real >= 0) and np.all(v.imag == 0)

    def test_bad_sigma(self):
        with pytest.raises(ValidationError):
            GaussianRefSpec(n_qubits=3, centers=(0,), sigma=0.0)

    def test_center_out_of_range(self):
        with pytest.raises(ValidationError):
            GaussianRefSpec(n_qubits=3, centers=(8,))


class TestHfSpreadReference:
    def test_zero_spread_is_basis_state(self):
        v = hf_spread_reference("101", 0.0)
        assert np.array_equal(v, basis_state(5, 3))

    def test_hf_bitstring_weights(self):
        v = hf_spread_reference("0011110011", 0.1)
        idx = bitstring_index("0011110011")
        assert idx == 243
        w = np.abs(v) ** 2
        assert w[242] == pytest.approx(0.05, abs=1e-12)
        assert w[243] == pytest.approx(0.90, abs=1e-12)
        assert w[244] == pytest.approx(0.05, abs=1e-12)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)

    def test_boundary_clamp_renormalizes(self):
        v = hf_spread_reference("000", 0.1)
        w = np.abs(v) ** 2
        assert w[0] == pytest.approx(0.9 / 0.95, abs=1e-12)
        assert w[1] == pytest.approx(0.05 / 0.95, abs=1e-12)
        assert w[2:].max() == 0.0

    def test_upper_boundary(self):
        v = hf_spread_reference("111", 0.2)
        w = np.abs(v) ** 2
        assert w[7] == pytest.approx(0.8 / 0.9, abs=1e-12)
        assert w[6] == pytest.approx(0.1 / 0.9, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(
        n=st.integers(1, 10),
        frac=st.floats(0.0, 0.99),
        data=st.data(),
    )
    def test_total_probability(self, n, frac, data):
        bits = data.draw(st.integers(0, (1 << n) - 1))
        v = hf_spread_reference(format(bits, f"0{n}b"), frac)
        assert np.abs(v).__pow__(2).sum() == pytest.approx(1.0, abs=1e-12)

    def test_bad_fraction(self):
        with pytest.raises(ValidationError):
            hf_spread_reference("01", 1.0)

    def test_bad_bitstring(self):
        with pytest.raises(ValidationError):
            bitstring_index("012")


class TestBasisState:
    @pytest.mark.parametrize(
        "index,n,expected",
        [(0, 1, [1, 0]), (1, 1, [0, 1]), (3, 2, [0, 0, 0, 1])],
    )
    def test_examples(self, index, n, expected):
        assert np.array_equal(basis_state(index, n), np.array(expected, dtype=complex))

    def test_range_error(self):
        with pytest.raises(ValidationError):
            basis_state(4, 2)
