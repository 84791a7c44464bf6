import math

import numpy as np
import pytest

from quasispec import oracle
from quasispec.matlin import (
    RngSeed,
    canonical_phase,
    gue_sample,
    mat_power,
    op_norm_upper,
    phase_dist,
    rescale_to_range,
    sample_unit_vector,
    unitary_exp,
)


def random_hermitian_in_range(n, seed, lo=0.02, hi=0.88):
    """Hermitian matrix with eigenvalues placed uniformly in [lo, hi]."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    V = np.linalg.qr(X)[0]
    lam = np.sort(rng.uniform(lo, hi, size=n))[::-1]
    A = (V * lam) @ V.conj().T
    return (A + A.conj().T) / 2.0, lam, V


class TestGueSample:
    def test_n1_is_real_scalar(self):
        A = gue_sample(1, RngSeed(3))
        assert A.shape == (1, 1)
        assert A[0, 0].imag == 0.0

    def test_reproducible(self):
        a = gue_sample(50, RngSeed(11, 4))
        b = gue_sample(50, RngSeed(11, 4))
        assert np.array_equal(a, b)
        c = gue_sample(50, RngSeed(11, 5))
        assert not np.array_equal(a, c)

    def test_exactly_hermitian(self):
        A = gue_sample(37, RngSeed(8))
        assert np.array_equal(A, A.conj().T)

    def test_moments(self):
        # 1000 draws at n=100: per-entry means near 0, E|off-diagonal|^2 near 1
        n, reps = 100, 1000
        mean = np.zeros((n, n), dtype=np.complex128)
        sq = np.zeros((n, n))
        for r in range(reps):
            E = gue_sample(n, RngSeed(1234, r))
            mean += E
            sq += np.abs(E) ** 2
        mean /= reps
        sq /= reps
        assert np.abs(mean).max() <= 0.15
        off = ~np.eye(n, dtype=bool)
        assert np.abs(sq[off] - 1.0).max() <= 0.15
        # diagonal entries are variance-1 reals
        assert abs(sq[np.eye(n, dtype=bool)].mean() - 1.0) <= 0.05


class TestSampleUnitVector:
    def test_n1_unit_modulus(self):
        v = sample_unit_vector(1, RngSeed(0))
        assert abs(abs(v[0]) - 1.0) <= 1e-12

    def test_unit_norm(self):
        for r in range(20):
            v = sample_unit_vector(16, RngSeed(5, r))
            assert abs(np.linalg.norm(v) - 1.0) <= 1e-12

    def test_reproducible(self):
        assert np.array_equal(sample_unit_vector(9, RngSeed(2, 7)), sample_unit_vector(9, RngSeed(2, 7)))

    @pytest.mark.parametrize("eps", [0.05, 0.002])
    def test_balanced_entries_tail(self, eps):
        # coordinate-ratio tail bound: P(ratio <= 3 sqrt(ln(1/eps))/eps) >= 1 - 3 n eps
        n, reps = 16, 2000
        threshold = 3.0 * math.sqrt(math.log(1.0 / eps)) / eps
        good = 0
        for r in range(reps):
            v = np.abs(sample_unit_vector(n, RngSeed(77, r)))
            if v.max() / v.min() <= threshold:
                good += 1
        assert good / reps >= max(0.0, 1.0 - 3.0 * n * eps)


class TestUnitaryExp:
    def test_zero_matrix_gives_identity(self):
        U = unitary_exp(np.zeros((3, 3), dtype=complex), 1e-10)
        assert np.array_equal(U, np.eye(3, dtype=complex))

    def test_diagonal_quarter_and_half(self):
        U = unitary_exp(np.diag([0.5, 0.25]).astype(complex), 1e-12)
        expected = np.diag([-1.0 + 0j, 1j])
        assert np.abs(U - expected).max() <= 1e-12

    def test_against_oracle_diagonalization(self):
        A, lam, _ = random_hermitian_in_range(8, seed=42)
        dec = oracle.jacobi_eigh(A)
        expected = (dec.vectors * np.exp(2j * np.pi * dec.values)) @ dec.vectors.conj().T
        U = unitary_exp(A, 1e-10)
        assert oracle.spectral_norm(U - expected) <= 1e-10

    def test_rejects_non_hermitian(self):
        bad = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        with pytest.raises(ValueError):
            unitary_exp(bad, 1e-8)

    @pytest.mark.parametrize("eps", [0.0, 1.0, -1e-3])
    def test_rejects_bad_eps(self, eps):
        with pytest.raises(ValueError):
            unitary_exp(np.zeros((2, 2), dtype=complex), eps)

    def test_output_unitary_and_commutes(self):
        A, _, _ = random_hermitian_in_range(10, seed=5)
        U = unitary_exp(A, 1e-10)
        n = A.shape[0]
        assert np.linalg.norm(U.conj().T @ U - np.eye(n)) <= n * 1e-10
        assert np.linalg.norm(U @ A - A @ U) <= 1e-9

    def test_out_of_range_spectrum_trips_unitarity_check(self):
        with pytest.raises(ValueError, match="unitarity"):
            unitary_exp(np.diag([100.0]).astype(complex), 1e-10)


class TestMatPower:
    def test_zero_power(self):
        U = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        assert np.array_equal(mat_power(U, 0), np.eye(2, dtype=complex))

    def test_i_fourth(self):
        U = np.diag([1j])
        assert np.abs(mat_power(U, 4) - np.eye(1)).max() <= 1e-15

    def test_matches_naive_product(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        U = np.linalg.qr(X)[0]
        naive = np.eye(6, dtype=complex)
        for _ in range(13):
            naive = naive @ U
        assert np.linalg.norm(mat_power(U, 13) - naive) <= 1e-12

    def test_power_addition_large_exponent(self):
        A, _, _ = random_hermitian_in_range(6, seed=3)
        U = unitary_exp(A, 1e-12)
        a, b = 123_456, 654_321
        lhs = mat_power(U, a + b)
        rhs = mat_power(U, a) @ mat_power(U, b)
        assert np.linalg.norm(lhs - rhs) <= 1e-11

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            mat_power(np.eye(2, dtype=complex), -1)


class TestOpNormUpper:
    def test_identity(self):
        assert op_norm_upper(np.eye(4, dtype=complex)) == 1.0

    def test_diagonal(self):
        assert op_norm_upper(np.diag([3.0, -5.0]).astype(complex)) == 5.0

    def test_upper_bounds_oracle_norm(self):
        for s in range(5):
            rng = np.random.default_rng(100 + s)
            X = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
            A = (X + X.conj().T) / 2.0
            assert op_norm_upper(A) >= oracle.spectral_norm(A) - 1e-12


class TestRescaleToRange:
    def test_zero_matrix(self):
        out, tr = rescale_to_range(np.zeros((3, 3), dtype=complex))
        assert np.allclose(out, 0.45 * np.eye(3), atol=1e-15)
        assert np.allclose(tr.invert(np.diag(out).real), 0.0, atol=1e-15)

    def test_symmetric_diagonal(self):
        out, tr = rescale_to_range(np.diag([-1.0, 1.0]).astype(complex))
        assert np.allclose(np.diag(out).real, [0.05, 0.85], atol=1e-15)
        assert np.allclose(tr.invert(np.array([0.05, 0.85])), [-1.0, 1.0], atol=1e-12)

    def test_transform_roundtrip(self):
        _, tr = rescale_to_range(gue_sample(6, RngSeed(4)))
        lam = np.linspace(-3.0, 3.0, 11)
        assert np.abs(tr.invert(tr.apply(lam)) - lam).max() <= 1e-14 * (1 + np.abs(lam).max())

    def test_eigenvectors_preserved_and_spectrum_in_range(self):
        A = gue_sample(8, RngSeed(21))
        out, tr = rescale_to_range(A)
        da = oracle.jacobi_eigh(A)
        do = oracle.jacobi_eigh(out)
        assert do.values.min() >= 0.05 - 1e-12
        assert do.values.max() <= 0.85 + 1e-12
        # same eigenvectors, in the same (descending) order since scale > 0
        for i in range(8):
            assert phase_dist(do.vectors[:, i], da.vectors[:, i]) <= 1e-9
        assert np.abs(tr.invert(do.values) - da.values).max() <= 1e-10


class TestPhaseHelpers:
    def test_canonical_phase_largest_coordinate_real_positive(self):
        v = np.array([0.3 - 0.1j, -0.8j, 0.2], dtype=complex)
        w = canonical_phase(v)
        i0 = int(np.argmax(np.abs(w)))
        assert w[i0].imag == pytest.approx(0.0, abs=1e-15)
        assert w[i0].real > 0

    def test_phase_dist_quotients_global_phase(self):
        v = sample_unit_vector(5, RngSeed(1))
        assert phase_dist(v * np.exp(0.73j), v) <= 1e-7
        w = sample_unit_vector(5, RngSeed(2))
        assert phase_dist(v, w) > 0.1
