import numpy as np
import pytest
from hypothesis import given, settings
from numpy.testing import assert_allclose

from tdoa_denoise import (
    DegenerateMatrixError,
    InvalidMatrixError,
    check_skew_symmetric,
    compose,
    decompose,
    from_toas,
    is_consistent,
    svd_params,
)

from conftest import gauge_vectors, skew_matrices, toa_vectors

MS = 1e-3

# Pairwise differences of tau = (1, 2, 3) ms, the worked example used
# throughout the suite.
M_123 = MS * np.array([
    [0.0, -1.0, -2.0],
    [1.0, 0.0, -1.0],
    [2.0, 1.0, 0.0],
])


class TestFromToas:
    def test_equal_toas_give_zero_matrix(self):
        m = from_toas(np.array([1.0, 1.0, 1.0]) * MS)
        assert np.array_equal(m, np.zeros((3, 3)))

    def test_hand_example(self):
        m = from_toas(np.array([1.0, 2.0, 3.0]) * MS)
        assert_allclose(m, M_123, rtol=0, atol=0)

    def test_single_sensor_rejected(self):
        with pytest.raises(InvalidMatrixError):
            from_toas(np.array([5.0]))

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidMatrixError):
            from_toas(np.array([1.0, np.nan]))
        with pytest.raises(InvalidMatrixError):
            from_toas(np.array([1.0, np.inf, 2.0]))

    @given(toa_vectors())
    def test_exactly_skew_symmetric(self, tau):
        m = from_toas(tau)
        assert np.array_equal(m, -m.T)
        assert np.all(np.diag(m) == 0.0)

    @given(toa_vectors())
    def test_numerical_rank_at_most_two(self, tau):
        m = from_toas(tau)
        sv = np.linalg.svd(m, compute_uv=False)
        if np.all(tau == tau[0]):
            assert sv[0] == 0.0
        elif m.shape[0] > 2:
            assert sv[2] <= 1e-10 * sv[0]


class TestComposeDecompose:
    def test_compose_zero_vector(self):
        assert np.array_equal(compose(np.zeros(4)), np.zeros((4, 4)))

    def test_compose_hand_example(self):
        x = np.array([-np.sqrt(3), 0.0, np.sqrt(3)]) * MS
        assert_allclose(compose(x), M_123, rtol=0, atol=1e-18)

    def test_decompose_zero(self):
        assert np.array_equal(decompose(np.zeros((5, 5))), np.zeros(5))

    def test_decompose_hand_example(self):
        x = decompose(M_123)
        assert_allclose(x, np.array([-np.sqrt(3), 0.0, np.sqrt(3)]) * MS, atol=1e-18)

    @given(skew_matrices())
    def test_decompose_orthogonal_to_ones(self, m):
        x = decompose(m)
        assert abs(x.sum()) <= 1e-12 * max(1.0, np.linalg.norm(x))

    @given(toa_vectors())
    def test_round_trip_on_consistent_matrices(self, tau):
        m = from_toas(tau)
        back = compose(decompose(m))
        assert np.linalg.norm(back - m) <= 1e-12 * max(1.0, np.linalg.norm(m))

    @given(gauge_vectors())
    def test_kernel_quotient(self, x):
        # Adding a constant to every coordinate leaves the matrix alone;
        # the recovered vector is the mean-free projection of the input.
        back = decompose(compose(x))
        expected = x - x.mean()
        scale = max(1.0, np.linalg.norm(x))
        assert np.linalg.norm(back - expected) <= 1e-12 * scale
        shifted = compose(x + 7.5)
        assert_allclose(shifted, compose(x), atol=1e-12 * scale)

    @given(gauge_vectors())
    def test_compose_exactly_skew(self, x):
        m = compose(x)
        assert np.array_equal(m, -m.T)

    def test_compose_rejects_bad_input(self):
        with pytest.raises(InvalidMatrixError):
            compose(np.array([1.0]))
        with pytest.raises(InvalidMatrixError):
            compose(np.array([1.0, np.nan]))


class TestSvdParams:
    def test_hand_example(self):
        u_hat, sigma = svd_params(M_123)
        assert sigma == pytest.approx(np.sqrt(6) * MS, rel=1e-14)
        assert_allclose(u_hat, np.array([-1.0, 0.0, 1.0]) / np.sqrt(2), atol=1e-14)

    def test_zero_matrix_degenerate(self):
        with pytest.raises(DegenerateMatrixError):
            svd_params(np.zeros((4, 4)))

    def test_reconstruction_on_random_consistent(self):
        rng = np.random.default_rng(7)
        one = {}
        for _ in range(100):
            n = int(rng.integers(3, 12))
            one.setdefault(n, np.ones(n) / np.sqrt(n))
            m = from_toas(rng.normal(0.0, 1e-3, n))
            u_hat, sigma = svd_params(m)
            rebuilt = sigma * (np.outer(u_hat, one[n]) - np.outer(one[n], u_hat))
            assert np.linalg.norm(rebuilt - m) <= 1e-10 * np.linalg.norm(m)
            assert abs(np.linalg.norm(u_hat) - 1.0) <= 1e-12
            assert abs(u_hat @ one[n]) <= 1e-10


class TestIsConsistent:
    def test_from_toas_is_consistent(self):
        report = is_consistent(M_123)
        assert report
        assert report.residual <= report.threshold

    def test_zero_matrix_is_consistent(self):
        assert is_consistent(np.zeros((3, 3)))

    def test_rank2_impostor_detected(self):
        # Rank-2 skew-symmetric built from two orthonormal vectors that
        # are both orthogonal to the all-ones direction: valid shape,
        # but no gauge vector reproduces it.
        v1 = np.array([1.0, -1.0, 1.0, -1.0]) / 2.0
        v2 = np.array([1.0, 1.0, -1.0, -1.0]) / 2.0
        impostor = np.outer(v1, v2) - np.outer(v2, v1)
        report = is_consistent(impostor)
        assert not report
        assert report.residual > report.threshold

    @given(toa_vectors())
    def test_every_pairwise_difference_matrix_passes(self, tau):
        assert is_consistent(from_toas(tau))


class TestCheckSkew:
    def test_worst_entry_cited(self):
        m = M_123.copy()
        m[0, 1] += 1e-3
        with pytest.raises(InvalidMatrixError, match=r"m\[0,1\]"):
            check_skew_symmetric(m)

    def test_tolerance_respected(self):
        m = M_123.copy()
        m[0, 1] += 1e-13
        check_skew_symmetric(m)  # within the parsed-input tolerance
        m[0, 1] += 1e-11
        with pytest.raises(InvalidMatrixError):
            check_skew_symmetric(m)

    def test_rejects_non_square_and_tiny(self):
        with pytest.raises(InvalidMatrixError):
            check_skew_symmetric(np.zeros((2, 3)))
        with pytest.raises(InvalidMatrixError):
            check_skew_symmetric(np.zeros((1, 1)))
