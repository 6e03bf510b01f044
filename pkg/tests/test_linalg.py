import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirset.exceptions import InsufficientData, SingularMatrix
from dirset.linalg import cholesky_factor, moore_penrose, pd_solve, sample_covariance


def random_pd(rng, p):
    b = rng.standard_normal((p + 3, p))
    return b.T @ b / (p + 3) + 0.05 * np.eye(p)


class TestSampleCovariance:
    def test_hand_example(self):
        x = np.array([[1, 0], [0, 1], [-1, -1]], dtype=float)
        expected = np.array([[2, 1], [1, 2]]) / 3.0
        np.testing.assert_allclose(sample_covariance(x), expected, atol=1e-15)

    def test_identical_rows_give_zero(self):
        x = np.tile([2.0, -1.0, 0.5], (6, 1))
        np.testing.assert_allclose(sample_covariance(x), np.zeros((3, 3)), atol=1e-15)

    def test_two_point_symmetric_sample(self):
        a = 1.7
        np.testing.assert_allclose(sample_covariance([[a], [-a]]), [[a * a]], rtol=1e-15)

    def test_rejects_single_row(self):
        with pytest.raises(InsufficientData):
            sample_covariance([[1.0, 2.0]])

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            sample_covariance([[1.0], [np.nan]])

    @given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.integers(2, 20))
    def test_output_is_psd(self, seed, p, extra):
        rng = np.random.default_rng(seed)
        cov = sample_covariance(rng.standard_normal((p + extra, p)))
        w = np.linalg.eigvalsh(cov)
        assert w.min() >= -1e-10 * max(w.max(), 1e-300)


class TestPdSolve:
    def test_identity(self):
        np.testing.assert_allclose(pd_solve(np.eye(2), [3.0, 4.0]), [3.0, 4.0])

    def test_hand_inverse(self):
        a = np.array([[2, 1], [1, 2]]) / 3.0
        np.testing.assert_allclose(pd_solve(a, [1.0, 0.0]), [2.0, -1.0], rtol=1e-12)

    def test_rank_one_raises(self):
        with pytest.raises(SingularMatrix):
            pd_solve(np.ones((2, 2)), [1.0, 0.0])

    @given(st.integers(0, 2**32 - 1), st.integers(1, 15))
    def test_multiply_back(self, seed, p):
        rng = np.random.default_rng(seed)
        a = random_pd(rng, p)
        b = rng.standard_normal(p)
        residual = a @ pd_solve(a, b) - b
        assert np.linalg.norm(residual) <= 1e-8 * max(np.linalg.norm(b), 1.0)

    def test_matrix_rhs(self):
        rng = np.random.default_rng(0)
        a = random_pd(rng, 4)
        b = rng.standard_normal((4, 6))
        np.testing.assert_allclose(a @ pd_solve(a, b), b, atol=1e-10)


class TestMoorePenrose:
    def test_diagonal(self):
        pinv, rank = moore_penrose(np.diag([2.0, 0.0]))
        np.testing.assert_allclose(pinv, np.diag([0.5, 0.0]), atol=1e-15)
        assert rank == 1

    def test_identity(self):
        pinv, rank = moore_penrose(np.eye(3))
        np.testing.assert_allclose(pinv, np.eye(3), atol=1e-15)
        assert rank == 3

    def test_rank_one_projector_is_own_pinv(self):
        rng = np.random.default_rng(5)
        b = rng.standard_normal(4)
        b /= np.linalg.norm(b)
        proj = np.outer(b, b)
        pinv, rank = moore_penrose(proj)
        np.testing.assert_allclose(pinv, proj, atol=1e-12)
        assert rank == 1

    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_penrose_identities(self, seed, p):
        rng = np.random.default_rng(seed)
        w = rng.standard_normal(p)
        w[rng.random(p) < 0.4] = 0.0  # force rank deficiency often
        q, _ = np.linalg.qr(rng.standard_normal((p, p)) + np.eye(p))
        a = (q * w) @ q.T
        a = (a + a.T) / 2
        pinv, rank = moore_penrose(a)
        scale = max(np.abs(w).max(), 1.0)
        assert np.allclose(a @ pinv @ a, a, atol=1e-8 * scale)
        assert np.allclose(pinv @ a @ pinv, pinv, atol=1e-8 * scale)
        assert rank == np.count_nonzero(w)


class TestCholeskyFactor:
    def test_identity(self):
        np.testing.assert_allclose(cholesky_factor(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        np.testing.assert_allclose(
            cholesky_factor(np.diag([4.0, 9.0])), np.diag([2.0, 3.0])
        )

    def test_ar1_closed_form(self):
        a = np.array([[1.0, 0.6], [0.6, 1.0]])
        np.testing.assert_allclose(
            cholesky_factor(a), [[1.0, 0.0], [0.6, 0.8]], rtol=1e-15
        )

    def test_non_pd_raises(self):
        with pytest.raises(SingularMatrix):
            cholesky_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            cholesky_factor(np.array([[1.0, 0.5], [0.1, 1.0]]))

    @given(st.integers(0, 2**32 - 1), st.integers(1, 15))
    def test_roundtrip(self, seed, p):
        rng = np.random.default_rng(seed)
        a = random_pd(rng, p)
        low = cholesky_factor(a)
        np.testing.assert_allclose(low @ low.T, a, rtol=0, atol=1e-10 * np.abs(a).max())
        assert np.allclose(np.triu(low, 1), 0.0)
