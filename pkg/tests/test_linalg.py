"""Dense kernel tests against independent oracles.

Oracles implemented here and nowhere else: a triple-loop product, Gaussian
elimination with partial pivoting, and LAPACK factorizations (a different
algorithm and code path from the package's power iteration and Jacobi
rotations).
"""

import numpy as np
import pytest

from sketchridge.linalg import (
    ConvergenceWarning,
    NotPositiveDefiniteError,
    frobenius_norm,
    l2_norm,
    matmul,
    matvec,
    spd_solve,
    spectral_norm,
    symmetric_eigenvalues,
)


def triple_loop_matmul(a, b):
    n, k = a.shape
    _, m = b.shape
    out = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for t in range(k):
                acc += a[i, t] * b[t, j]
            out[i, j] = acc
    return out


def gaussian_elimination_solve(m, rhs):
    """Dense Gaussian elimination with partial pivoting; test oracle only."""
    a = np.array(m, dtype=np.float64)
    x = np.array(rhs, dtype=np.float64)
    n = a.shape[0]
    for col in range(n):
        p = col + np.argmax(np.abs(a[col:, col]))
        if p != col:
            a[[col, p]] = a[[p, col]]
            x[[col, p]] = x[[p, col]]
        for row in range(col + 1, n):
            f = a[row, col] / a[col, col]
            a[row, col:] -= f * a[col, col:]
            x[row] -= f * x[col]
    for col in range(n - 1, -1, -1):
        x[col] = (x[col] - a[col, col + 1:] @ x[col + 1:]) / a[col, col]
    return x


class TestMatmul:
    def test_identity(self):
        rng = np.random.default_rng(0)
        m = rng.standard_normal((3, 5))
        np.testing.assert_array_equal(matmul(np.eye(3), m), m)

    def test_annihilator(self):
        rng = np.random.default_rng(1)
        m = rng.standard_normal((4, 3))
        np.testing.assert_array_equal(matmul(m, np.zeros((3, 2))), np.zeros((4, 2)))

    def test_against_triple_loop(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((5, 4))
        b = rng.standard_normal((4, 3))
        got = matmul(a, b)
        want = triple_loop_matmul(a, b)
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=0)

    def test_dimension_mismatch_names_both_shapes(self):
        with pytest.raises(ValueError, match=r"\(2, 3\).*\(2, 3\)"):
            matmul(np.zeros((2, 3)), np.zeros((2, 3)))

    def test_associativity(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((4, 6))
        b = rng.standard_normal((6, 5))
        c = rng.standard_normal((5, 3))
        left = matmul(matmul(a, b), c)
        right = matmul(a, matmul(b, c))
        np.testing.assert_allclose(left, right, rtol=1e-10)


class TestMatvec:
    def test_against_triple_loop(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal((4, 4))
        v = rng.standard_normal(4)
        want = np.array([sum(a[i, j] * v[j] for j in range(4)) for i in range(4)])
        np.testing.assert_allclose(matvec(a, v), want, rtol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="matvec"):
            matvec(np.zeros((2, 3)), np.zeros(2))


class TestNorms:
    def test_frobenius_identity(self):
        assert frobenius_norm(np.eye(3)) == pytest.approx(np.sqrt(3), rel=1e-15)

    def test_l2_zero(self):
        assert l2_norm(np.zeros(5)) == 0.0


class TestSpdSolve:
    def test_identity(self):
        np.testing.assert_array_equal(
            spd_solve(np.eye(2), np.array([3.0, -1.0])), np.array([3.0, -1.0])
        )

    def test_diagonal(self):
        got = spd_solve(np.diag([2.0, 4.0]), np.array([2.0, 4.0]))
        np.testing.assert_allclose(got, [1.0, 1.0], rtol=1e-15)

    def test_against_gaussian_elimination(self):
        rng = np.random.default_rng(5)
        g = rng.standard_normal((6, 6))
        m = g.T @ g + np.eye(6)
        rhs = rng.standard_normal(6)
        got = spd_solve(m, rhs)
        want = gaussian_elimination_solve(m, rhs)
        np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-12)

    @pytest.mark.parametrize("seed", range(8))
    def test_multiply_back_residual(self, seed):
        rng = np.random.default_rng(seed)
        n = rng.integers(2, 12)
        g = rng.standard_normal((n, n))
        m = g.T @ g + 0.5 * np.eye(n)
        rhs = rng.standard_normal(n)
        y = spd_solve(m, rhs)
        resid = np.linalg.norm(m @ y - rhs)
        assert resid <= 1e-8 * (np.linalg.norm(m) * np.linalg.norm(y)
                                + np.linalg.norm(rhs))

    def test_not_positive_definite_reports_pivot(self):
        m = np.diag([1.0, -1.0, 2.0])
        with pytest.raises(NotPositiveDefiniteError) as err:
            spd_solve(m, np.ones(3))
        assert err.value.pivot == 1

    def test_rejects_asymmetric(self):
        m = np.array([[1.0, 0.5], [0.0, 1.0]])
        with pytest.raises(ValueError, match="symmetric"):
            spd_solve(m, np.ones(2))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            spd_solve(np.eye(3), np.ones(2))


class TestSpectralNorm:
    def test_identity(self):
        assert spectral_norm(np.eye(7)) == pytest.approx(1.0, rel=1e-8)

    def test_diagonal(self):
        # default tol is 1e-6; a tighter tol sharpens the estimate
        assert spectral_norm(np.diag([3.0, 1.0, 2.0])) == pytest.approx(3.0, rel=1e-5)
        assert spectral_norm(np.diag([3.0, 1.0, 2.0]), tol=1e-12) == pytest.approx(
            3.0, rel=1e-10
        )

    def test_against_svd_oracle(self):
        rng = np.random.default_rng(6)
        a = rng.standard_normal((8, 12))
        want = np.linalg.svd(a, compute_uv=False)[0]
        assert spectral_norm(a) == pytest.approx(want, rel=1e-4)

    def test_tall_matrix(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((12, 5))
        want = np.linalg.svd(a, compute_uv=False)[0]
        assert spectral_norm(a) == pytest.approx(want, rel=1e-4)

    @pytest.mark.parametrize("seed", range(6))
    def test_bounded_by_frobenius(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((5, 9))
        assert spectral_norm(a) <= frobenius_norm(a) + 1e-12

    def test_rank_one_equals_frobenius(self):
        rng = np.random.default_rng(8)
        a = np.outer(rng.standard_normal(6), rng.standard_normal(4))
        assert spectral_norm(a) == pytest.approx(frobenius_norm(a), rel=1e-8)

    def test_unconverged_warns_and_returns_estimate(self):
        rng = np.random.default_rng(9)
        a = rng.standard_normal((6, 6))
        with pytest.warns(ConvergenceWarning):
            got = spectral_norm(a, max_iter=1)
        assert got > 0

    def test_rejects_zero_matrix(self):
        with pytest.raises(ValueError, match="zero"):
            spectral_norm(np.zeros((3, 3)))

    def test_rejects_bad_tol(self):
        with pytest.raises(ValueError, match="tol"):
            spectral_norm(np.eye(2), tol=0.0)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(10)
        a = rng.standard_normal((6, 9))
        assert spectral_norm(a, seed=123) == spectral_norm(a, seed=123)


class TestJacobiEigenvalues:
    @pytest.mark.parametrize("n", [1, 2, 5, 12, 25])
    def test_against_lapack(self, n):
        rng = np.random.default_rng(n)
        g = rng.standard_normal((n, n))
        m = (g + g.T) / 2
        got = symmetric_eigenvalues(m)
        want = np.linalg.eigvalsh(m)
        np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-10)

    def test_zero_matrix(self):
        np.testing.assert_array_equal(symmetric_eigenvalues(np.zeros((4, 4))),
                                      np.zeros(4))
