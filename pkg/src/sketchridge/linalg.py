"""Dense kernels shared by every solver: products, SPD solves, spectral norms.

Matrices are plain float64 ``numpy`` arrays in row-major (C) order and
vectors are 1-d arrays.  All functions are pure; nothing here mutates its
inputs.  Results are bitwise reproducible for a fixed BLAS thread count
(the package defaults to one thread, see :mod:`sketchridge.cli`).
"""

import warnings

import numpy as np
from scipy.linalg import lapack

__all__ = [
    "ConvergenceWarning",
    "NotPositiveDefiniteError",
    "as_matrix",
    "as_vector",
    "matmul",
    "matvec",
    "frobenius_norm",
    "l2_norm",
    "spd_solve",
    "spectral_norm",
    "symmetric_eigenvalues",
]

DEFAULT_POWER_SEED = 0x5EED


class ConvergenceWarning(UserWarning):
    """Issued when an iterative routine returns an unconverged estimate."""


class NotPositiveDefiniteError(ValueError):
    """Cholesky factorization hit a non-positive pivot.

    Attributes
    ----------
    pivot : int
        Zero-based index of the failing pivot.
    """

    def __init__(self, pivot):
        self.pivot = int(pivot)
        super().__init__(
            "matrix is not positive definite (pivot %d is not positive)" % self.pivot
        )


def as_matrix(a, name="matrix"):
    """Coerce ``a`` to a C-contiguous float64 2-d array, validating finiteness."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("%s must be 2-dimensional, got shape %r" % (name, a.shape))
    if not np.isfinite(a).all():
        raise ValueError("%s contains non-finite entries" % name)
    return a


def as_vector(v, name="vector"):
    """Coerce ``v`` to a contiguous float64 1-d array, validating finiteness."""
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("%s must be 1-dimensional, got shape %r" % (name, v.shape))
    if not np.isfinite(v).all():
        raise ValueError("%s contains non-finite entries" % name)
    return v


def matmul(a, b):
    """Classical matrix product ``a @ b`` with explicit shape checking."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(
            "matmul dimension mismatch: %r by %r" % (a.shape, b.shape)
        )
    return a @ b


def matvec(a, v):
    """Matrix-vector product ``a @ v`` with explicit shape checking."""
    a = np.asarray(a, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if a.ndim != 2 or v.ndim != 1 or a.shape[1] != v.shape[0]:
        raise ValueError(
            "matvec dimension mismatch: %r by %r" % (a.shape, v.shape)
        )
    return a @ v


def frobenius_norm(a):
    return float(np.linalg.norm(np.asarray(a, dtype=np.float64)))


def l2_norm(v):
    return float(np.linalg.norm(np.asarray(v, dtype=np.float64)))


def spd_solve(m, rhs, symmetry_rtol=1e-10):
    """Solve ``m @ y = rhs`` for a symmetric positive definite ``m``.

    Uses a Cholesky factorization (LAPACK ``dpotrf``/``dpotrs``).  The input
    must be symmetric to within ``symmetry_rtol`` relative to its largest
    entry.

    Raises
    ------
    NotPositiveDefiniteError
        If a non-positive pivot is encountered; the exception carries the
        zero-based index of the failing pivot.
    """
    m = np.asarray(m, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("spd_solve needs a square matrix, got %r" % (m.shape,))
    if rhs.shape != (m.shape[0],):
        raise ValueError(
            "spd_solve dimension mismatch: %r by %r" % (m.shape, rhs.shape)
        )
    scale = np.abs(m).max()
    if scale > 0 and np.abs(m - m.T).max() > symmetry_rtol * scale:
        raise ValueError("spd_solve input is not symmetric")
    c, info = lapack.dpotrf(m, lower=1)
    if info > 0:
        raise NotPositiveDefiniteError(info - 1)
    if info < 0:
        raise RuntimeError("dpotrf: illegal argument %d" % -info)
    y, info = lapack.dpotrs(c, rhs, lower=1)
    if info != 0:
        raise RuntimeError("dpotrs: illegal argument %d" % -info)
    return y


def spectral_norm(a, tol=1e-6, max_iter=1000, seed=DEFAULT_POWER_SEED):
    """Largest singular value of ``a`` by power iteration on the Gram operator.

    The iteration runs on the smaller of the two Gram matrices (``a @ a.T``
    or ``a.T @ a``; both share the same top eigenvalue) with a seeded random
    start vector, so the result is deterministic for a given ``seed``.  The
    relative accuracy ``tol`` is attained for matrices with a spectral gap;
    if the iteration budget is exhausted first, the best estimate is
    returned and a :class:`ConvergenceWarning` is issued.

    Parameters
    ----------
    a : ndarray (n, d)
        Nonzero matrix.
    tol : float
        Relative stopping tolerance on successive eigenvalue estimates.
    max_iter : int
        Iteration budget.
    seed : int
        Seed for the start vector.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("spectral_norm needs a 2-d array, got %r" % (a.shape,))
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not np.any(a):
        raise ValueError("spectral_norm is undefined for the zero matrix")
    n, d = a.shape
    rng = np.random.default_rng(seed)
    if n <= d:
        op = lambda x: a @ (a.T @ x)
        v = rng.standard_normal(n)
    else:
        op = lambda x: a.T @ (a @ x)
        v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    for _ in range(max_iter):
        w = op(v)
        lam = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # start vector happened to lie in the kernel; restart deterministically
            v = rng.standard_normal(v.shape[0])
            v /= np.linalg.norm(v)
            continue
        v = w / nw
        if abs(lam - lam_prev) <= tol * abs(lam):
            return float(np.sqrt(lam))
        lam_prev = lam
    warnings.warn(
        "power iteration did not converge to tol=%g in %d iterations"
        % (tol, max_iter),
        ConvergenceWarning,
        stacklevel=2,
    )
    return float(np.sqrt(max(lam, 0.0)))


def symmetric_eigenvalues(a, sweep_tol=1e-13, max_sweeps=60):
    """Eigenvalues of a symmetric matrix by the cyclic Jacobi rotation method.

    Intended for the small symmetric error matrices produced by the
    verification probes (tens of rows); for that regime the quadratic
    per-sweep cost is irrelevant and the method converges to machine
    precision in a handful of sweeps.

    Returns the eigenvalues in ascending order.
    """
    a = np.array(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("symmetric_eigenvalues needs a square matrix")
    n = a.shape[0]
    if n == 1:
        return a[0, :1].copy()
    scale = np.abs(a).max()
    if scale == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= sweep_tol * scale:
                    continue
                rotated = True
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.hypot(1.0, tau))
                else:
                    t = 1.0 / (tau - np.hypot(1.0, tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                a[p, q] = a[q, p] = 0.0
        if not rotated:
            break
    return np.sort(np.diag(a))
