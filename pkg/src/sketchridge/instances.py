"""Test-instance generators with known ground truth.

Two families: dense Gaussian instances whose regularization is tuned to a
target hardness ratio ``sigma^2 / lambda``, and 2-row sign-pattern
("gap-Hamming") instances whose optimal cost has the closed form
``2 lambda / (lambda + 2 N)`` with ``N`` the Hamming distance between the
two rows.  The latter serve as an exact oracle for the solver stack.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import spectral_norm
from .ridge import RidgeProblem

__all__ = [
    "GapHammingInstance",
    "gen_gaussian_instance",
    "gen_gap_hamming",
    "make_gap_hamming",
    "random_gap_hamming",
]


def gen_gaussian_instance(n, d, seed, target_ratio=1.0):
    """Draw an i.i.d. standard normal instance with ``sigma^2/lambda`` on target.

    ``lambda`` is set from the *measured* spectral norm (power iteration),
    so the achieved ratio equals ``target_ratio`` up to the estimator's
    tolerance.  Returns ``(problem, sigma_hat)``.
    """
    if n > d:
        raise ValueError("expected a short wide instance (n <= d), got %dx%d"
                         % (n, d))
    if target_ratio <= 0:
        raise ValueError("target_ratio must be positive")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, d))
    b = rng.standard_normal(n)
    sigma_hat = spectral_norm(a)
    lam = sigma_hat**2 / target_ratio
    return RidgeProblem(A=a, b=b, lam=lam), sigma_hat


@dataclass(frozen=True, eq=False)
class GapHammingInstance:
    """A 2 x d sign-pattern ridge instance with known optimal cost.

    Rows are the two sign vectors, the right-hand side is ``(1, -1)``, and
    ``opt = 2 lam / (lam + 2 hamming)`` exactly.
    """

    x: np.ndarray
    y: np.ndarray
    lam: float
    hamming: int
    opt: float
    problem: RidgeProblem


def gen_gap_hamming(x, y, lam):
    """Build the 2 x d instance for sign vectors ``x, y``; returns ``(problem, opt)``.

    ``opt`` is the closed-form optimal cost ``2 lam / (lam + 2 N)`` where
    ``N`` is the Hamming distance between ``x`` and ``y``.
    """
    inst = make_gap_hamming(x, y, lam)
    return inst.problem, inst.opt


def make_gap_hamming(x, y, lam):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ValueError("x and y must be 1-d arrays of equal length")
    for name, v in (("x", x), ("y", y)):
        if not np.all(np.abs(v) == 1.0):
            raise ValueError("%s must have entries in {+1, -1}" % name)
    hamming = int(np.count_nonzero(x != y))
    lam = float(lam)
    opt = 2.0 * lam / (lam + 2.0 * hamming)
    problem = RidgeProblem(A=np.vstack([x, y]), b=np.array([1.0, -1.0]), lam=lam)
    return GapHammingInstance(x=x, y=y, lam=lam, hamming=hamming, opt=opt,
                              problem=problem)


def random_gap_hamming(d, lam, seed):
    """Random sign vectors of length ``d``; convenience wrapper for sweeps."""
    rng = np.random.default_rng(seed)
    x = rng.choice([-1.0, 1.0], size=d)
    y = rng.choice([-1.0, 1.0], size=d)
    return make_gap_hamming(x, y, lam)
