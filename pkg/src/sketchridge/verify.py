"""Statistical verification of sketch guarantees.

Every probe here measures one of the quantities the solver's accuracy rests
on: the approximate-matrix-multiplication (AMM) error
``||M^T S^T S N - M^T N||_F / (||M||_F ||N||_F)``, the subspace-embedding
distortion ``||V^T S^T S V - I||_2`` for orthonormal ``V``, the first two
moments of ``||S x||^2`` for unit ``x``, Frobenius-norm preservation of
CountSketch, and an empirical sweep of AMM error against the sketch row
count (which exhibits the ``1/sqrt(m)`` scaling that makes ``m ~ 1/eps^2``
rows necessary and sufficient).

All probes are deterministic functions of their seeds; trial aggregation
sorts before quantile extraction so results do not depend on evaluation
order.
"""

import csv
from dataclasses import dataclass, replace
from typing import List, NamedTuple, Tuple

import numpy as np

from .linalg import symmetric_eigenvalues
from .sketches import IdentitySketch, SketchSpec, make_sketch

__all__ = [
    "AmmReport",
    "DistortionReport",
    "JlMomentReport",
    "SweepCurve",
    "amm_error",
    "subspace_distortion",
    "jl_moment_estimate",
    "frobenius_preservation_check",
    "amm_lowerbound_probe",
    "haar_orthonormal",
    "write_curve_csv",
]


def _sketch_params(sketch):
    spec = getattr(sketch, "spec", None)
    if spec is None:
        return getattr(sketch, "m", 0), 0, 0
    return spec.m, spec.s, spec.seed


@dataclass(frozen=True)
class AmmReport:
    """Normalized product error of one sketch draw on one matrix pair."""

    epsilon_hat: float
    m: int
    s: int
    seed: int


def amm_error(sketch, mat_m, mat_n):
    """Measure ``||M^T S^T S N - M^T N||_F / (||M||_F ||N||_F)`` exactly."""
    mat_m = np.asarray(mat_m, dtype=np.float64)
    mat_n = np.asarray(mat_n, dtype=np.float64)
    if mat_m.ndim != 2 or mat_n.ndim != 2 or mat_m.shape[0] != mat_n.shape[0]:
        raise ValueError(
            "amm_error operands must share their row count, got %r and %r"
            % (mat_m.shape, mat_n.shape)
        )
    norm_m = np.linalg.norm(mat_m)
    norm_n = np.linalg.norm(mat_n)
    if norm_m == 0.0 or norm_n == 0.0:
        raise ValueError("amm_error is undefined for zero-norm operands")
    sm = sketch.apply(mat_m)
    sn = sketch.apply(mat_n)
    err = np.linalg.norm(sm.T @ sn - mat_m.T @ mat_n)
    m, s, seed = _sketch_params(sketch)
    return AmmReport(epsilon_hat=float(err / (norm_m * norm_n)), m=m, s=s, seed=seed)


@dataclass(frozen=True)
class DistortionReport:
    """Spectral-norm distortion of one sketch draw on an orthonormal basis.

    ``sv_norm`` records ``||S V||_2`` (how much the sketch can dilate the
    basis); it is reported, never asserted against.
    """

    distortion: float
    sv_norm: float
    m: int
    s: int
    seed: int


def subspace_distortion(sketch, v):
    """Measure ``||V^T S^T S V - I||_2`` for an orthonormal ``V`` (d x n).

    The error matrix is symmetric, so its spectral norm is the largest
    absolute eigenvalue, computed by the Jacobi rotation method (``n`` is
    small in every use here).
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 2:
        raise ValueError("V must be 2-d, got %r" % (v.shape,))
    n = v.shape[1]
    gram = v.T @ v
    if np.abs(gram - np.eye(n)).max() > 1e-8:
        raise ValueError("V is not orthonormal to within 1e-8")
    sv = sketch.apply(v)
    err = sv.T @ sv - np.eye(n)
    eigs = symmetric_eigenvalues(err)
    m, s, seed = _sketch_params(sketch)
    return DistortionReport(
        distortion=float(np.abs(eigs).max()),
        sv_norm=float(np.sqrt(max(1.0 + eigs[-1], 0.0))),
        m=m, s=s, seed=seed,
    )


class JlMomentReport(NamedTuple):
    mean: float
    l2_moment: float
    std_err: float


def jl_moment_estimate(spec, x, trials, seed_base=0):
    """Monte Carlo moments of ``||S x||^2`` over ``trials`` fresh sketch seeds.

    For a unit vector ``x`` the sparse families satisfy
    ``E ||S x||^2 = 1`` exactly and ``E (||S x||^2 - 1)^2 <= 2/m``; the
    returned ``l2_moment`` is the square root of the sampled second central
    moment, and ``std_err`` the standard error of the sampled mean.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != spec.d:
        raise ValueError("x has shape %r, expected (%d,)" % (x.shape, spec.d))
    if abs(np.linalg.norm(x) - 1.0) > 1e-10:
        raise ValueError("x must be a unit vector")
    if trials < 1000:
        raise ValueError("need at least 1000 trials, got %d" % trials)
    col = np.ascontiguousarray(x[:, None])
    vals = np.empty(trials)
    for t in range(trials):
        sk = make_sketch(replace(spec, seed=seed_base + t))
        sx = sk.apply(col)[:, 0]
        vals[t] = sx @ sx
    mean = float(vals.mean())
    l2 = float(np.sqrt(np.mean((vals - 1.0) ** 2)))
    std_err = float(vals.std(ddof=1) / np.sqrt(trials))
    return JlMomentReport(mean=mean, l2_moment=l2, std_err=std_err)


def frobenius_preservation_check(spec, a, epsilon, trials, seed_base=0):
    """Empirical rate of ``||S A||_F^2`` landing in ``(1 +- eps) ||A||_F^2``.

    Requires a CountSketch spec with ``m >= 200 / eps^2``, the regime where
    the success probability is at least 9/10.
    """
    if spec.family != "countsketch":
        raise ValueError("frobenius preservation check is for countsketch specs")
    if spec.m + 0.5 < 200.0 / epsilon**2:
        raise ValueError(
            "m=%d is below 200/eps^2=%.0f" % (spec.m, 200.0 / epsilon**2)
        )
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != spec.d:
        raise ValueError("A has shape %r, expected %d rows" % (a.shape, spec.d))
    target = np.linalg.norm(a) ** 2
    hits = 0
    for t in range(trials):
        sk = make_sketch(replace(spec, seed=seed_base + t))
        sa = sk.apply(a)
        val = np.linalg.norm(sa) ** 2
        if abs(val - target) <= epsilon * target:
            hits += 1
    return hits / trials


@dataclass
class SweepCurve:
    """Quantiles of a probe statistic across a strictly increasing m-grid."""

    entries: List[Tuple[int, float, float]]  # (m, q50, q90)
    s: int
    seed_base: int
    trials: int

    def __post_init__(self):
        ms = [m for m, _, _ in self.entries]
        if any(b <= a for a, b in zip(ms, ms[1:])):
            raise ValueError("m grid must be strictly increasing, got %r" % (ms,))
        if self.trials < 100:
            raise ValueError("need at least 100 trials per grid point")

    def medians(self):
        return np.array([q50 for _, q50, _ in self.entries])

    def q90s(self):
        return np.array([q90 for _, _, q90 in self.entries])

    def ms(self):
        return np.array([m for m, _, _ in self.entries])

    def loglog_slope(self):
        """Least-squares slope of log(median) against log(m)."""
        lx = np.log(self.ms().astype(np.float64))
        ly = np.log(self.medians())
        lx = lx - lx.mean()
        return float((lx @ (ly - ly.mean())) / (lx @ lx))


def haar_orthonormal(d, n, rng):
    """Haar-distributed d x n orthonormal matrix via sign-fixed QR of a Gaussian."""
    g = rng.standard_normal((d, n))
    q, r = np.linalg.qr(g)
    # forcing the R diagonal positive makes the QR factor exactly Haar
    q *= np.where(np.diag(r) < 0, -1.0, 1.0)
    return q


def amm_lowerbound_probe(n, epsilon, m_grid, trials, d, family="countsketch",
                         s=1, seed=0):
    """Sweep the normalized AMM error on Haar bases against the row count.

    For each ``m`` in the grid, draws ``trials`` independent pairs of a
    random ``d x n`` orthonormal ``A`` and a fresh sketch, and records
    quantiles of ``||A^T S^T S A - I||_F / n`` (the AMM error, since
    ``||A||_F^2 = n``).  The median scales like ``1/sqrt(m)``, mirroring
    the impossibility of sub-``1/eps^2`` row counts.

    ``family="identity"`` forces the exact embedding (requires ``m == d``)
    and is the zero-error reference.
    """
    m_grid = [int(m) for m in m_grid]
    if any(b <= a for a, b in zip(m_grid, m_grid[1:])):
        raise ValueError("m grid must be strictly increasing, got %r" % (m_grid,))
    if epsilon > 0.5 / np.sqrt(n):
        raise ValueError(
            "probe regime needs epsilon <= 0.5/sqrt(n) = %.4f, got %g"
            % (0.5 / np.sqrt(n), epsilon)
        )
    # the oversampling requirement is about the statistical regime; the exact
    # identity reference (m == d) is exempt
    if family != "identity" and d < 4 * max(m_grid):
        raise ValueError("need d >= 4 * max(m_grid) = %d, got %d"
                         % (4 * max(m_grid), d))
    entries = []
    for mi, m in enumerate(m_grid):
        errs = np.empty(trials)
        for t in range(trials):
            rng = np.random.default_rng((seed, mi, t))
            a = haar_orthonormal(d, n, rng)
            if family == "identity":
                if m != d:
                    raise ValueError("identity probe needs m == d")
                sk = IdentitySketch(d)
            else:
                sk = make_sketch(SketchSpec(family=family, m=m, d=d, s=s,
                                            seed=seed + 1_000_003 * mi + t))
            sa = sk.apply(a)
            errs[t] = np.linalg.norm(sa.T @ sa - np.eye(n)) / n
        errs.sort()
        q50, q90 = np.quantile(errs, [0.5, 0.9])
        entries.append((m, float(q50), float(q90)))
    return SweepCurve(entries=entries, s=s, seed_base=seed, trials=trials)


def write_curve_csv(path, curve, comment=None):
    """Emit a sweep as CSV: ``m, s, seed_base, trials, q50, q90`` per row."""
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write("# %s\n" % comment)
        writer = csv.writer(fh)
        writer.writerow(["m", "s", "seed_base", "trials", "q50", "q90"])
        for m, q50, q90 in curve.entries:
            writer.writerow([m, curve.s, curve.seed_base, curve.trials,
                             repr(q50), repr(q90)])
