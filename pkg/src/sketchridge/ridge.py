"""Ridge regression: exact solve, cost functional, and the sketched solver.

The problem is ``min_x ||A x - b||^2 + lambda ||x||^2`` with ``A`` of shape
``(n, d)``, typically short and wide (``n <= d``).  The exact minimizer is
``x* = A^T (A A^T + lambda I)^{-1} b``, which costs a full ``n x n`` Gram
matrix of ``A``.  The sketched solver replaces that Gram matrix with the
much cheaper ``(S A^T)^T (S A^T)`` for a sparse sketch ``S`` and repairs
the error iteratively: each round solves the sketched system against the
current residual right-hand side with a *fresh* sketch and accumulates the
correction, contracting the error geometrically.
"""

import json
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import as_matrix, as_vector, spd_solve, spectral_norm
from .mmio import read_matrix, write_matrix
from .sketches import make_sketch

__all__ = [
    "RidgeProblem",
    "ProblemStats",
    "SolveReport",
    "cost",
    "ridge_exact",
    "one_shot_solution",
    "ridge_sketched_iterative",
    "sketch_factory",
    "problem_stats",
    "read_problem",
    "write_problem",
    "write_report",
]


@dataclass(frozen=True, eq=False)
class RidgeProblem:
    """A ridge instance ``(A, b, lam)`` with ``lam > 0``."""

    A: np.ndarray
    b: np.ndarray
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "A", as_matrix(self.A, "A"))
        object.__setattr__(self, "b", as_vector(self.b, "b"))
        object.__setattr__(self, "lam", float(self.lam))
        if self.lam <= 0:
            raise ValueError("lambda must be positive, got %g" % self.lam)
        if self.b.shape[0] != self.A.shape[0]:
            raise ValueError(
                "shape mismatch: A is %r but b has length %d"
                % (self.A.shape, self.b.shape[0])
            )
        if not np.any(self.A):
            raise ValueError("A must be nonzero")

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def d(self):
        return self.A.shape[1]

    def transposed(self):
        """Row-major copy of ``A^T``, cached; the sketch kernels stream it."""
        cached = getattr(self, "_at", None)
        if cached is None:
            cached = np.ascontiguousarray(self.A.T)
            object.__setattr__(self, "_at", cached)
        return cached


@dataclass
class ProblemStats:
    """Reporting statistics: spectral norm, hardness ratio, optimal cost."""

    sigma: float
    ratio: float
    opt: Optional[float] = None


def problem_stats(problem, with_opt=True):
    """Measure ``sigma = ||A||_2`` and ``sigma^2 / lambda``; optionally Opt."""
    sigma = spectral_norm(problem.A)
    opt = cost(problem, ridge_exact(problem)) if with_opt else None
    return ProblemStats(sigma=sigma, ratio=sigma**2 / problem.lam, opt=opt)


def cost(problem, x):
    """Evaluate ``||A x - b||^2 + lambda ||x||^2`` exactly."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (problem.d,):
        raise ValueError(
            "x has shape %r, expected (%d,)" % (x.shape, problem.d)
        )
    r = problem.A @ x - problem.b
    return float(r @ r + problem.lam * (x @ x))


def _regularized_gram_solve(gram, lam, rhs):
    # gram is always a freshly formed product here; shift it in place
    gram[np.diag_indices_from(gram)] += lam
    return spd_solve(gram, rhs)


def ridge_exact(problem):
    """Exact minimizer ``x* = A^T (A A^T + lambda I)^{-1} b``."""
    a = problem.A
    y = _regularized_gram_solve(a @ a.T, problem.lam, problem.b)
    return a.T @ y


@dataclass
class SolveReport:
    """Outcome of a sketched solve.

    ``rel_residuals[j]`` is ``||x_partial - x*|| / ||x*||`` after iteration
    ``j + 1`` and is only present when the caller supplied the exact
    solution.  ``wall_time`` is the only non-deterministic field.
    """

    x_hat: np.ndarray
    iterations: int
    cost: float
    rel_residuals: Optional[list] = None
    wall_time: float = 0.0

    def to_dict(self):
        return {
            "x_hat": [float(v) for v in self.x_hat],
            "iterations": self.iterations,
            "cost": self.cost,
            "rel_residuals": self.rel_residuals,
            "wall_time": self.wall_time,
        }


def write_report(path, report, extra=None):
    """Serialize a report as JSON; ``extra`` entries are merged in."""
    obj = report.to_dict()
    if extra:
        obj.update(extra)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sketch_factory(spec):
    """Factory yielding fresh sketches with consecutive seeds per call.

    The iterative solver requires an *independent* sketch in every
    iteration; this advances ``spec.seed`` by one per draw.
    """
    counter = [0]

    def fresh():
        sk = make_sketch(spec.with_seed(spec.seed + counter[0]))
        counter[0] += 1
        return sk

    return fresh


def one_shot_solution(problem, sketch):
    """Single-sketch estimator ``A^T (A S^T S A^T + lambda I)^{-1} b``.

    Identical to :func:`ridge_sketched_iterative` with ``t = 1`` and this
    fixed sketch; exposed separately because the streaming solver and the
    sketch-size probes target exactly this estimator.
    """
    a = problem.A
    z = sketch.apply(problem.transposed())
    y = _regularized_gram_solve(z.T @ z, problem.lam, problem.b)
    return a.T @ y


def ridge_sketched_iterative(problem, t, make_sketch, x_star=None,
                             on_iteration=None):
    """Iterative sketch-and-correct solver.

    Starting from ``b^(0) = b`` the loop computes, per iteration ``j``::

        b^(j) = b^(j-1) - lam * y^(j-1) - A @ x^(j-1)
        y^(j) = (A S_j^T S_j A^T + lam I)^{-1} b^(j)      (fresh sketch S_j)
        x^(j) = A^T y^(j)

    and returns the accumulated ``x_hat = sum_j x^(j)``.  The Gram matrix is
    formed as ``(S A^T)^T (S A^T)``, which is symmetric positive
    semidefinite by construction, so the regularized system is SPD for any
    ``lam > 0``.

    Parameters
    ----------
    problem : RidgeProblem
    t : int
        Number of iterations (>= 1).  Each iteration consumes one fresh
        sketch from ``make_sketch``; seeds must be pairwise distinct.
    make_sketch : callable () -> sketch
        Factory returning an independent sketch with ``spec.d == problem.d``
        per call; see :func:`sketch_factory`.
    x_star : ndarray, optional
        Exact solution.  When given, per-iteration relative errors are
        recorded in the report.
    on_iteration : callable (j, b_j, x_j) -> None, optional
        Observation hook invoked after each iteration with the right-hand
        side it solved against and the correction it produced.
    """
    if t < 1:
        raise ValueError("need at least one iteration, got t=%d" % t)
    a = problem.A
    lam = problem.lam
    n, d = a.shape
    t0 = time.perf_counter()

    if not np.any(problem.b):
        # nothing to fit: the optimum of a homogeneous problem is 0
        report = SolveReport(x_hat=np.zeros(d), iterations=0,
                             cost=cost(problem, np.zeros(d)))
        report.rel_residuals = [] if x_star is not None else None
        report.wall_time = time.perf_counter() - t0
        return report

    at = problem.transposed()
    b_j = problem.b.copy()
    y = np.zeros(n)
    x_j = np.zeros(d)
    x_hat = np.zeros(d)
    seen_seeds = set()
    rel = [] if x_star is not None else None
    x_star_norm = float(np.linalg.norm(x_star)) if x_star is not None else 0.0

    for j in range(1, t + 1):
        if j > 1:
            b_j = b_j - lam * y - a @ x_j
        sketch = make_sketch()
        spec = getattr(sketch, "spec", None)
        if spec is not None:
            if spec.d != d:
                raise ValueError(
                    "sketch dimension mismatch: spec.d=%d but problem has d=%d"
                    % (spec.d, d)
                )
            if spec.seed in seen_seeds:
                raise ValueError(
                    "sketch seed %d reused across iterations; every iteration "
                    "needs an independent sketch" % spec.seed
                )
            seen_seeds.add(spec.seed)
        z = sketch.apply(at)
        y = _regularized_gram_solve(z.T @ z, lam, b_j)
        x_j = a.T @ y
        x_hat = x_hat + x_j
        if on_iteration is not None:
            on_iteration(j, b_j.copy(), x_j.copy())
        if rel is not None:
            denom = x_star_norm if x_star_norm > 0 else 1.0
            rel.append(float(np.linalg.norm(x_hat - x_star)) / denom)

    return SolveReport(
        x_hat=x_hat,
        iterations=t,
        cost=cost(problem, x_hat),
        rel_residuals=rel,
        wall_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Problem I/O: the matrix travels as Matrix Market, b and lambda in a JSON
# sidecar {"b": [...], "lambda": r}.
# ---------------------------------------------------------------------------


def write_problem(matrix_path, sidecar_path, problem, fmt="array"):
    write_matrix(matrix_path, problem.A, fmt=fmt)
    with open(sidecar_path, "w") as fh:
        json.dump({"b": [float(v) for v in problem.b], "lambda": problem.lam},
                  fh, sort_keys=True)
        fh.write("\n")


def read_problem(matrix_path, sidecar_path):
    a = read_matrix(matrix_path)
    with open(sidecar_path) as fh:
        obj = json.load(fh)
    return RidgeProblem(A=a, b=np.asarray(obj["b"], dtype=np.float64),
                        lam=float(obj["lambda"]))
