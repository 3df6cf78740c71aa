"""Sweep the sketch row count and watch cost and solve time trade off.

On a single Gaussian instance, each grid value of m runs the sketched
solver over a few seeds and reports the mean cost ratio, the mean relative
error, and the measured time against the exact solver.  The cost ratio
decays toward 1 as m grows while the Gram-matrix work grows linearly in m.
The timing win needs the instance to be large enough that Gram matrices
dominate; at desk scale that means a few thousand columns.
"""

import time

import numpy as np
from threadpoolctl import threadpool_limits

from sketchridge import (
    SketchSpec,
    cost,
    gen_gaussian_instance,
    ridge_exact,
    ridge_sketched_iterative,
    sketch_factory,
)

n, d, s, trials = 500, 6000, 8, 5
with threadpool_limits(limits=1):
    problem, _ = gen_gaussian_instance(n, d, seed=5, target_ratio=1.0)

    # warm everything once so the timings below are steady-state
    ridge_sketched_iterative(
        problem, 1, sketch_factory(SketchSpec("osnap", m=256, d=d, s=s, seed=0))
    )
    t0 = time.perf_counter()
    x_star = ridge_exact(problem)
    t_naive = time.perf_counter() - t0
    opt = cost(problem, x_star)
    x_norm = np.linalg.norm(x_star)

    print("exact solve: %.3fs, Opt = %.3f" % (t_naive, opt))
    print("%8s %12s %10s %14s" % ("m", "cost_ratio", "rel_err", "t_alg/t_naive"))
    for m in (750, 1500, 3000):
        ratios, errs, times = [], [], []
        for seed in range(trials):
            factory = sketch_factory(SketchSpec("osnap", m=m, d=d, s=s,
                                                seed=1000 * m + seed))
            t0 = time.perf_counter()
            report = ridge_sketched_iterative(problem, 1, factory)
            times.append(time.perf_counter() - t0)
            ratios.append(report.cost / opt)
            errs.append(np.linalg.norm(report.x_hat - x_star) / x_norm)
        print("%8d %12.5f %10.4f %14.3f"
              % (m, np.mean(ratios), np.mean(errs), np.median(times) / t_naive))
