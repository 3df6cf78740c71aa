"""Quickstart: exact ridge regression versus the sketched solver.

Generates a short wide Gaussian instance, solves it exactly, then solves it
with a single sparse sketch and with two sketched iterations, printing the
relative errors and cost ratios side by side.
"""

import numpy as np

from sketchridge import (
    SketchSpec,
    cost,
    gen_gaussian_instance,
    one_shot_solution,
    ridge_exact,
    ridge_sketched_iterative,
    sketch_factory,
    sketch_new,
)

n, d = 100, 1500
problem, sigma = gen_gaussian_instance(n, d, seed=0, target_ratio=1.0)
print("instance: A is %dx%d, sigma^2/lambda = %.3f" % (n, d, sigma**2 / problem.lam))

x_star = ridge_exact(problem)
opt = cost(problem, x_star)
print("exact optimum cost: %.6f" % opt)

# one sketch, one solve: the Gram matrix shrinks from d columns to m
spec = SketchSpec("osnap", m=500, d=d, s=4, seed=42)
x_one = one_shot_solution(problem, sketch_new(spec))
rel = np.linalg.norm(x_one - x_star) / np.linalg.norm(x_star)
print("one-shot  (m=%d, s=%d): rel err %.4f, cost ratio %.5f"
      % (spec.m, spec.s, rel, cost(problem, x_one) / opt))

# iterating with fresh sketches squares the error each round
for t in (1, 2, 3):
    report = ridge_sketched_iterative(problem, t, sketch_factory(spec),
                                      x_star=x_star)
    print("iterative t=%d: rel err %.6f, cost ratio %.7f"
          % (t, report.rel_residuals[-1], report.cost / opt))
