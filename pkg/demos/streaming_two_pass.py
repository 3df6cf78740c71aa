"""Turnstile streaming: solve a ridge problem from a file of updates.

The matrix never exists in memory.  Pass one folds each additive update
``A[i, j] += v`` into the m x n accumulator S A^T; pass two replays the
file to assemble x = A^T y.  The result matches the in-memory single-sketch
estimator on the assembled matrix to floating point accuracy.
"""

import tempfile
from pathlib import Path

import numpy as np

from sketchridge import (
    RidgeProblem,
    SketchSpec,
    one_shot_solution,
    sketch_new,
    stream_solve,
)

rng = np.random.default_rng(1)
n, d = 20, 200
lam = 2.0

# a stream with duplicate cells and cancellations
updates = []
a = np.zeros((n, d))
for _ in range(5000):
    i, j = int(rng.integers(n)), int(rng.integers(d))
    v = float(rng.standard_normal())
    a[i, j] += v
    updates.append((i, j, v))
b = rng.standard_normal(n)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "updates.txt"
    path.write_text(
        "# i j v\n" + "\n".join("%d %d %.17g" % u for u in updates) + "\n"
    )
    spec = SketchSpec("osnap", m=80, d=d, s=4, seed=7)
    x_stream = stream_solve(path, b, lam, spec)

x_mem = one_shot_solution(RidgeProblem(a, b, lam), sketch_new(spec))
gap = np.linalg.norm(x_stream - x_mem) / np.linalg.norm(x_mem)
print("stream of %d updates, sketch %dx%d with s=%d" % (len(updates), spec.m, d, spec.s))
print("two-pass vs in-memory relative difference: %.2e" % gap)
print("state memory held m*n = %d accumulator entries, never the %d x %d matrix"
      % (spec.m * n, n, d))
