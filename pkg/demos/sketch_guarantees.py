"""Measure the statistical guarantees the solver rests on.

Three probes: the first two moments of ||S x||^2 for unit x (isometry in
expectation, variance falling like 2/m), CountSketch Frobenius-norm
preservation, and the scaling of the approximate-matrix-multiplication
error with the row count m (the 1/sqrt(m) law that forces m ~ 1/eps^2).
"""

import numpy as np

from sketchridge import (
    SketchSpec,
    amm_lowerbound_probe,
    frobenius_preservation_check,
    jl_moment_estimate,
)

rng = np.random.default_rng(0)

print("== moments of ||S x||^2, OSNAP, 2000 trials each ==")
d = 512
x = rng.standard_normal(d)
x /= np.linalg.norm(x)
for m in (64, 256, 1024):
    rep = jl_moment_estimate(SketchSpec("osnap", m=m, d=d, s=4, seed=0),
                             x, trials=2000, seed_base=m)
    print("  m=%5d: mean %.4f (+- %.4f), L2 moment %.4f vs sqrt(2/m) %.4f"
          % (m, rep.mean, rep.std_err, rep.l2_moment, np.sqrt(2 / m)))

print("== CountSketch Frobenius preservation at m = 200/eps^2 ==")
eps = 0.1
a = rng.standard_normal((300, 8))
a /= np.linalg.norm(a)
rate = frobenius_preservation_check(
    SketchSpec("countsketch", m=round(200 / eps**2), d=300, s=1, seed=0),
    a, eps, trials=200,
)
print("  eps=%.2f: ||SA||_F^2 within (1 +- eps) in %.0f%% of draws" % (eps, 100 * rate))

print("== AMM error vs row count (median over 100 Haar bases) ==")
curve = amm_lowerbound_probe(n=4, epsilon=0.1, m_grid=[64, 256, 1024, 4096],
                             trials=100, d=16384, seed=1)
for (m, q50, q90) in curve.entries:
    print("  m=%5d: median %.4f, 90th pct %.4f" % (m, q50, q90))
print("  log-log slope of the median: %.3f (the 1/sqrt(m) law is -0.5)"
      % curve.loglog_slope())
