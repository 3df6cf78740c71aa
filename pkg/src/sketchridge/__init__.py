"""sketchridge: sketched ridge regression and sparse oblivious sketches.

The package splits into small focused modules:

- :mod:`sketchridge.linalg` -- dense kernels (SPD solves, spectral norms)
- :mod:`sketchridge.sketches` -- CountSketch / OSNAP / TensorSketch / Gaussian
- :mod:`sketchridge.ridge` -- exact and sketched ridge solvers
- :mod:`sketchridge.polykernel` -- degree-p polynomial kernel sketch and KRR
- :mod:`sketchridge.streaming` -- two-pass turnstile-streaming solver
- :mod:`sketchridge.verify` -- statistical probes of the sketch guarantees
- :mod:`sketchridge.instances` -- generators with closed-form ground truth
- :mod:`sketchridge.mmio` -- Matrix Market I/O
- :mod:`sketchridge.cli` -- the ``sketchridge`` command line tool
"""

from .instances import gen_gap_hamming, gen_gaussian_instance
from .linalg import (
    ConvergenceWarning,
    NotPositiveDefiniteError,
    frobenius_norm,
    l2_norm,
    matmul,
    matvec,
    spd_solve,
    spectral_norm,
)
from .mmio import read_matrix, write_matrix
from .polykernel import (
    KrrModel,
    PolySketchPlan,
    krr_fit,
    krr_predict,
    make_plan,
    poly_sketch_matrix,
    poly_sketch_vector,
)
from .ridge import (
    RidgeProblem,
    SolveReport,
    cost,
    one_shot_solution,
    ridge_exact,
    ridge_sketched_iterative,
    sketch_factory,
)
from .sketches import (
    GaussianSketch,
    IdentitySketch,
    SketchSpec,
    SparseSketch,
    TensorSketchPair,
    apply_sketch,
    apply_sketch_to_col_update,
    gaussian_sketch,
    make_sketch,
    sketch_column,
    sketch_new,
    tensorsketch_combine,
    tensorsketch_pair,
)
from .streaming import (
    StreamState,
    TurnstileUpdate,
    read_updates,
    stream_finalize_pass1,
    stream_ingest,
    stream_pass2_accumulate,
    stream_solve,
)
from .verify import (
    amm_error,
    amm_lowerbound_probe,
    frobenius_preservation_check,
    jl_moment_estimate,
    subspace_distortion,
)

__version__ = "0.1.0"
