"""Sketching the degree-p polynomial feature map without materializing it.

For the kernel ``k(x, y) = <x, y>^p`` the feature map is the p-fold tensor
power ``x^{(x)p}`` of dimension ``d^p``.  The sketch below compresses that
map to ``m`` coordinates directly from ``x``: a complete binary tree whose
``q = 2^ceil(log2 p)`` leaves apply independent OSNAP sketches to ``x``
(padding leaves beyond degree ``p`` sketch the first standard basis vector,
which contributes an exact factor of 1 to the kernel) and whose internal
nodes merge children with TensorSketch combiners.  Inner products of the
outputs are unbiased estimates of ``<x, y>^p``.

Kernel ridge regression rides on top: fitting sketches the feature matrix
once and solves an ``n x n`` system; prediction uses the exact kernel.
"""

import json
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .linalg import spd_solve
from .mmio import read_matrix
from .sketches import (
    SketchSpec,
    SparseSketch,
    TensorSketchPair,
    _mix_int,
    sketch_new,
    tensorsketch_combine_rows,
    tensorsketch_pair,
)

__all__ = [
    "PolySketchPlan",
    "KrrModel",
    "make_plan",
    "poly_sketch_vector",
    "poly_sketch_matrix",
    "krr_fit",
    "krr_predict",
    "krr_predict_batch",
    "save_krr_model",
    "load_krr_model",
]

_TAG_LEAF = 0x4C45
_TAG_NODE = 0x4E4F


def _node_seed(seed, tag, index):
    # 63-bit so the value survives a JSON round trip as an exact integer
    return _mix_int((seed & ((1 << 64) - 1)) ^ _mix_int(tag) ^ _mix_int(index)) >> 1


@dataclass(frozen=True, eq=False)
class PolySketchPlan:
    """The full tree of base sketches for one degree-p transform.

    ``leaves`` holds ``q`` independent OSNAP sketches mapping the input
    dimension ``d`` to ``m``; ``nodes`` holds the ``q - 1`` TensorSketch
    combiners (each ``m, m -> m``) of the complete binary tree, listed
    level by level from the leaves upward.  All seeds are derived from
    ``seed`` and are pairwise distinct.
    """

    p: int
    q: int
    m: int
    d: int
    s: int
    seed: int
    leaves: Tuple[SparseSketch, ...]
    nodes: Tuple[TensorSketchPair, ...]


def make_plan(p, d, m, s=4, seed=0):
    """Build the degree-``p`` sketch plan for inputs of dimension ``d``.

    ``m`` is used at every tree level.  Useful presets (measured at desk
    scale, the asymptotic constants are not sharp): for product-error
    (AMM-type) use alone, ``m ~ 4 p / eps^2`` suffices; to also embed an
    ``n``-dimensional row space at distortion ``eps``, grow the sketch to
    ``m ~ 8 p^4 n / eps^2`` and sparsity ``s ~ p^2 + 2``.
    """
    if p < 1:
        raise ValueError("degree must be >= 1, got %d" % p)
    if d < 1 or m < 1:
        raise ValueError("need d >= 1 and m >= 1")
    q = 1 << (p - 1).bit_length()
    leaves = tuple(
        sketch_new(SketchSpec(family="osnap", m=m, d=d, s=min(s, m),
                              seed=_node_seed(seed, _TAG_LEAF, i)))
        for i in range(q)
    )
    nodes = tuple(
        tensorsketch_pair(m, m, m, seed=_node_seed(seed, _TAG_NODE, i))
        for i in range(q - 1)
    )
    all_seeds = [lf.spec.seed for lf in leaves] + [nd.seed for nd in nodes]
    if len(set(all_seeds)) != len(all_seeds):
        raise RuntimeError("derived seeds collide; change the plan seed")
    return PolySketchPlan(p=int(p), q=q, m=int(m), d=int(d), s=int(min(s, m)),
                          seed=int(seed), leaves=leaves, nodes=nodes)


def _sketch_rows(plan, x):
    """Map each row of ``x`` (batch, d) through the tree; returns (batch, m)."""
    batch = x.shape[0]
    xt = np.ascontiguousarray(x.T)
    level = []
    for i, leaf in enumerate(plan.leaves):
        if i < plan.p:
            level.append(np.ascontiguousarray(leaf.apply(xt).T))
        else:
            # padding leaf: sketch the first basis vector once per leaf and
            # broadcast across the batch (<e1, e1> = 1 leaves the kernel alone)
            e1 = np.zeros((plan.d, 1))
            e1[0, 0] = 1.0
            pad = np.ascontiguousarray(leaf.apply(e1).T)
            level.append(np.broadcast_to(pad, (batch, plan.m)))
    node_idx = 0
    while len(level) > 1:
        nxt = []
        for k in range(0, len(level), 2):
            ts = plan.nodes[node_idx]
            node_idx += 1
            nxt.append(tensorsketch_combine_rows(ts, level[k], level[k + 1]))
        level = nxt
    return level[0]


def poly_sketch_vector(plan, x):
    """Sketch of the degree-p tensor power of one vector; length ``m``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (plan.d,):
        raise ValueError("x has shape %r, expected (%d,)" % (x.shape, plan.d))
    return _sketch_rows(plan, x[None, :])[0]


def poly_sketch_matrix(plan, a):
    """Sketched feature matrix: column ``i`` is the sketch of row ``i`` of ``a``.

    Output shape is ``(m, n)`` for an ``(n, d)`` input; cost is
    ``O(p (s nnz(a) + n m log m))`` and the ``d^p``-dimensional feature
    space is never formed.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] != plan.d:
        raise ValueError("a has shape %r, expected (*, %d)" % (a.shape, plan.d))
    return np.ascontiguousarray(_sketch_rows(plan, a).T)


@dataclass(eq=False)
class KrrModel:
    """Fitted dual coefficients plus everything needed to predict."""

    beta_tilde: np.ndarray
    plan: PolySketchPlan
    lam: float
    A: np.ndarray  # training rows, kept by reference for exact-kernel prediction


def krr_fit(a, b, lam, plan):
    """Fit kernel ridge regression for ``k(x, y) = <x, y>^p`` via sketching.

    Solves ``(Z^T Z + lam I) beta = b`` where ``Z`` is the sketched feature
    matrix; the explicit kernel matrix is never built.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.shape != (a.shape[0],):
        raise ValueError("inconsistent shapes: a %r, b %r" % (a.shape, b.shape))
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if not np.any(b):
        return KrrModel(beta_tilde=np.zeros(a.shape[0]), plan=plan,
                        lam=float(lam), A=a)
    z = poly_sketch_matrix(plan, a)
    gram = z.T @ z
    gram[np.diag_indices_from(gram)] += lam
    beta = spd_solve(gram, b)
    return KrrModel(beta_tilde=beta, plan=plan, lam=float(lam), A=a)


def krr_predict(model, x):
    """Predict one input with the exact kernel: ``sum_i <a_i, x>^p beta_i``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.plan.d,):
        raise ValueError("x has shape %r, expected (%d,)" % (x.shape, model.plan.d))
    return float((model.A @ x) ** model.plan.p @ model.beta_tilde)


def krr_predict_batch(model, queries):
    """Predict each row of ``queries``; exact kernel, no sketching."""
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != model.plan.d:
        raise ValueError(
            "queries have shape %r but the model was trained with d=%d"
            % (queries.shape, model.plan.d)
        )
    return (queries @ model.A.T) ** model.plan.p @ model.beta_tilde


def save_krr_model(path, model, training_path):
    """Serialize a model as JSON; the training matrix travels by file path."""
    obj = {
        "lambda": model.lam,
        "plan": {"p": model.plan.p, "d": model.plan.d, "m": model.plan.m,
                 "s": model.plan.s, "seed": model.plan.seed},
        "beta_tilde": [float(v) for v in model.beta_tilde],
        "training_matrix": str(training_path),
    }
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_krr_model(path):
    with open(path) as fh:
        obj = json.load(fh)
    spec = obj["plan"]
    plan = make_plan(p=int(spec["p"]), d=int(spec["d"]), m=int(spec["m"]),
                     s=int(spec["s"]), seed=int(spec["seed"]))
    a = read_matrix(obj["training_matrix"])
    return KrrModel(
        beta_tilde=np.asarray(obj["beta_tilde"], dtype=np.float64),
        plan=plan,
        lam=float(obj["lambda"]),
        A=a,
    )
