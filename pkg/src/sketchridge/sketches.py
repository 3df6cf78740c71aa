"""Oblivious sketching transforms: CountSketch, OSNAP, TensorSketch, Gaussian.

A sparse sketch is an ``m x d`` random matrix with exactly ``s`` nonzero
entries of value ``+-1/sqrt(s)`` in every column, the nonzero rows drawn
uniformly without replacement.  CountSketch is the ``s = 1`` case.  The
dense Gaussian family (entries ``N(0, 1/m)``) is provided as a verification
baseline only.

Randomness comes from a counter-based hash keyed by ``(seed, column,
counter)``, so any single column can be materialized in O(s) time without
generating its predecessors.  That property is what lets the streaming
module process turnstile updates in O(s) work and O(1) sketch memory.
Regenerating a sketch from its :class:`SketchSpec` is bit-identical.
"""

import json
from dataclasses import dataclass, replace

import numba
import numpy as np

__all__ = [
    "FAMILIES",
    "SketchSpec",
    "SparseSketch",
    "GaussianSketch",
    "IdentitySketch",
    "TensorSketchPair",
    "sketch_new",
    "sketch_column",
    "make_sketch",
    "gaussian_sketch",
    "apply_sketch",
    "apply_sketch_to_col_update",
    "tensorsketch_pair",
    "tensorsketch_combine",
]

FAMILIES = ("countsketch", "osnap", "gaussian")

# ---------------------------------------------------------------------------
# Counter-based pseudorandom function (SplitMix64 finalizer).
#
# Two implementations that must agree bit for bit: a python-int scalar path
# used when materializing a single column, and a vectorized uint64 path used
# for bulk construction.  test_sketches cross-checks them.
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB

# stream tags keep the per-column draws of unrelated tables decorrelated
_TAG_SPARSE = 0x5350
_TAG_TS_HASH1 = 0x5431
_TAG_TS_HASH2 = 0x5432


def _mix_int(z):
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * _MULT1) & _MASK64
    z = ((z ^ (z >> 27)) * _MULT2) & _MASK64
    return z ^ (z >> 31)


def _mix_u64(z):
    with np.errstate(over="ignore"):
        z = z + np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MULT1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MULT2)
        return z ^ (z >> np.uint64(31))


def _column_state(seed, tag, col):
    z = _mix_int((seed & _MASK64) ^ _mix_int(tag))
    return _mix_int(z ^ _mix_int(col))


def _column_state_vec(seed, tag, cols):
    z = _mix_int((seed & _MASK64) ^ _mix_int(tag))
    return _mix_u64(np.uint64(z) ^ _mix_u64(cols.astype(np.uint64)))


def _draw_int(state, k):
    return _mix_int((state + k * _GOLDEN) & _MASK64)


def _draw_vec(state, k):
    with np.errstate(over="ignore"):
        return _mix_u64(state + np.uint64((k * _GOLDEN) & _MASK64))


# ---------------------------------------------------------------------------
# Specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SketchSpec:
    """Parameters that fully determine a sketch: ``(family, m, d, s, seed)``.

    ``m`` is the number of rows, ``d`` the number of columns (the dimension
    being compressed) and ``s`` the number of nonzeros per column.  The
    sketch itself is never serialized; it is regenerated from the spec.
    """

    family: str
    m: int
    d: int
    s: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", str(self.family).lower())
        if self.family not in FAMILIES:
            raise ValueError(
                "unknown sketch family %r (expected one of %s)"
                % (self.family, ", ".join(FAMILIES))
            )
        if self.m < 1 or self.d < 1:
            raise ValueError("invalid spec: need m >= 1 and d >= 1, got m=%d d=%d"
                             % (self.m, self.d))
        if not 1 <= self.s <= self.m:
            raise ValueError("invalid spec: need 1 <= s <= m, got s=%d m=%d"
                             % (self.s, self.m))
        if self.family == "countsketch" and self.s != 1:
            raise ValueError("countsketch requires s = 1, got s=%d" % self.s)

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def to_json(self):
        return json.dumps(
            {"family": self.family, "m": self.m, "d": self.d,
             "s": self.s, "seed": self.seed}
        )

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        return cls(family=obj["family"], m=int(obj["m"]), d=int(obj["d"]),
                   s=int(obj["s"]), seed=int(obj["seed"]))


# ---------------------------------------------------------------------------
# Sparse sketch construction
# ---------------------------------------------------------------------------


def _sample_column(spec, j):
    """Rows and signs of column ``j``: Floyd sampling driven by the column PRF."""
    m, s = spec.m, spec.s
    state = _column_state(spec.seed, _TAG_SPARSE, j)
    rows = []
    for k in range(s):
        t = m - s + k
        # modulo bias is ~ m / 2^64, irrelevant at any reachable m
        r = _draw_int(state, k) % (t + 1)
        if r in rows:
            r = t
        rows.append(r)
    signs = [1.0 if _draw_int(state, s + k) & 1 else -1.0 for k in range(s)]
    return np.array(rows, dtype=np.int64), np.array(signs)


def sketch_column(spec, j):
    """Materialize column ``j`` of the sketch alone, in O(s) time.

    Returns ``(rows, signs)``; the implied nonzero values are
    ``signs / sqrt(s)``.  Bit-identical to the corresponding column of
    :func:`sketch_new`.
    """
    if spec.family == "gaussian":
        raise ValueError("gaussian sketches have no sparse columns")
    if not 0 <= j < spec.d:
        raise IndexError("column %d out of range for d=%d" % (j, spec.d))
    return _sample_column(spec, j)


def _sample_all_columns(spec):
    """Vectorized version of :func:`_sample_column` over every column."""
    m, d, s = spec.m, spec.d, spec.s
    state = _column_state_vec(spec.seed, _TAG_SPARSE, np.arange(d))
    chosen = np.empty((s, d), dtype=np.int64)
    for k in range(s):
        t = m - s + k
        r = (_draw_vec(state, k) % np.uint64(t + 1)).astype(np.int64)
        if k:
            dup = (chosen[:k] == r).any(axis=0)
            r = np.where(dup, t, r)
        chosen[k] = r
    sign_bits = np.stack([_draw_vec(state, s + k) for k in range(s)])
    signs = np.where(sign_bits & np.uint64(1), 1.0, -1.0)
    return np.ascontiguousarray(chosen.T), np.ascontiguousarray(signs.T)


@numba.njit(cache=True)
def _scatter_apply(rows, signs, m, scale, mat):
    """Dense result of S @ mat for a sparse sketch given per-column nonzeros."""
    d, s = rows.shape
    n = mat.shape[1]
    out = np.zeros((m, n))
    for j in range(d):
        mj = mat[j]
        for k in range(s):
            target = out[rows[j, k]]
            c = signs[j, k] * scale
            for t in range(n):
                target[t] += c * mj[t]
    return out


@dataclass(frozen=True, eq=False)
class SparseSketch:
    """A materialized CountSketch/OSNAP matrix in per-column nonzero form.

    ``rows[j]`` holds the ``s`` distinct row indices of column ``j`` and
    ``signs[j]`` the matching signs; every nonzero has magnitude
    ``1/sqrt(s)`` exactly.  Instances are immutable and safely shareable.
    """

    spec: SketchSpec
    rows: np.ndarray   # (d, s) int64
    signs: np.ndarray  # (d, s) float64, +-1

    @property
    def scale(self):
        return 1.0 / np.sqrt(self.spec.s)

    def apply(self, mat):
        """Compute ``S @ mat`` for a dense ``(d, k)`` matrix in O(nnz(mat) s)."""
        mat = np.ascontiguousarray(mat, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[0] != self.spec.d:
            raise ValueError(
                "sketch/matrix dimension mismatch: sketch is %dx%d, operand %r"
                % (self.spec.m, self.spec.d, mat.shape)
            )
        return _scatter_apply(self.rows, self.signs, self.spec.m, self.scale, mat)

    def update_column(self, j, v, acc):
        """Add ``v`` times column ``j`` of the sketch into ``acc`` (length m)."""
        if not 0 <= j < self.spec.d:
            raise IndexError("column %d out of range for d=%d" % (j, self.spec.d))
        if acc.shape != (self.spec.m,):
            raise ValueError("accumulator has shape %r, expected (%d,)"
                             % (acc.shape, self.spec.m))
        if v != 0.0:
            acc[self.rows[j]] += (v * self.scale) * self.signs[j]

    def column(self, j):
        """Column ``j`` as a dense length-``m`` vector."""
        out = np.zeros(self.spec.m)
        self.update_column(j, 1.0, out)
        return out

    def densify(self):
        out = np.zeros((self.spec.m, self.spec.d))
        cols = np.repeat(np.arange(self.spec.d), self.spec.s)
        out[self.rows.ravel(), cols] = self.signs.ravel() * self.scale
        return out


def sketch_new(spec):
    """Draw the sparse sketch described by ``spec``.

    Deterministic: the same spec always yields a bit-identical structure.
    """
    if spec.family == "gaussian":
        raise ValueError("sketch_new handles sparse families; use gaussian_sketch")
    rows, signs = _sample_all_columns(spec)
    return SparseSketch(spec=spec, rows=rows, signs=signs)


@dataclass(frozen=True, eq=False)
class GaussianSketch:
    """Dense ``N(0, 1/m)`` sketch; verification baseline, never used by solvers."""

    spec: SketchSpec
    mat: np.ndarray

    def apply(self, mat):
        mat = np.asarray(mat, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[0] != self.spec.d:
            raise ValueError(
                "sketch/matrix dimension mismatch: sketch is %dx%d, operand %r"
                % (self.spec.m, self.spec.d, mat.shape)
            )
        return self.mat @ mat

    def densify(self):
        return self.mat.copy()


def gaussian_sketch(spec):
    if spec.family != "gaussian":
        raise ValueError("gaussian_sketch needs a gaussian spec, got %r" % spec.family)
    rng = np.random.default_rng(spec.seed)
    mat = rng.standard_normal((spec.m, spec.d)) / np.sqrt(spec.m)
    return GaussianSketch(spec=spec, mat=mat)


class IdentitySketch:
    """The exact ``d x d`` identity embedding (``S^T S = I``).

    Collapses any sketched estimator to its exact counterpart; used as the
    zero-distortion reference in tests and by the command line interface.
    """

    def __init__(self, d):
        self.d = int(d)
        self.m = self.d
        self.spec = None

    def apply(self, mat):
        mat = np.asarray(mat, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[0] != self.d:
            raise ValueError(
                "sketch/matrix dimension mismatch: sketch is %dx%d, operand %r"
                % (self.d, self.d, mat.shape)
            )
        return mat.copy()

    def densify(self):
        return np.eye(self.d)


def make_sketch(spec):
    """Materialize whatever family ``spec`` names."""
    if spec.family == "gaussian":
        return gaussian_sketch(spec)
    return sketch_new(spec)


def apply_sketch(sketch, mat):
    """``sketch @ mat`` with dimension validation; see ``SparseSketch.apply``."""
    return sketch.apply(mat)


def apply_sketch_to_col_update(sketch, j, v, acc):
    """In-place ``acc += v * S[:, j]``; O(s) work."""
    sketch.update_column(j, v, acc)


# ---------------------------------------------------------------------------
# TensorSketch
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TensorSketchPair:
    """Two independent CountSketch hash/sign tables feeding one combiner.

    ``h1/s1`` map the first input space of dimension ``d1`` into ``[m]``
    with signs, likewise ``h2/s2`` for the second.  The combiner output for
    ``(u, w)`` is the length-``m`` circular convolution of the two hashed
    inputs, an unbiased sketch of the outer product ``u (x) w``.
    """

    m: int
    d1: int
    d2: int
    seed: int
    h1: np.ndarray
    s1: np.ndarray
    h2: np.ndarray
    s2: np.ndarray


def _hash_table(seed, tag, d, m):
    state = _column_state_vec(seed, tag, np.arange(d))
    h = (_draw_vec(state, 0) % np.uint64(m)).astype(np.int64)
    sg = np.where(_draw_vec(state, 1) & np.uint64(1), 1.0, -1.0)
    return h, sg


def tensorsketch_pair(m, d1, d2, seed):
    """Draw the two hash/sign tables of a degree-2 TensorSketch combiner."""
    if m < 1 or d1 < 1 or d2 < 1:
        raise ValueError("m, d1, d2 must all be >= 1")
    h1, s1 = _hash_table(seed, _TAG_TS_HASH1, d1, m)
    h2, s2 = _hash_table(seed, _TAG_TS_HASH2, d2, m)
    return TensorSketchPair(m=int(m), d1=int(d1), d2=int(d2), seed=int(seed),
                            h1=h1, s1=s1, h2=h2, s2=s2)


def _countsketch_rows(h, sg, x, m):
    """Hash the rows of ``x`` (batch, d) into (batch, m) CountSketch bins."""
    buf = np.zeros((m, x.shape[0]))
    np.add.at(buf, h, (x * sg).T)
    return buf.T


# direct circular convolution below this length; FFT with power-of-two
# padding above (cross-checked against the direct path in tests)
_FFT_THRESHOLD = 256


def _circular_convolve(a, b):
    """Row-wise circular convolution of two (batch, m) arrays."""
    m = a.shape[-1]
    if m < _FFT_THRESHOLD:
        idx = (np.arange(m)[:, None] - np.arange(m)[None, :]) % m
        out = np.empty_like(a)
        step = max(1, 8_000_000 // (m * m))
        for i0 in range(0, a.shape[0], step):
            sl = slice(i0, i0 + step)
            out[sl] = np.einsum("nj,nkj->nk", a[sl], b[sl][:, idx])
        return out
    pad = 1 << (2 * m - 2).bit_length()
    fa = np.fft.rfft(a, n=pad, axis=-1)
    fb = np.fft.rfft(b, n=pad, axis=-1)
    lin = np.fft.irfft(fa * fb, n=pad, axis=-1)[..., : 2 * m - 1]
    out = lin[..., :m].copy()
    # fold the linear-convolution tail back onto indices mod m
    out[..., : m - 1] += lin[..., m:]
    return out


def tensorsketch_combine_rows(ts, u, w):
    """Batched combiner: rows of ``u`` (batch, d1) with rows of ``w`` (batch, d2)."""
    u = np.atleast_2d(np.asarray(u, dtype=np.float64))
    w = np.atleast_2d(np.asarray(w, dtype=np.float64))
    if u.shape[-1] != ts.d1 or w.shape[-1] != ts.d2:
        raise ValueError(
            "combiner length mismatch: inputs %r/%r, tables %d/%d"
            % (u.shape, w.shape, ts.d1, ts.d2)
        )
    if u.shape[0] != w.shape[0]:
        raise ValueError("batch sizes differ: %d vs %d" % (u.shape[0], w.shape[0]))
    cu = _countsketch_rows(ts.h1, ts.s1, u, ts.m)
    cw = _countsketch_rows(ts.h2, ts.s2, w, ts.m)
    return _circular_convolve(cu, cw)


def tensorsketch_combine(ts, u, w):
    """Combine two vectors: circular convolution of their hashed images."""
    u = np.asarray(u, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if u.ndim != 1 or w.ndim != 1:
        raise ValueError("tensorsketch_combine expects vectors")
    return tensorsketch_combine_rows(ts, u[None, :], w[None, :])[0]
