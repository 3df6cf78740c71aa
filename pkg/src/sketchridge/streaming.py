"""Two-pass turnstile-streaming solver for the single-sketch estimator.

Updates arrive as additive deltas ``((i, j), v)`` to entries of ``A``.
Pass one maintains ``S A^T`` (an ``m x n`` accumulator) using O(s) work per
update: the sketch column for ``j`` is rematerialized on demand from the
spec's counter-based hash, so the state never stores the sketch or ``A``.
After pass one, ``y = ((S A^T)^T (S A^T) + lam I)^{-1} b`` is fixed; pass
two replays the stream to accumulate ``x = A^T y`` one update at a time.
The result matches the in-memory single-sketch estimator on the assembled
matrix.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import spd_solve
from .sketches import SketchSpec, sketch_column

__all__ = [
    "TurnstileUpdate",
    "StreamState",
    "stream_ingest",
    "stream_finalize_pass1",
    "stream_pass2_accumulate",
    "read_updates",
    "stream_solve",
]


@dataclass(frozen=True)
class TurnstileUpdate:
    """One additive delta: ``A[i, j] += v``."""

    i: int
    j: int
    v: float


class StreamState:
    """Pass-one accumulator holding ``S A^T`` for the stream seen so far.

    Memory is O(m n) plus the spec itself, independent of the stream length
    and of ``d``; sketch columns are regenerated per update rather than
    stored.
    """

    def __init__(self, spec: SketchSpec, n: int):
        if spec.family == "gaussian":
            raise ValueError("streaming requires a sparse sketch family")
        if n < 1:
            raise ValueError("need n >= 1 rows")
        self.spec = spec
        self.n = int(n)
        self.acc = np.zeros((spec.m, self.n))
        self.update_count = 0
        self._scale = 1.0 / np.sqrt(spec.s)

    @property
    def d(self):
        return self.spec.d

    def ingest(self, update):
        if not 0 <= update.i < self.n or not 0 <= update.j < self.spec.d:
            raise IndexError(
                "update %d out of range: (i=%d, j=%d) for a %d x %d matrix"
                % (self.update_count, update.i, update.j, self.n, self.spec.d)
            )
        self.update_count += 1
        if update.v == 0.0:
            return
        rows, signs = sketch_column(self.spec, update.j)
        self.acc[rows, update.i] += (update.v * self._scale) * signs


def stream_ingest(state, update):
    """Apply one turnstile update to the pass-one accumulator; O(s) work."""
    state.ingest(update)


def stream_finalize_pass1(state, b, lam):
    """Close pass one: solve for ``y`` from the accumulated ``S A^T``.

    An empty stream (``A = 0``) degenerates to ``y = b / lam``.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (state.n,):
        raise ValueError("b has shape %r, expected (%d,)" % (b.shape, state.n))
    if lam <= 0:
        raise ValueError("lambda must be positive")
    gram = state.acc.T @ state.acc
    gram[np.diag_indices_from(gram)] += lam
    return spd_solve(gram, b)


def stream_pass2_accumulate(x_acc, update, y):
    """Fold one replayed update into ``x = A^T y``: ``x[j] += v * y[i]``."""
    if not 0 <= update.i < y.shape[0] or not 0 <= update.j < x_acc.shape[0]:
        raise IndexError(
            "update out of range: (i=%d, j=%d) for x of length %d, y of length %d"
            % (update.i, update.j, x_acc.shape[0], y.shape[0])
        )
    x_acc[update.j] += update.v * y[update.i]


def read_updates(path):
    """Yield updates from a text stream: one ``i j v`` triple per line.

    Blank lines and lines starting with ``#`` are skipped.  Malformed lines
    raise ``ValueError`` carrying the 1-based line number.
    """
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(
                    "%s:%d: expected 'i j v', got %r" % (path, lineno, raw.rstrip())
                )
            try:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise ValueError(
                    "%s:%d: could not parse 'i j v' from %r"
                    % (path, lineno, raw.rstrip())
                ) from None
            yield TurnstileUpdate(i=i, j=j, v=v)


def stream_solve(updates_path, b, lam, spec):
    """Full two-pass solve over an update file; returns the estimate ``x``.

    The file is read twice: pass one accumulates ``S A^T`` and fixes ``y``;
    pass two accumulates ``x = A^T y``.
    """
    b = np.asarray(b, dtype=np.float64)
    state = StreamState(spec, n=b.shape[0])
    for update in read_updates(updates_path):
        state.ingest(update)
    y = stream_finalize_pass1(state, b, lam)
    x = np.zeros(spec.d)
    for update in read_updates(updates_path):
        stream_pass2_accumulate(x, update, y)
    return x
