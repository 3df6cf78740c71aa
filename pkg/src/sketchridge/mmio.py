"""Matrix Market I/O for dense matrices.

Both the ``array`` and ``coordinate`` variants of the format are supported.
Values are written with 17 significant decimal digits so a write/read round
trip reproduces every float64 bit-exactly.
"""

import numpy as np
import scipy.io
import scipy.sparse

__all__ = ["read_matrix", "write_matrix"]

# 17 significant decimal digits round-trip any float64 exactly
_PRECISION = 17


def write_matrix(path, a, fmt="array"):
    """Write a dense matrix to ``path`` in Matrix Market format.

    Parameters
    ----------
    path : str or Path
        Destination file (conventionally ``.mtx``).
    a : ndarray (n, d)
    fmt : {"array", "coordinate"}
        ``array`` stores every entry; ``coordinate`` stores only nonzeros.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("write_matrix needs a 2-d array, got %r" % (a.shape,))
    if fmt == "array":
        scipy.io.mmwrite(str(path), a, precision=_PRECISION)
    elif fmt == "coordinate":
        scipy.io.mmwrite(str(path), scipy.sparse.coo_matrix(a), precision=_PRECISION)
    else:
        raise ValueError("unknown Matrix Market format %r" % (fmt,))


def read_matrix(path):
    """Read a Matrix Market file (array or coordinate) as a dense ndarray."""
    m = scipy.io.mmread(str(path))
    if scipy.sparse.issparse(m):
        m = m.toarray()
    return np.ascontiguousarray(np.asarray(m, dtype=np.float64))
