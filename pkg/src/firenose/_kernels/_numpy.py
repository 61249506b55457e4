"""Pure numpy implementations of the distance and kernel-sum primitives."""

import numpy as np

NAME = "numpy"

# Query rows per block; bounds the (block, N, dim) broadcast temporary.
_CHUNK = 512


def sq_dists(queries, patterns):
    """Squared Euclidean distances between every query row and every pattern row.

    Returns a float64 matrix of shape (n_queries, n_patterns).
    """
    q = np.ascontiguousarray(queries, dtype=np.float64)
    p = np.ascontiguousarray(patterns, dtype=np.float64)
    if q.ndim != 2 or p.ndim != 2:
        raise ValueError("queries and patterns must be 2-D arrays")
    if q.shape[1] != p.shape[1]:
        raise ValueError(
            f"dimension mismatch: queries have {q.shape[1]} columns, "
            f"patterns have {p.shape[1]}"
        )
    out = np.empty((q.shape[0], p.shape[0]), dtype=np.float64)
    for lo in range(0, q.shape[0], _CHUNK):
        hi = min(lo + _CHUNK, q.shape[0])
        diff = q[lo:hi, None, :] - p[None, :, :]
        np.einsum("ijk,ijk->ij", diff, diff, out=out[lo:hi])
    return out


def class_log_sums(sq, starts, inv_two_sigma_sq):
    """Per-class log-sum-exp of the Gaussian kernel exponents.

    ``sq`` is a (n_queries, n_patterns) squared-distance matrix whose columns
    are grouped by class; ``starts`` holds the K+1 block offsets. Entry
    (i, k) of the result is logsumexp_j(-sq[i, j] * inv_two_sigma_sq) over
    the patterns j of class k, evaluated stably (max subtracted).
    """
    sq = np.asarray(sq, dtype=np.float64)
    starts = np.asarray(starts, dtype=np.intp)
    if sq.ndim != 2 or starts.ndim != 1 or starts.shape[0] < 2:
        raise ValueError("sq must be 2-D and starts must hold at least 2 offsets")
    if starts[0] != 0 or starts[-1] != sq.shape[1]:
        raise ValueError("starts must begin at 0 and end at the pattern count")
    if np.any(np.diff(starts) < 1):
        raise ValueError("every class block must contain at least one pattern")
    n_classes = starts.shape[0] - 1
    z = sq * (-float(inv_two_sigma_sq))
    out = np.empty((sq.shape[0], n_classes), dtype=np.float64)
    for k in range(n_classes):
        block = z[:, starts[k] : starts[k + 1]]
        top = block.max(axis=1)
        out[:, k] = np.log(np.exp(block - top[:, None]).sum(axis=1)) + top
    return out
