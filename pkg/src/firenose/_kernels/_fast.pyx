# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled distance and kernel-sum primitives (hot loops of PNN and kNN)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()

NAME = "cython"


def sq_dists(queries, patterns):
    """Squared Euclidean distances between every query row and every pattern row."""
    cdef const double[:, ::1] q = np.ascontiguousarray(queries, dtype=np.float64)
    cdef const double[:, ::1] p = np.ascontiguousarray(patterns, dtype=np.float64)
    if q.shape[1] != p.shape[1]:
        raise ValueError(
            f"dimension mismatch: queries have {q.shape[1]} columns, "
            f"patterns have {p.shape[1]}"
        )
    cdef Py_ssize_t m = q.shape[0]
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t dim = q.shape[1]
    out_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double acc, d
    for i in range(m):
        for j in range(n):
            acc = 0.0
            for k in range(dim):
                d = q[i, k] - p[j, k]
                acc += d * d
            out[i, j] = acc
    return out_arr


def class_log_sums(sq, starts, double inv_two_sigma_sq):
    """Per-class log-sum-exp of -sq * inv_two_sigma_sq over class pattern blocks."""
    cdef const double[:, ::1] s = np.ascontiguousarray(sq, dtype=np.float64)
    cdef const Py_ssize_t[::1] st = np.ascontiguousarray(starts, dtype=np.intp)
    if st.shape[0] < 2:
        raise ValueError("sq must be 2-D and starts must hold at least 2 offsets")
    cdef Py_ssize_t n_classes = st.shape[0] - 1
    cdef Py_ssize_t m = s.shape[0]
    cdef Py_ssize_t k
    if st[0] != 0 or st[n_classes] != s.shape[1]:
        raise ValueError("starts must begin at 0 and end at the pattern count")
    for k in range(n_classes):
        if st[k + 1] - st[k] < 1:
            raise ValueError("every class block must contain at least one pattern")
    out_arr = np.empty((m, n_classes), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double top, z, total
    for i in range(m):
        for k in range(n_classes):
            top = -s[i, st[k]] * inv_two_sigma_sq
            for j in range(st[k] + 1, st[k + 1]):
                z = -s[i, j] * inv_two_sigma_sq
                if z > top:
                    top = z
            total = 0.0
            for j in range(st[k], st[k + 1]):
                total += exp(-s[i, j] * inv_two_sigma_sq - top)
            out[i, k] = log(total) + top
    return out_arr
