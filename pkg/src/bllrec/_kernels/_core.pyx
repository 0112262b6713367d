# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled scoring kernels.

Must stay bit-for-bit equivalent to ``bllrec._kernels._pure``; both sides
use libm pow on IEEE doubles with the same accumulation order.
"""

from libc.math cimport pow

import numpy as np


def bll_sums(const long long[::1] local_idx, const double[::1] bases, Py_ssize_t n_out, double d):
    """Accumulate bases[j] ** (-d) into out[local_idx[j]] in event order."""
    out_arr = np.zeros(n_out, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double exponent = -d
    cdef Py_ssize_t j, n = bases.shape[0]
    with nogil:
        for j in range(n):
            out[local_idx[j]] += pow(bases[j], exponent)
    return out_arr


def overlap_counts(const long long[::1] query, const long long[::1] indptr,
                   const long long[::1] members, Py_ssize_t n_out):
    """Count, per candidate, how many ids in ``query`` list that candidate."""
    out_arr = np.zeros(n_out, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef Py_ssize_t i, p, n = query.shape[0]
    cdef long long a
    with nogil:
        for i in range(n):
            a = query[i]
            for p in range(indptr[a], indptr[a + 1]):
                out[members[p]] += 1
    return out_arr
