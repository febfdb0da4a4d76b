# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled resampling kernel: per-resample metric differences.

Sums are integer, so results match the numpy fallback bit for bit.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def bootstrap_diffs(
    cnp.int64_t[::1] num_a,
    cnp.int64_t[::1] num_b,
    cnp.int64_t[::1] den,
    cnp.int64_t[:, ::1] idx,
):
    cdef Py_ssize_t n_resamples = idx.shape[0]
    cdef Py_ssize_t n_groups = idx.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n_resamples, dtype=np.float64)
    cdef cnp.float64_t[::1] out_view = out
    cdef Py_ssize_t r, g, j
    cdef cnp.int64_t sa, sb, sd

    with nogil:
        for r in range(n_resamples):
            sa = 0
            sb = 0
            sd = 0
            for g in range(n_groups):
                j = idx[r, g]
                sa += num_a[j]
                sb += num_b[j]
                sd += den[j]
            out_view[r] = (<double> sb) / (<double> sd) - (<double> sa) / (<double> sd)
    return out
