# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Signatures mirror ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

# rows of X pushed through one dgemm call in row_quadratic_forms
cdef Py_ssize_t CHUNK = 2048


def sq_dists(const double[:, ::1] Xt):
    cdef Py_ssize_t n = Xt.shape[0], p = Xt.shape[1]
    cdef Py_ssize_t i, j, m
    cdef double acc, diff
    out_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                acc = 0.0
                for m in range(p):
                    diff = Xt[i, m] - Xt[j, m]
                    acc = acc + diff * diff
                out[i, j] = acc
                out[j, i] = acc
    return out_arr


def knn_mask(const double[:, ::1] D2, Py_ssize_t k):
    """k nearest other rows per row; ties go to the lower index."""
    cdef Py_ssize_t n = D2.shape[0]
    cdef Py_ssize_t i, j, r, pos
    cdef double dj
    mask_arr = np.zeros((n, n), dtype=np.bool_)
    cdef cnp.npy_bool[:, ::1] mask = mask_arr
    best_d_arr = np.empty(k, dtype=np.float64)
    best_i_arr = np.empty(k, dtype=np.intp)
    cdef double[::1] best_d = best_d_arr
    cdef Py_ssize_t[::1] best_i = best_i_arr
    cdef Py_ssize_t filled
    with nogil:
        for i in range(n):
            filled = 0
            for j in range(n):
                if j == i:
                    continue
                dj = D2[i, j]
                if filled == k and dj >= best_d[k - 1]:
                    continue
                # insertion into the sorted buffer; strict < keeps earlier j ahead on ties
                pos = filled if filled < k else k - 1
                while pos > 0 and dj < best_d[pos - 1]:
                    if pos < k:
                        best_d[pos] = best_d[pos - 1]
                        best_i[pos] = best_i[pos - 1]
                    pos -= 1
                best_d[pos] = dj
                best_i[pos] = j
                if filled < k:
                    filled += 1
            for r in range(filled):
                mask[i, best_i[r]] = True
    return mask_arr


def nearest_other(const double[:, ::1] D2):
    cdef Py_ssize_t n = D2.shape[0]
    cdef Py_ssize_t i, j, arg
    cdef double best
    out_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] out = out_arr
    with nogil:
        for i in range(n):
            best = INFINITY
            arg = 0 if i != 0 else 1
            for j in range(n):
                if j != i and D2[i, j] < best:
                    best = D2[i, j]
                    arg = j
            out[i] = arg
    return out_arr


def row_quadratic_forms(const double[:, ::1] X, const double[:, ::1] G):
    """``q[i] = X[i] @ G @ X[i]`` for symmetric ``G``.

    X is pushed through BLAS in row blocks, so the d x n product is never
    materialized in full; each row's dot product is summed left to right.
    """
    cdef Py_ssize_t d = X.shape[0], n = X.shape[1]
    cdef Py_ssize_t start, rows, i, j
    cdef int m_, n_, k_, lda, ldb, ldc
    cdef double one = 1.0, zero = 0.0, acc
    cdef char trans = b'N'
    out_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] out = out_arr
    if d == 0 or n == 0:
        return out_arr
    buf_arr = np.empty((min(d, CHUNK), n), dtype=np.float64)
    cdef double[:, ::1] buf = buf_arr
    start = 0
    while start < d:
        rows = min(CHUNK, d - start)
        # row-major Y = X_blk @ G is column-major Y^T = G^T X_blk^T, and G^T = G
        m_ = <int>n
        n_ = <int>rows
        k_ = <int>n
        lda = <int>n
        ldb = <int>n
        ldc = <int>n
        dgemm(&trans, &trans, &m_, &n_, &k_, &one, &G[0, 0], &lda,
              &X[start, 0], &ldb, &zero, &buf[0, 0], &ldc)
        with nogil:
            for i in range(rows):
                acc = 0.0
                for j in range(n):
                    acc = acc + buf[i, j] * X[start + i, j]
                out[start + i] = acc
        start += rows
    return out_arr


def assign_nearest(const double[:, ::1] Xt, const double[:, ::1] centers):
    cdef Py_ssize_t n = Xt.shape[0], p = Xt.shape[1], k = centers.shape[0]
    cdef Py_ssize_t i, c, m, arg
    cdef double best, acc, diff, inertia = 0.0
    labels_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] labels = labels_arr
    with nogil:
        for i in range(n):
            best = INFINITY
            arg = 0
            for c in range(k):
                acc = 0.0
                for m in range(p):
                    diff = Xt[i, m] - centers[c, m]
                    acc = acc + diff * diff
                if acc < best:
                    best = acc
                    arg = c
            labels[i] = arg
            inertia += best
    return labels_arr, inertia
