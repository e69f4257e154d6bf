# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled coefficient-index kernels; mirrors ``_pykernels`` exactly."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t idx_t


cdef inline idx_t m0(idx_t i, idx_t j) nogil:
    return i * (i + 1) // 2 + j


cdef inline double falling(idx_t n, int k) nogil:
    cdef double out = 1.0
    cdef int r
    for r in range(k):
        out *= <double>(n - r)
    return out


def partial_triplets(int N, int p, int q):
    cdef idx_t top = N - p - q
    cdef idx_t size = 0 if top < 0 else (top + 1) * (top + 2) // 2
    cdef cnp.ndarray[idx_t] src = np.empty(size, dtype=np.int64)
    cdef cnp.ndarray[idx_t] dst = np.empty(size, dtype=np.int64)
    cdef cnp.ndarray[double] val = np.empty(size, dtype=np.float64)
    cdef idx_t i, j, n = 0
    cdef double v
    for i in range(top + 1):
        for j in range(i + 1):
            v = falling(i - j + p, p) * falling(j + q, q)
            if v != 0.0:
                src[n] = m0(i + p + q, j + q)
                dst[n] = m0(i, j)
                val[n] = v
                n += 1
    return src[:n], dst[:n], val[:n]


def mul_xi_triplets(const double[::1] lam, int N, int out_order):
    cdef idx_t nl = lam.shape[0]
    cdef idx_t size = 0, i, j, q, n = 0, qmax
    for i in range(out_order + 1):
        for j in range(i + 1):
            size += min(j, nl - 1) + 1
    cdef cnp.ndarray[idx_t] src = np.empty(size, dtype=np.int64)
    cdef cnp.ndarray[idx_t] dst = np.empty(size, dtype=np.int64)
    cdef cnp.ndarray[double] val = np.empty(size, dtype=np.float64)
    for i in range(out_order + 1):
        for j in range(i + 1):
            qmax = min(j, nl - 1)
            for q in range(qmax + 1):
                if lam[q] != 0.0:
                    src[n] = m0(i - q, j - q)
                    dst[n] = m0(i, j)
                    val[n] = lam[q]
                    n += 1
    return src[:n], dst[:n], val[:n]


def mul_x_triplets(const double[::1] a, int N, int out_order):
    cdef idx_t na = a.shape[0]
    cdef idx_t size = 0, i, j, q, n = 0, qmax
    for i in range(out_order + 1):
        for j in range(i + 1):
            size += min(i - j, na - 1) + 1
    cdef cnp.ndarray[idx_t] src = np.empty(size, dtype=np.int64)
    cdef cnp.ndarray[idx_t] dst = np.empty(size, dtype=np.int64)
    cdef cnp.ndarray[double] val = np.empty(size, dtype=np.float64)
    for i in range(out_order + 1):
        for j in range(i + 1):
            qmax = min(i - j, na - 1)
            for q in range(qmax + 1):
                if a[q] != 0.0:
                    src[n] = m0(i - q, j)
                    dst[n] = m0(i, j)
                    val[n] = a[q]
                    n += 1
    return src[:n], dst[:n], val[:n]


def affine_power_table(double alpha, double gamma, int n):
    cdef cnp.ndarray[double, ndim=2] table = np.zeros((n + 1, n + 1))
    cdef int j, r
    table[0, 0] = 1.0
    for j in range(1, n + 1):
        for r in range(j + 1):
            table[j, r] = gamma * table[j - 1, r]
            if r > 0:
                table[j, r] += alpha * table[j - 1, r - 1]
    return table


def trace_triplets(double alpha, double gamma, int N):
    cdef double[:, ::1] table = affine_power_table(alpha, gamma, N)
    cdef idx_t size = 0, i, j, r, n = 0
    for i in range(N + 1):
        for j in range(i + 1):
            size += j + 1
    cdef cnp.ndarray[idx_t] src = np.empty(size, dtype=np.int64)
    cdef cnp.ndarray[idx_t] dst = np.empty(size, dtype=np.int64)
    cdef cnp.ndarray[double] val = np.empty(size, dtype=np.float64)
    # same emission order as the numpy version (grouped by r)
    for r in range(N + 1):
        for i in range(r, N + 1):
            for j in range(r, i + 1):
                if table[j, r] != 0.0:
                    src[n] = m0(i, j)
                    dst[n] = i - j + r
                    val[n] = table[j, r]
                    n += 1
    return src[:n], dst[:n], val[:n]


def tri_eval(coeffs, int N, xt, xit):
    cdef const double[::1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    bx, bxi = np.broadcast_arrays(np.asarray(xt, dtype=np.float64),
                                  np.asarray(xit, dtype=np.float64))
    shape = bx.shape
    cdef const double[::1] x = np.ascontiguousarray(bx).ravel()
    cdef const double[::1] y = np.ascontiguousarray(bxi).ravel()
    cdef idx_t npts = x.shape[0], k, k0, k1
    out = np.empty(npts, dtype=np.float64)
    cdef double[::1] o = out
    # points run innermost in fixed-size blocks so the loop vectorises; the
    # per-point operation order matches the numpy fallback bit for bit
    cdef double[256] inner
    cdef int a, j
    cdef double cv
    with nogil:
        for k0 in range(0, npts, 256):
            k1 = min(k0 + 256, npts)
            for k in range(k0, k1):
                o[k] = 0.0
            for a in range(N, -1, -1):
                for k in range(k1 - k0):
                    inner[k] = 0.0
                for j in range(N - a, -1, -1):
                    cv = c[m0(a + j, j)]
                    for k in range(k0, k1):
                        inner[k - k0] = inner[k - k0] * y[k] + cv
                for k in range(k0, k1):
                    o[k] = o[k] * x[k] + inner[k - k0]
    return out.reshape(shape)
