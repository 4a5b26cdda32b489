# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the loops in ``_pykernels``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef double _BIG = 1e250


def cut_stationary(cum, birth):
    cdef const double[:, ::1] c = np.ascontiguousarray(cum, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(birth, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0] - 1
    cdef Py_ssize_t i, j, k
    cdef double v, s
    out = np.zeros(n + 1)
    cdef double[::1] x = out
    x[n] = 1.0
    for j in range(n - 1, -1, -1):
        v = 0.0
        for i in range(j + 1, n + 1):
            v += x[i] * c[i, j]
        v /= b[j]
        x[j] = v
        if v > _BIG:
            for k in range(j, n + 1):
                x[k] /= v
    s = 0.0
    for k in range(n + 1):
        s += x[k]
    for k in range(n + 1):
        x[k] /= s
    return out


def ul_poisson_solve(q, rhs):
    cdef const double[:, ::1] Q = np.ascontiguousarray(q, dtype=np.float64)
    y_arr = np.array(rhs, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] y = y_arr
    cdef Py_ssize_t N = Q.shape[0] - 1
    cdef Py_ssize_t nr = y.shape[1]
    r_arr = np.zeros((N + 1, N + 1))
    cdef double[:, ::1] r = r_arr
    cdef double[::1] d = np.zeros(N + 1)
    cdef double[::1] leak = np.zeros(N + 1)
    cdef Py_ssize_t i, k, col
    cdef double c, s

    s = 0.0
    for k in range(1, N):
        r[N, k] = Q[N, k]
        s += Q[N, k]
    leak[N] = Q[N, 0]
    d[N] = leak[N] + s
    for i in range(N - 1, 0, -1):
        c = Q[i, i + 1] / d[i + 1]
        s = 0.0
        for k in range(1, i):
            r[i, k] = Q[i, k] + c * r[i + 1, k]
            s += r[i, k]
        leak[i] = Q[i, 0] + c * leak[i + 1]
        d[i] = leak[i] + s
        for col in range(nr):
            y[i, col] += c * y[i + 1, col]

    f_arr = np.zeros((N + 1, nr))
    cdef double[:, ::1] f = f_arr
    cdef double rik
    for i in range(1, N + 1):
        for col in range(nr):
            f[i, col] = y[i, col]
        for k in range(1, i):
            rik = r[i, k]
            if rik != 0.0:
                for col in range(nr):
                    f[i, col] += rik * f[k, col]
        for col in range(nr):
            f[i, col] /= d[i]
    return f_arr


def forward_increments(cum, birth, rhs):
    cdef const double[:, ::1] c = np.ascontiguousarray(cum, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(birth, dtype=np.float64)
    h_arr = np.ascontiguousarray(rhs, dtype=np.float64)
    squeeze = h_arr.ndim == 1
    if squeeze:
        h_arr = h_arr[:, None]
    cdef const double[:, ::1] h = np.ascontiguousarray(h_arr)
    cdef Py_ssize_t J = h.shape[0] - 1
    cdef Py_ssize_t nr = h.shape[1]
    m_arr = np.zeros((J + 1, nr))
    cdef double[:, ::1] m = m_arr
    cdef Py_ssize_t j, k, col
    cdef double cjk
    for col in range(nr):
        m[0, col] = h[0, col] / b[0]
    for j in range(1, J + 1):
        for col in range(nr):
            m[j, col] = h[j, col]
        for k in range(j):
            cjk = c[j, k]
            if cjk != 0.0:
                for col in range(nr):
                    m[j, col] += cjk * m[k, col]
        for col in range(nr):
            m[j, col] /= b[j]
    return m_arr[:, 0] if squeeze else m_arr
