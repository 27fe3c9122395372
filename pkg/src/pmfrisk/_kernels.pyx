# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled batch kernels; see ``_kernels_py`` for the reference semantics."""
import numpy as np

from libc.math cimport INFINITY, log


def barycentric_points(const double[:, :, ::1] verts, const Py_ssize_t[::1] sel,
                       const double[:, ::1] spacings):
    cdef Py_ssize_t n = sel.shape[0]
    cdef Py_ssize_t kp1 = spacings.shape[1]
    cdef Py_ssize_t d = verts.shape[2]
    out_arr = np.zeros((n, d))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, t, s
    cdef double tot, w
    for i in range(n):
        tot = 0.0
        for j in range(kp1):
            tot += spacings[i, j]
        s = sel[i]
        for j in range(kp1):
            w = spacings[i, j] / tot
            for t in range(d):
                out[i, t] += w * verts[s, j, t]
    return out_arr


def self_convolve(const double[:, ::1] pmfs, Py_ssize_t steps):
    cdef Py_ssize_t m = pmfs.shape[0]
    cdef Py_ssize_t L = pmfs.shape[1]
    cdef Py_ssize_t width = steps * (L - 1) + 1
    cur_arr = np.zeros((m, width))
    nxt_arr = np.zeros((m, width))
    cur_arr[:, :L] = pmfs
    cdef double[:, ::1] cur = cur_arr
    cdef double[:, ::1] nxt = nxt_arr
    cdef Py_ssize_t size = L
    cdef Py_ssize_t step, i, j, t
    cdef double p
    for step in range(steps - 1):
        for i in range(m):
            for t in range(size + L - 1):
                nxt[i, t] = 0.0
            for j in range(L):
                p = pmfs[i, j]
                for t in range(size):
                    nxt[i, j + t] += p * cur[i, t]
        cur, nxt = nxt, cur
        cur_arr, nxt_arr = nxt_arr, cur_arr
        size += L - 1
    return cur_arr


def relative_entropy_pairs(const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t L = a.shape[1]
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double tot, x, y
    cdef bint bad
    for i in range(n):
        tot = 0.0
        bad = False
        for j in range(L):
            x = a[i, j]
            y = b[i, j]
            if (x > 0.0) != (y > 0.0):
                bad = True
                break
            if x > 0.0:
                tot += x * log(x / y)
        out[i] = INFINITY if bad else tot
    return out_arr
