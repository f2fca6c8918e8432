# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled shell-reduction kernels (hot inner loop of the pair estimator).

Mirrors ``_shell_py`` exactly: same per-element accumulation order over
shells, same multiplication order, so outputs match the fallback bit for
bit for p in {1, 2} and to ulp-level otherwise.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow

cnp.import_array()


def shell_reduce_indicator(double[::1] u_x, double[:, ::1] u_y,
                           double[:, ::1] w_eff, double[::1] zc,
                           double delta_sq):
    cdef Py_ssize_t n = u_x.shape[0]
    cdef Py_ssize_t nj = zc.shape[0]
    out = np.zeros(n)
    shell = np.zeros(nj)
    cdef double[::1] v = out
    cdef double[::1] sh = shell
    cdef Py_ssize_t i, j
    cdef double du, term, acc
    for i in range(n):
        acc = 0.0
        for j in range(nj):
            du = u_x[i] - u_y[i, j]
            if du * du > delta_sq:
                term = zc[j] * w_eff[i, j]
                acc += term
                sh[j] += term
        v[i] = acc
    return out, shell


def shell_reduce_magnetic(double[::1] u_x, double[:, ::1] u_y,
                          double[:, ::1] w_eff, double[::1] zc,
                          double delta_sq, double[:, ::1] cross):
    cdef Py_ssize_t n = u_x.shape[0]
    cdef Py_ssize_t nj = zc.shape[0]
    out = np.zeros(n)
    shell = np.zeros(nj)
    cdef double[::1] v = out
    cdef double[::1] sh = shell
    cdef Py_ssize_t i, j
    cdef double du, term, acc
    for i in range(n):
        acc = 0.0
        for j in range(nj):
            du = u_x[i] - u_y[i, j]
            if du * du + cross[i, j] > delta_sq:
                term = zc[j] * w_eff[i, j]
                acc += term
                sh[j] += term
        v[i] = acc
    return out, shell


def shell_reduce_gagliardo(double[::1] u_x, double[:, ::1] u_y,
                           double[:, ::1] w_eff, double[::1] zc,
                           double p):
    cdef Py_ssize_t n = u_x.shape[0]
    cdef Py_ssize_t nj = zc.shape[0]
    out = np.zeros(n)
    shell = np.zeros(nj)
    cdef double[::1] v = out
    cdef double[::1] sh = shell
    cdef Py_ssize_t i, j
    cdef double du, term, acc, q
    cdef bint p_is_2 = (p == 2.0)
    cdef bint p_is_1 = (p == 1.0)
    for i in range(n):
        acc = 0.0
        for j in range(nj):
            du = u_x[i] - u_y[i, j]
            if p_is_2:
                q = du * du
            elif p_is_1:
                q = fabs(du)
            else:
                q = pow(fabs(du), p)
            term = (zc[j] * w_eff[i, j]) * q
            acc += term
            sh[j] += term
        v[i] = acc
    return out, shell
