# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner kernel for the semi-discrete right-hand side.

Must stay operation-for-operation identical to ``_kernels_py.rhs_kernel``:
per cell, the truncated convolution accumulates in ascending shift order and
the four terms combine left to right, so both backends produce the same
floating-point results.
"""

import numpy as np

from libc.math cimport fabs


def rhs_kernel(const double[::1] u, const double[::1] weights, double dx,
               double nu, double c, double theta, double m0, double m1,
               int flux_kind, double dt_ref):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t nw = weights.shape[0]
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    cdef double inv_dx = 1.0 / dx
    cdef double lap_c = nu / (dx * dx)
    cdef double conv_c = c / (theta * theta)
    cdef double trans_c = c * m1 / (theta * dx)
    cdef double q = 0.0
    cdef Py_ssize_t j, m, mmax
    cdef double uj, um, up, gl, gr, acc

    if flux_kind == 1:
        q = dx / (4.0 * dt_ref)

    for j in range(n):
        uj = u[j]
        um = u[j - 1] if j > 0 else 0.0
        up = u[j + 1] if j + 1 < n else 0.0
        if flux_kind == 0:
            gr = (uj * (uj - fabs(uj))) * 0.25 + (up * (up + fabs(up))) * 0.25
            gl = (um * (um - fabs(um))) * 0.25 + (uj * (uj + fabs(uj))) * 0.25
        else:
            gr = (uj * uj + up * up) * 0.25 + q * (up - uj)
            gl = (um * um + uj * uj) * 0.25 + q * (uj - um)
        acc = 0.0
        mmax = nw if nw < j else j
        for m in range(1, mmax + 1):
            acc = acc + weights[m - 1] * u[j - m]
        out[j] = ((gr - gl) * inv_dx + lap_c * ((um - 2.0 * uj) + up)) \
            + conv_c * (acc - m0 * uj)
        out[j] = out[j] + trans_c * (up - uj)
    return out_arr
