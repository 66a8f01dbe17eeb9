# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled classical RK4 for linear 2x2 systems y' = A(t) y."""

import numpy as np


def rk4_linear(const double complex[:, :, ::1] a_half, const double complex[:, ::1] y0, double h):
    """Integrate ``y' = A(t) y`` with classical RK4.

    ``a_half[j]`` is A at ``t0 + j*h/2`` (``2n + 1`` samples for ``n`` steps);
    ``y0`` has shape ``(2, m)``. Returns all nodes, shape ``(n + 1, 2, m)``.
    """
    cdef Py_ssize_t n = (a_half.shape[0] - 1) // 2
    cdef Py_ssize_t m = y0.shape[1]
    out = np.empty((n + 1, 2, m), dtype=np.complex128)
    cdef double complex[:, :, ::1] ys = out
    cdef Py_ssize_t k, c, j
    cdef double complex y1, y2, k11, k12, k21, k22, k31, k32, k41, k42, z1, z2
    cdef double complex a11, a12, a21, a22, m11, m12, m21, m22, b11, b12, b21, b22
    cdef double hh = 0.5 * h
    cdef double h6 = h / 6.0

    for c in range(m):
        ys[0, 0, c] = y0[0, c]
        ys[0, 1, c] = y0[1, c]

    for k in range(n):
        j = 2 * k
        a11 = a_half[j, 0, 0]; a12 = a_half[j, 0, 1]
        a21 = a_half[j, 1, 0]; a22 = a_half[j, 1, 1]
        m11 = a_half[j + 1, 0, 0]; m12 = a_half[j + 1, 0, 1]
        m21 = a_half[j + 1, 1, 0]; m22 = a_half[j + 1, 1, 1]
        b11 = a_half[j + 2, 0, 0]; b12 = a_half[j + 2, 0, 1]
        b21 = a_half[j + 2, 1, 0]; b22 = a_half[j + 2, 1, 1]
        for c in range(m):
            y1 = ys[k, 0, c]
            y2 = ys[k, 1, c]
            k11 = a11 * y1 + a12 * y2
            k12 = a21 * y1 + a22 * y2
            z1 = y1 + hh * k11
            z2 = y2 + hh * k12
            k21 = m11 * z1 + m12 * z2
            k22 = m21 * z1 + m22 * z2
            z1 = y1 + hh * k21
            z2 = y2 + hh * k22
            k31 = m11 * z1 + m12 * z2
            k32 = m21 * z1 + m22 * z2
            z1 = y1 + h * k31
            z2 = y2 + h * k32
            k41 = b11 * z1 + b12 * z2
            k42 = b21 * z1 + b22 * z2
            ys[k + 1, 0, c] = y1 + h6 * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
            ys[k + 1, 1, c] = y2 + h6 * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
    return out
