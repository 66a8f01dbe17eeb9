"""Pure-Python RK4 for linear 2x2 systems, used when the Cython kernel is absent.

For a linear system the four RK4 stages collapse into one step matrix per
interval; those are built with batched numpy products, and only the
sequential application runs as a Python loop over scalars.
"""

import numpy as np


def step_matrices(a_half: np.ndarray, h: float) -> np.ndarray:
    a0 = a_half[0:-1:2]
    am = a_half[1::2]
    a1 = a_half[2::2]
    eye = np.eye(2, dtype=np.complex128)
    k2 = am @ (eye + 0.5 * h * a0)
    k3 = am @ (eye + 0.5 * h * k2)
    k4 = a1 @ (eye + h * k3)
    return eye + (h / 6.0) * (a0 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_linear(a_half, y0, h):
    a_half = np.ascontiguousarray(a_half, dtype=np.complex128)
    y0 = np.ascontiguousarray(y0, dtype=np.complex128)
    n = (a_half.shape[0] - 1) // 2
    m = y0.shape[1]
    steps = step_matrices(a_half, h).reshape(n, 4).tolist()
    out = np.empty((n + 1, 2, m), dtype=np.complex128)
    out[0] = y0
    for c in range(m):
        y1, y2 = complex(y0[0, c]), complex(y0[1, c])
        col = [(y1, y2)]
        append = col.append
        for s11, s12, s21, s22 in steps:
            y1, y2 = s11 * y1 + s12 * y2, s21 * y1 + s22 * y2
            append((y1, y2))
        out[:, :, c] = col
    return out
