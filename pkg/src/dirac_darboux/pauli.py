"""2x2 complex matrix algebra in the Pauli basis.

Matrices are numpy arrays of shape ``(..., 2, 2)`` and Pauli four-vectors
``f = (f0, f1, f2, f3)`` are arrays of shape ``(..., 4)``, so every routine
works on a single object or on a whole time series at once.
"""

from __future__ import annotations

import numpy as np

SIGMA0 = np.eye(2, dtype=np.complex128)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=np.complex128)

#: (4, 2, 2) stack sigma_mu, mu = 0..3
SIGMA = np.stack([SIGMA0, SIGMA1, SIGMA2, SIGMA3])

# series limit of sinh(r)/r below this |r|
_SMALL_R = 1e-8


def four_vector(f0=0.0, f1=0.0, f2=0.0, f3=0.0) -> np.ndarray:
    return np.array([f0, f1, f2, f3], dtype=np.complex128)


def compose(f) -> np.ndarray:
    """Return ``f0*s0 + f1*s1 + f2*s2 + f3*s3`` for ``f`` of shape ``(..., 4)``."""
    f = np.asarray(f, dtype=np.complex128)
    if f.shape[-1] != 4:
        raise ValueError(f"expected trailing dimension 4, got shape {f.shape}")
    out = np.empty(f.shape[:-1] + (2, 2), dtype=np.complex128)
    f0, f1, f2, f3 = f[..., 0], f[..., 1], f[..., 2], f[..., 3]
    out[..., 0, 0] = f0 + f3
    out[..., 0, 1] = f1 - 1j * f2
    out[..., 1, 0] = f1 + 1j * f2
    out[..., 1, 1] = f0 - f3
    return out


def decompose(m) -> np.ndarray:
    """Pauli coefficients ``f_mu = tr(sigma_mu M) / 2``; inverse of :func:`compose`."""
    m = np.asarray(m, dtype=np.complex128)
    a, b = m[..., 0, 0], m[..., 0, 1]
    c, d = m[..., 1, 0], m[..., 1, 1]
    out = np.empty(m.shape[:-2] + (4,), dtype=np.complex128)
    out[..., 0] = (a + d) / 2
    out[..., 1] = (b + c) / 2
    out[..., 2] = 1j * (b - c) / 2
    out[..., 3] = (a - d) / 2
    return out


def commutator(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    return a @ b - b @ a


def dagger(m) -> np.ndarray:
    return np.conj(np.swapaxes(np.asarray(m), -1, -2))


def det2(m) -> np.ndarray:
    m = np.asarray(m)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def inv2(m) -> np.ndarray:
    """Closed-form inverse; caller is responsible for the conditioning check."""
    m = np.asarray(m, dtype=np.complex128)
    det = det2(m)
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    out[..., 1, 1] = m[..., 0, 0]
    return out / det[..., None, None]


def expm2(m) -> np.ndarray:
    """Closed-form exponential of a 2x2 complex matrix (or a stack of them).

    With ``M = c*s0 + a.sigma`` and ``r = sqrt(a.a)`` on the principal branch,
    ``exp(M) = e^c (cosh(r) s0 + sinh(r)/r a.sigma)``.
    """
    f = decompose(m)
    c = f[..., 0]
    vec = f[..., 1:]
    r = np.sqrt(np.sum(vec * vec, axis=-1))
    small = np.abs(r) <= _SMALL_R
    r_safe = np.where(small, 1.0, r)
    with np.errstate(invalid="ignore", divide="ignore"):
        sinhc = np.where(small, 1.0 + r * r / 6.0, np.sinh(r_safe) / r_safe)
    out = np.empty(f.shape, dtype=np.complex128)
    out[..., 0] = np.cosh(r)
    out[..., 1:] = sinhc[..., None] * vec
    return np.exp(c)[..., None, None] * compose(out)


def max_abs(m) -> float:
    return float(np.max(np.abs(m)))


def is_hermitian(m, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= tol)
