"""One-fold Darboux transformation of the stationary Dirac equation.

Two seed solutions u = [psi1 | psi2] at eigenvalues (lam1, lam2) define

    U = u' u^-1,   L = d/dt - U,   V1 = V0 + i [s3, U],

and ``L`` maps solutions of ``h0 psi = eps psi`` to solutions of
``h1 (L psi) = eps (L psi)`` for every ``eps`` other than the seed values.
The potential shift is the one forced by matching first-derivative terms
in ``L h0 = h1 L``; :func:`verify_intertwining` checks the full relation
numerically.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .dirac_core import PotentialSpec, Trajectory, integrate_stationary
from .errors import DegenerateEigenvalues, GridMismatch, SeedEigenvalueCollision, SingularSeed
from .pauli import SIGMA1, SIGMA2, SIGMA3, compose, decompose, det2, inv2

_I_SIGMA3 = 1j * SIGMA3
_EIG_TOL = 1e-9
SINGULAR_TOL = 1e-8
ZERO_OUTPUT_TOL = 1e-10

_SIGMAS = {1: SIGMA1, 2: SIGMA2, 3: SIGMA3}


@dataclass(frozen=True, eq=False)
class DarbouxSeed:
    lam1: float
    lam2: float
    traj1: Trajectory
    traj2: Trajectory
    spec: PotentialSpec
    singular_tol: float = SINGULAR_TOL

    @cached_property
    def u(self) -> np.ndarray:
        """Seed matrix per node, columns psi1 and psi2; shape (n + 1, 2, 2)."""
        return np.stack([self.traj1.states, self.traj2.states], axis=-1)

    @property
    def t(self) -> np.ndarray:
        return self.traj1.t

    @property
    def potential(self) -> np.ndarray:
        return self.traj1.potential

    @property
    def guard(self) -> float:
        return self.singular_tol * float(np.max(np.abs(self.u))) ** 2


@dataclass(frozen=True, eq=False)
class DarbouxResult:
    U: np.ndarray  # (n + 1, 2, 2)
    delta_v: np.ndarray  # (n + 1, 4)
    v1_spec: PotentialSpec
    eigenvalues: tuple

    @property
    def v1(self) -> np.ndarray:
        return self.v1_spec.data["values"]


@dataclass(frozen=True)
class ResidualReport:
    max: float
    mean: float
    zero_output: bool
    residual: np.ndarray  # per interior node, relative

    def passed(self, tol: float) -> bool:
        return not self.zero_output and self.max <= tol


def check_seed(u: np.ndarray, t: np.ndarray, singular_tol: float = SINGULAR_TOL) -> None:
    """Raise :class:`SingularSeed` if det u vanishes on or between nodes.

    Between nodes det u is replaced by the chord joining neighbouring samples,
    so a zero crossing that falls between grid points is still caught; the
    reported ``t*`` is the chord's closest approach to zero.
    """
    det = det2(u)
    guard = singular_tol * float(np.max(np.abs(u))) ** 2
    mag = np.abs(det)
    # closest approach of each chord d_j + s (d_{j+1} - d_j), s in [0, 1]
    d0, step = det[:-1], np.diff(det)
    denom = np.abs(step) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(denom > 0, -np.real(np.conj(d0) * step) / denom, 0.0)
    s = np.clip(s, 0.0, 1.0)
    chord = np.abs(d0 + s * step)
    hits = np.flatnonzero(chord <= guard)
    node_hits = np.flatnonzero(mag <= guard)
    candidates = []
    if hits.size:
        j = hits[0]
        candidates.append((t[j] + s[j] * (t[j + 1] - t[j]), chord[j]))
    if node_hits.size:
        j = node_hits[0]
        candidates.append((t[j], mag[j]))
    if candidates:
        t_star, value = min(candidates)
        raise SingularSeed(t_star, value, guard)


def build_seed(spec, lam1, psi1_0, lam2, psi2_0, t0, t1, h, singular_tol: float = SINGULAR_TOL) -> DarbouxSeed:
    if abs(lam1 - lam2) <= _EIG_TOL:
        raise DegenerateEigenvalues(f"seed eigenvalues coincide: {lam1} vs {lam2}")
    traj1 = integrate_stationary(spec, lam1, psi1_0, t0, t1, h)
    traj2 = integrate_stationary(spec, lam2, psi2_0, t0, t1, h)
    seed = DarbouxSeed(float(lam1), float(lam2), traj1, traj2, spec, singular_tol)
    check_seed(seed.u, seed.t, singular_tol)
    return seed


def sigma_eigenvectors(i: int):
    """Orthonormal eigenvectors of sigma_i for eigenvalues +1 and -1."""
    if i not in _SIGMAS:
        raise ValueError(f"sigma index must be 1, 2 or 3, got {i}")
    r = 1 / np.sqrt(2)
    return {
        1: (np.array([r, r]), np.array([r, -r])),
        2: (np.array([r, 1j * r]), np.array([r, -1j * r])),
        3: (np.array([1.0, 0.0]), np.array([0.0, 1.0])),
    }[i]


def seed_for_sigma(i: int, spec, lam: float, t0, t1, h, singular_tol: float = SINGULAR_TOL) -> DarbouxSeed:
    """Canonical seed of the controller D(sigma_i).

    The +1 and -1 eigenvectors of sigma_i are the initial conditions at
    eigenvalues +lam and -lam respectively.
    """
    if not lam > 0:
        raise ValueError(f"seed eigenvalue magnitude must be > 0, got {lam}")
    plus, minus = sigma_eigenvectors(i)
    return build_seed(spec, lam, plus, -lam, minus, t0, t1, h, singular_tol)


def seed_derivative(seed: DarbouxSeed) -> np.ndarray:
    """u' = i s3 (V0 u - u Lambda), taken from the ODE itself."""
    v0 = compose(seed.potential)
    lam = np.diag([seed.lam1, seed.lam2]).astype(np.complex128)
    return _I_SIGMA3 @ (v0 @ seed.u - seed.u @ lam)


def generator_U(seed: DarbouxSeed) -> np.ndarray:
    u = seed.u
    det = np.abs(det2(u))
    bad = np.flatnonzero(det <= seed.guard)
    if bad.size:
        j = bad[0]
        raise SingularSeed(seed.t[j], det[j], seed.guard)
    return seed_derivative(seed) @ inv2(u)


def potential_shift(U) -> np.ndarray:
    """Four-vector of ``Delta V = i [s3, U]``; traceless by construction."""
    U = np.asarray(U, dtype=np.complex128)
    return decompose(1j * (SIGMA3 @ U - U @ SIGMA3))


def delta_V(seed: DarbouxSeed) -> DarbouxResult:
    U = generator_U(seed)
    dv = potential_shift(U)
    v1 = seed.potential + dv
    traj = seed.traj1
    v1_spec = PotentialSpec.sampled(traj.t0, traj.h, v1)
    return DarbouxResult(U, dv, v1_spec, (seed.lam1, seed.lam2))


def _check_pair(seed: DarbouxSeed, traj: Trajectory) -> None:
    if not seed.traj1.same_grid(traj):
        raise GridMismatch("trajectory grid differs from the seed grid")
    for lam in (seed.lam1, seed.lam2):
        if abs(traj.eps - lam) <= _EIG_TOL:
            warnings.warn(
                f"trajectory eigenvalue {traj.eps} equals seed eigenvalue {lam}; L psi may vanish",
                SeedEigenvalueCollision,
                stacklevel=3,
            )


def apply_L(states: np.ndarray, potential: np.ndarray, eps: float, U: np.ndarray) -> np.ndarray:
    gen = _I_SIGMA3 @ (compose(potential) - eps * np.eye(2))
    return np.einsum("nij,nj->ni", gen - U, states)


def intertwine(seed: DarbouxSeed, traj: Trajectory, result: DarbouxResult | None = None) -> Trajectory:
    """Transformed trajectory ``L psi = psi' - U psi`` on the seed grid."""
    _check_pair(seed, traj)
    if result is None:
        result = delta_V(seed)
    states = apply_L(traj.states, traj.potential, traj.eps, result.U)
    return Trajectory(traj.t0, traj.h, states, traj.eps, result.v1)


def verify_intertwining(seed: DarbouxSeed, traj: Trajectory, result: DarbouxResult | None = None) -> ResidualReport:
    """Residual of ``h1 (L psi) = eps (L psi)`` with central differences.

    Per interior node ``r = i s3 (L psi)' + V1 (L psi) - eps (L psi)``,
    normalized by ``max_t |L psi|``.
    """
    if result is None:
        result = delta_V(seed)
    out = intertwine(seed, traj, result)
    phi = out.states
    scale = float(np.max(np.linalg.norm(phi, axis=-1)))
    ref = float(np.max(np.linalg.norm(traj.states, axis=-1)))
    if scale <= ZERO_OUTPUT_TOL * ref:
        return ResidualReport(float("nan"), float("nan"), True, np.full(len(phi) - 2, np.nan))
    dphi = (phi[2:] - phi[:-2]) / (2 * traj.h)
    v1 = compose(result.v1[1:-1])
    r = dphi @ _I_SIGMA3.T + np.einsum("nij,nj->ni", v1, phi[1:-1]) - traj.eps * phi[1:-1]
    rel = np.linalg.norm(r, axis=-1) / scale
    return ResidualReport(float(rel.max()), float(rel.mean()), False, rel)
