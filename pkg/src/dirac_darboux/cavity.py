"""Two-level Rabi dynamics and the Darboux controller D(sigma_i).

A two-level Hamiltonian ``H = g s1 + (detuning/2) s3`` is carried into the
stationary Dirac form through the potential ``V0 = eps s0 - s3 H``. With that
choice ``i s3 (V0 - eps) = -i H``, so solutions of ``h0 psi = eps psi`` are
exactly the Schroedinger evolution under ``H``, and the Darboux transform of
``V0`` acts on the same trajectories whose populations are reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .darboux import SINGULAR_TOL, DarbouxResult, delta_V, seed_for_sigma
from .dirac_core import PotentialSpec, Trajectory, integrate_stationary, populations, step_count
from .errors import BadConfig, SingularSeed, TooShort

FALLBACK_LAMBDAS = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class RabiConfig:
    g: float = 1.0
    detuning: float = 0.0
    eps: float = 0.0
    t_final: float = 100.0
    h: float = 1e-2
    psi0: tuple = (1.0, 0.0)

    def __post_init__(self):
        # g = 0 is admitted so the sigma_3-diagonal fixed point is reachable
        if not self.g >= 0:
            raise BadConfig(f"g must satisfy g >= 0, got {self.g}")
        if not self.t_final > 0:
            raise BadConfig(f"t_final must be > 0, got {self.t_final}")
        if not self.h > 0:
            raise BadConfig(f"h must satisfy h > 0, got {self.h}")
        step_count(0.0, self.t_final, self.h)
        psi = np.asarray(self.psi0, dtype=np.complex128)
        if psi.shape != (2,) or not np.sum(np.abs(psi) ** 2) > 0:
            raise BadConfig("psi0 must be a nonzero 2-component state")

    def hamiltonian_coefficients(self) -> np.ndarray:
        return np.array([0.0, self.g, 0.0, self.detuning / 2], dtype=np.complex128)

    def potential(self) -> PotentialSpec:
        # V0 = eps s0 - s3 (g s1 + d/2 s3) = (eps - d/2) s0 - i g s2
        return PotentialSpec.constant([self.eps - self.detuning / 2, 0.0, -1j * self.g, 0.0])


@dataclass(frozen=True, eq=False)
class InversionSeries:
    t: np.ndarray
    W: np.ndarray
    P_up: np.ndarray
    P_down: np.ndarray
    v1: np.ndarray  # (n + 1, 4) potential coefficients the state evolved under
    eigenvalues: tuple = ()
    lam: float | None = None
    darboux: DarbouxResult | None = field(default=None, repr=False)


def atomic_inversion(traj) -> np.ndarray:
    p = populations(traj)
    return p[:, 0] - p[:, 1]


def _series(traj: Trajectory, v1: np.ndarray, **extra) -> InversionSeries:
    p = populations(traj)
    return InversionSeries(traj.t, p[:, 0] - p[:, 1], p[:, 0], p[:, 1], v1, **extra)


def rabi_baseline(cfg: RabiConfig) -> InversionSeries:
    traj = integrate_stationary(cfg.potential(), cfg.eps, cfg.psi0, 0.0, cfg.t_final, cfg.h)
    return _series(traj, traj.potential)


def controlled_run(cfg: RabiConfig, i: int, lam: float, singular_tol: float = SINGULAR_TOL) -> InversionSeries:
    """Apply the controller D(sigma_i) to the Rabi system and evolve psi0 under V1.

    The seed is built at half the state step so every RK4 stage of the state
    integration lands on a sample of V1.
    """
    spec = cfg.potential()
    seed = seed_for_sigma(i, spec, lam, 0.0, cfg.t_final, cfg.h / 2, singular_tol)
    result = delta_V(seed)
    traj = integrate_stationary(result.v1_spec, cfg.eps, cfg.psi0, 0.0, cfg.t_final, cfg.h)
    return _series(traj, traj.potential, eigenvalues=result.eigenvalues, lam=float(lam), darboux=result)


def controlled_run_with_fallback(cfg: RabiConfig, i: int, lambdas=FALLBACK_LAMBDAS, singular_tol: float = SINGULAR_TOL):
    """First non-singular run over ``lambdas``; returns ``(series, failures)``.

    ``failures`` maps each skipped lambda to its SingularSeed error. Raises the
    last error if every lambda fails.
    """
    failures = {}
    for lam in lambdas:
        try:
            return controlled_run(cfg, i, lam, singular_tol), failures
        except SingularSeed as exc:
            failures[lam] = exc
    raise failures[lambdas[-1]]


def collapse_metric(W, window_fraction: float = 0.1) -> float:
    """Peak-to-peak amplitude of W in the last window over that in the first.

    Near 0 means the oscillation has collapsed, near 1 that it persists. A
    flat opening window returns 0.
    """
    W = np.asarray(W, dtype=float)
    if W.size < 20:
        raise TooShort(f"collapse metric needs >= 20 nodes, got {W.size}")
    if not 0 < window_fraction <= 0.5:
        raise ValueError(f"window_fraction must lie in (0, 0.5], got {window_fraction}")
    k = max(1, int(round(window_fraction * (W.size - 1))))
    first = np.ptp(W[: k + 1])
    last = np.ptp(W[-(k + 1):])
    if first < 1e-12:
        return 0.0
    return float(last / first)


def potential_profile(result: InversionSeries) -> dict:
    cols = {"t": result.t}
    for mu in range(4):
        cols[f"f{mu}_re"] = result.v1[:, mu].real
        cols[f"f{mu}_im"] = result.v1[:, mu].imag
    return cols
