"""The one-dimensional Dirac operator h = i s3 d/dt + V(t) and its solutions.

The stationary equation ``h psi = eps psi`` is integrated in the first-order
form ``psi' = i s3 (V(t) - eps) psi`` with fixed-step classical RK4 on a
uniform grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import BadGrid, NonFiniteState, NonHermitian, OutOfDomain, ZeroState
from .pauli import SIGMA3, compose

_I_SIGMA3 = 1j * SIGMA3
_GRID_TOL = 1e-9
_HERMITIAN_TOL = 1e-12
_JITTER_TOL = 1e-12

KINDS = ("constant", "polynomial", "sinusoidal", "sampled")


def _as_spinor(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if psi.shape != (2,):
        raise ValueError(f"spinor must have 2 components, got {psi.shape}")
    return psi


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """A Pauli four-vector potential ``V(t) = sum_mu f_mu(t) sigma_mu``.

    Use the ``constant``, ``polynomial``, ``sinusoidal`` and ``sampled``
    constructors rather than instantiating directly.
    """

    kind: str
    data: dict = field(repr=False)
    hermitian: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")

    # constructors -----------------------------------------------------

    @classmethod
    def constant(cls, f, hermitian: bool = False) -> "PotentialSpec":
        f = np.asarray(f, dtype=np.complex128).reshape(4)
        return cls("constant", {"f": f}, hermitian)

    @classmethod
    def polynomial(cls, coefficients, hermitian: bool = False) -> "PotentialSpec":
        """``coefficients[mu][k]`` multiplies ``t**k`` in ``f_mu``.

        A mapping ``{mu: [c0, c1, ...]}`` with missing components zero is also
        accepted.
        """
        if isinstance(coefficients, dict):
            coefficients = [coefficients.get(mu, ()) for mu in range(4)]
        if len(coefficients) != 4:
            raise ValueError("polynomial potential needs 4 coefficient lists")
        coeffs = tuple(np.asarray(c if len(c) else [0.0], dtype=np.complex128) for c in coefficients)
        return cls("polynomial", {"coefficients": coeffs}, hermitian)

    @classmethod
    def sinusoidal(cls, components, hermitian: bool = False) -> "PotentialSpec":
        """``f_mu(t) = amplitude * sin(omega t + phase) + offset``.

        ``components`` holds one ``(amplitude, omega, phase, offset)`` tuple per
        index (or a mapping ``{mu: tuple}``); ``None`` means zero.
        """
        if isinstance(components, dict):
            components = [components.get(mu) for mu in range(4)]
        params = np.zeros((4, 4), dtype=np.complex128)
        for mu, p in enumerate(components):
            if p is not None:
                params[mu] = p
        return cls("sinusoidal", {"params": params}, hermitian)

    @classmethod
    def sampled(cls, t0: float, h: float, values, hermitian: bool = False) -> "PotentialSpec":
        values = np.asarray(values, dtype=np.complex128)
        if values.ndim != 2 or values.shape[1] != 4 or values.shape[0] < 2:
            raise ValueError("sampled potential needs an (n >= 2, 4) array of coefficients")
        if not h > 0:
            raise BadGrid(f"sampled grid step must be > 0, got {h}")
        return cls("sampled", {"t0": float(t0), "h": float(h), "values": values}, hermitian)

    @classmethod
    def from_grid(cls, t_grid, values, hermitian: bool = False) -> "PotentialSpec":
        t_grid = np.asarray(t_grid, dtype=float)
        if t_grid.size < 2:
            raise BadGrid("sampled grid needs at least two nodes")
        steps = np.diff(t_grid)
        h = (t_grid[-1] - t_grid[0]) / (t_grid.size - 1)
        if not h > 0 or np.any(steps <= 0):
            raise BadGrid("sampled grid must be strictly increasing")
        if np.max(np.abs(steps - h)) > _JITTER_TOL * max(abs(h), 1.0) * t_grid.size:
            raise BadGrid("sampled grid is not uniform")
        return cls.sampled(t_grid[0], h, values, hermitian)

    # evaluation -------------------------------------------------------

    @property
    def bounds(self):
        if self.kind != "sampled":
            return (-np.inf, np.inf)
        d = self.data
        return (d["t0"], d["t0"] + d["h"] * (len(d["values"]) - 1))

    def coefficients(self, t) -> np.ndarray:
        """Four-vector ``f(t)``; shape ``t.shape + (4,)``."""
        t = np.asarray(t, dtype=float)
        kind = self.kind
        if kind == "constant":
            f = np.broadcast_to(self.data["f"], t.shape + (4,)).copy()
        elif kind == "polynomial":
            f = np.stack([np.polynomial.polynomial.polyval(t, c) * np.ones_like(t) for c in self.data["coefficients"]], axis=-1)
            f = f.astype(np.complex128)
        elif kind == "sinusoidal":
            p = self.data["params"]
            amp, omega, phase, offset = p[:, 0], p[:, 1].real, p[:, 2].real, p[:, 3]
            f = amp * np.sin(t[..., None] * omega + phase) + offset
        else:
            f = self._interpolate(t)
        if self.hermitian:
            defect = np.max(np.abs(f.imag), initial=0.0)
            if defect > _HERMITIAN_TOL:
                raise NonHermitian(f"potential flagged hermitian has |Im f| = {defect:.3e}")
        return f

    def _interpolate(self, t: np.ndarray) -> np.ndarray:
        d = self.data
        values, t0, h = d["values"], d["t0"], d["h"]
        n = len(values) - 1
        s = (t - t0) / h
        if np.any(s < -_GRID_TOL) or np.any(s > n + _GRID_TOL):
            lo, hi = self.bounds
            raise OutOfDomain(f"t outside sampled grid [{lo}, {hi}]")
        nearest = np.rint(s)
        on_node = np.abs(s - nearest) <= _GRID_TOL
        s = np.where(on_node, nearest, np.clip(s, 0, n))
        k = np.clip(np.floor(s).astype(int), 0, max(n - 1, 0))
        w = (s - k)[..., None]
        out = (1.0 - w) * values[k] + w * values[np.minimum(k + 1, n)]
        # node hits return the stored sample bit-for-bit
        idx = nearest.astype(int)
        out = np.where(on_node[..., None], values[np.clip(idx, 0, n)], out)
        return out

    def matrix(self, t) -> np.ndarray:
        return compose(self.coefficients(t))


def evaluate_potential(spec: PotentialSpec, t) -> np.ndarray:
    return spec.matrix(t)


def stationary_generator(spec: PotentialSpec, eps: float, t) -> np.ndarray:
    """Matrix ``A(t) = i s3 (V(t) - eps)`` of the first-order stationary system."""
    v = evaluate_potential(spec, t)
    v = v - eps * np.eye(2)
    return _I_SIGMA3 @ v


def stationary_rhs(spec: PotentialSpec, eps: float, t: float, psi) -> np.ndarray:
    return stationary_generator(spec, eps, t) @ _as_spinor(psi)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Spinor samples on the uniform grid ``t0 + k*h``, ``k = 0..n``."""

    t0: float
    h: float
    states: np.ndarray  # (n + 1, 2)
    eps: float
    potential: np.ndarray  # (n + 1, 4) coefficients of V at the nodes

    def __post_init__(self):
        if not self.h > 0:
            raise BadGrid("trajectory step must be > 0")
        if len(self.states) != len(self.potential):
            raise ValueError("states and potential samples differ in length")

    @property
    def count(self) -> int:
        return len(self.states)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.count)

    def same_grid(self, other: "Trajectory") -> bool:
        return (
            self.count == other.count
            and abs(self.t0 - other.t0) <= 1e-12 * max(1.0, abs(self.t0))
            and abs(self.h - other.h) <= 1e-12 * self.h
        )


def step_count(t0: float, t1: float, h: float) -> int:
    if not h > 0:
        raise BadGrid(f"step must satisfy h > 0, got h = {h}")
    ratio = (t1 - t0) / h
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > _GRID_TOL:
        raise BadGrid(f"(t1 - t0)/h = {ratio!r} is not an integer >= 1")
    return n


def half_grid(t0: float, h: float, n: int) -> np.ndarray:
    return t0 + 0.5 * h * np.arange(2 * n + 1)


def propagate(generator_half: np.ndarray, y0: np.ndarray, h: float) -> np.ndarray:
    """Run the RK4 kernel on generator samples at half steps."""
    with np.errstate(over="ignore", invalid="ignore"):
        ys = kernels.rk4_linear(np.ascontiguousarray(generator_half), np.ascontiguousarray(y0), h)
    if not np.all(np.isfinite(ys)):
        bad = int(np.argmax(~np.all(np.isfinite(ys.reshape(len(ys), -1)), axis=1)))
        raise NonFiniteState(f"integration produced non-finite values at step {bad}")
    return ys


def integrate_stationary(spec: PotentialSpec, eps: float, psi0, t0: float, t1: float, h: float) -> Trajectory:
    n = step_count(t0, t1, h)
    ts = half_grid(t0, h, n)
    f = spec.coefficients(ts)
    a = _I_SIGMA3 @ (compose(f) - eps * np.eye(2))
    ys = propagate(a, _as_spinor(psi0)[:, None], h)
    return Trajectory(float(t0), float(h), ys[:, :, 0], float(eps), f[::2])


def fundamental_matrix(spec: PotentialSpec, eps: float, t0: float, t1: float, h: float) -> np.ndarray:
    """Phi(t1) for ``Phi' = i s3 (V - eps) Phi``, ``Phi(t0) = identity``."""
    n = step_count(t0, t1, h)
    ts = half_grid(t0, h, n)
    a = _I_SIGMA3 @ (evaluate_potential(spec, ts) - eps * np.eye(2))
    return propagate(a, np.eye(2, dtype=np.complex128), h)[-1]


def norms2(states) -> np.ndarray:
    states = np.asarray(states)
    return np.sum(np.abs(states) ** 2, axis=-1)


def populations(traj) -> np.ndarray:
    """``(P_up, P_down)`` per node, normalized by the running norm."""
    states = traj.states if isinstance(traj, Trajectory) else np.atleast_2d(traj)
    p = np.abs(states) ** 2
    total = p.sum(axis=-1)
    if np.any(~(total > 0)):
        raise ZeroState("population requested for a zero-norm state")
    return p / total[..., None]
