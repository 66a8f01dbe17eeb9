"""Single-qubit gates from field-direction potentials.

A field configuration fixes a Pauli four-vector direction ``d`` and an
amplitude envelope; the propagator of ``i dU/dt = H(t) U`` with
``H = a env(t) d.sigma`` is classified against a small named-gate library
up to global phase, and :func:`synthesize` tunes ``(a, T)`` to hit a target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dirac_core import PotentialSpec, half_grid, propagate, step_count
from .errors import BadBounds, BadConfig, DiracDarbouxError, NonHermitian, NotUnitary
from .pauli import SIGMA0, SIGMA1, SIGMA2, SIGMA3, compose, dagger

ENVELOPES = ("constant", "sine-ramp")
UNITARY_TOL = 1e-6
TIE_TOL = 1e-12
GOLDEN_ITERATIONS = 20
GOLDEN_SWEEPS = 2
INVGOLD = (math.sqrt(5) - 1) / 2

_r2 = 1 / math.sqrt(2)
GATES = {
    "I": SIGMA0,
    "X": SIGMA1,
    "Y": SIGMA2,
    "Z": SIGMA3,
    "H": _r2 * (SIGMA1 + SIGMA3),
    "S": np.diag([1, 1j]).astype(np.complex128),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]).astype(np.complex128),
    "SQRT_X": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]),
}


@dataclass(frozen=True)
class FieldConfig:
    """Direction ``(d0, d1, d2, d3)``: scalar part on s0, field axis j on s_j."""

    direction: tuple
    amplitude: float
    duration: float
    envelope: str = "constant"
    h: float = 1e-3

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=np.complex128)
        if d.shape != (4,):
            raise BadConfig("direction must have 4 components (d0, d1, d2, d3)")
        if self.envelope not in ENVELOPES:
            raise BadConfig(f"envelope must be one of {ENVELOPES}, got {self.envelope!r}")
        if not self.amplitude >= 0:
            raise BadConfig(f"amplitude must be >= 0, got {self.amplitude}")
        if not self.duration > 0:
            raise BadConfig(f"duration must be > 0, got {self.duration}")
        if not self.h > 0:
            raise BadConfig(f"h must be > 0, got {self.h}")
        if self.amplitude > 0 and not np.any(np.abs(d) > 0):
            raise BadConfig("direction must be nonzero when amplitude > 0")


@dataclass
class GateReport:
    propagator: np.ndarray
    unitarity_defect: float
    best_match: str | None = None
    fidelity: float | None = None
    global_phase: float | None = None
    tie: bool = False
    fidelities: dict = field(default_factory=dict, repr=False)


def unitarity_defect(u) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(dagger(u) @ u - SIGMA0)))


def build_field_potential(cfg: FieldConfig) -> PotentialSpec:
    d = np.asarray(cfg.direction, dtype=np.complex128)
    hermitian = bool(np.all(d.imag == 0))
    f = cfg.amplitude * d
    if cfg.envelope == "constant":
        return PotentialSpec.constant(f, hermitian=hermitian)
    # sin^2(pi t / T) = 1/2 - 1/2 sin(2 pi t / T + pi / 2)
    omega = 2 * np.pi / cfg.duration
    return PotentialSpec.sinusoidal([(-0.5 * c, omega, np.pi / 2, 0.5 * c) for c in f], hermitian=hermitian)


def evolve_gate(spec: PotentialSpec, T: float, h: float, t0: float = 0.0) -> GateReport:
    """Propagator of ``i dU/dt = H(t) U`` over [t0, T], identity at ``t0``."""
    if not spec.hermitian:
        raise NonHermitian("gate evolution needs a potential flagged hermitian")
    n = step_count(t0, T, h)
    gen = -1j * compose(spec.coefficients(half_grid(t0, h, n)))
    u = propagate(gen, np.eye(2, dtype=np.complex128), h)[-1]
    return GateReport(u, unitarity_defect(u))


def fidelity(gate, u) -> complex:
    """Overlap ``tr(G^dagger U) / 2``; its modulus is the phase-invariant fidelity."""
    return complex(np.trace(dagger(gate) @ u)) / 2


def _phase(z: complex) -> float:
    phi = math.atan2(z.imag, z.real)
    return math.pi if phi <= -math.pi else phi


def classify_gate(u, library: dict = GATES) -> GateReport:
    u = np.asarray(u, dtype=np.complex128)
    defect = unitarity_defect(u)
    if defect > UNITARY_TOL:
        raise NotUnitary(f"unitarity defect {defect:.3e} exceeds {UNITARY_TOL:.0e}")
    overlaps = {name: fidelity(g, u) for name, g in library.items()}
    fids = {name: abs(z) for name, z in overlaps.items()}
    best = max(fids.values())
    winners = [name for name in library if fids[name] >= best - TIE_TOL]
    name = winners[0]
    return GateReport(u, defect, name, min(fids[name], 1.0), _phase(overlaps[name]), len(winners) > 1, fids)


def gate_for(cfg: FieldConfig, library: dict = GATES) -> GateReport:
    spec = build_field_potential(cfg)
    n = max(1, math.ceil(cfg.duration / cfg.h - 1e-9))
    report = evolve_gate(spec, cfg.duration, cfg.duration / n)
    return classify_gate(report.propagator, library)


@dataclass(frozen=True)
class SynthesisResult:
    amplitude: float
    duration: float
    target: str
    fidelity: float  # with respect to the target, not the best match
    global_phase: float
    report: GateReport
    evaluations: int
    incomplete: bool


def _golden_max(fun, lo, hi, iterations):
    a, b = lo, hi
    c = b - INVGOLD * (b - a)
    d = a + INVGOLD * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iterations):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INVGOLD * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVGOLD * (b - a)
            fd = fun(d)
    return (c, fc) if fc >= fd else (d, fd)


def synthesize(
    target: str,
    direction,
    a_bounds,
    T_bounds,
    budget: int = 400,
    envelope: str = "constant",
    h: float = 1e-3,
    target_fidelity: float = 0.999,
    library: dict = GATES,
) -> SynthesisResult:
    """Tune amplitude and duration to maximize the fidelity with ``target``.

    A uniform ``ceil(sqrt(budget))``-per-axis grid is followed by coordinate
    golden-section refinement inside the neighbouring grid cells. Every
    fidelity-one ridge ``a T = const`` is an optimum; refinement starts both
    from the best grid point and from the smallest-pulse-area grid point within
    0.01 of it, and among final fidelities equal to within 1e-9 the smaller pulse
    area ``a T`` wins.
    """
    if target not in library:
        raise BadConfig(f"unknown target gate {target!r}")
    (a_lo, a_hi), (t_lo, t_hi) = a_bounds, T_bounds
    if not (0 < a_lo < a_hi and 0 < t_lo < t_hi):
        raise BadBounds(f"bounds must be positive and ordered: a {a_bounds}, T {T_bounds}")
    if budget < 25:
        raise BadConfig(f"budget must be >= 25, got {budget}")
    gate = library[target]
    evaluations = 0

    def score(a, T):
        nonlocal evaluations
        evaluations += 1
        cfg = FieldConfig(tuple(direction), a, T, envelope, h)
        spec = build_field_potential(cfg)
        n = max(1, math.ceil(T / h - 1e-9))
        u = evolve_gate(spec, T, T / n).propagator
        return abs(fidelity(gate, u))

    per_axis = math.ceil(math.sqrt(budget))
    a_grid = np.linspace(a_lo, a_hi, per_axis)
    t_grid = np.linspace(t_lo, t_hi, per_axis)
    F = np.array([[score(a, T) for T in t_grid] for a in a_grid])
    da, dt = a_grid[1] - a_grid[0], t_grid[1] - t_grid[0]

    best_idx = np.unravel_index(np.argmax(F), F.shape)
    area = a_grid[:, None] * t_grid[None, :]
    near = F >= F[best_idx] - 0.01
    low_idx = np.unravel_index(np.argmin(np.where(near, area, np.inf)), F.shape)

    def refine(idx):
        a, T = a_grid[idx[0]], t_grid[idx[1]]
        f = F[idx]
        for _ in range(GOLDEN_SWEEPS):
            a_new, f_new = _golden_max(lambda x: score(x, T), max(a_lo, a - da), min(a_hi, a + da), GOLDEN_ITERATIONS)
            if f_new >= f:
                a, f = a_new, f_new
            T_new, f_new = _golden_max(lambda x: score(a, x), max(t_lo, T - dt), min(t_hi, T + dt), GOLDEN_ITERATIONS)
            if f_new >= f:
                T, f = T_new, f_new
        return a, T, f

    starts = [best_idx] if low_idx == best_idx else [best_idx, low_idx]
    candidates = [refine(idx) for idx in starts]
    top = max(c[2] for c in candidates)
    a_star, T_star, _ = min((c for c in candidates if c[2] >= top - 1e-9), key=lambda c: c[0] * c[1])
    cfg = FieldConfig(tuple(direction), a_star, T_star, envelope, h)
    report = gate_for(cfg, library)
    overlap = fidelity(gate, report.propagator)
    f_target = min(abs(overlap), 1.0)
    return SynthesisResult(
        float(a_star), float(T_star), target, f_target, _phase(overlap), report, evaluations, f_target < target_fidelity
    )


RESUME_COLUMNS = ("row", "d0", "d1", "d2", "d3", "amplitude", "duration", "best_match", "fidelity", "global_phase", "error")


def resume_table(configs, library: dict = GATES) -> list[dict]:
    """One classified row per configuration; failures land in the error column."""
    rows = []
    for k, cfg in enumerate(configs):
        row = {"row": k}
        try:
            if not isinstance(cfg, FieldConfig):
                cfg = FieldConfig(**cfg)
            d = cfg.direction
            row.update(d0=d[0], d1=d[1], d2=d[2], d3=d[3], amplitude=cfg.amplitude, duration=cfg.duration)
            rep = gate_for(cfg, library)
            row.update(best_match=rep.best_match, fidelity=rep.fidelity, global_phase=rep.global_phase, error="")
        except (DiracDarbouxError, TypeError, ValueError) as exc:
            row.setdefault("best_match", "")
            row.update(fidelity=float("nan"), global_phase=float("nan"), error=f"{type(exc).__name__}: {exc}")
        rows.append(row)
    return rows
