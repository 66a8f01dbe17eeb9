"""Command-line front end.

Run configurations are YAML documents (comments allowed). Every command
writes one CSV file plus a ``<stem>.summary.json`` next to it; outputs are
written through a temporary file and renamed into place.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import cavity, darboux, transistor
from .dirac_core import PotentialSpec, integrate_stationary, step_count
from .errors import BadGrid, DiracDarbouxError, NumericalError, TooShort

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VERIFY = 0, 2, 3, 4

COMMANDS = ("rabi", "controlled", "gate", "synthesize", "resume", "verify")

INVERSION_COLUMNS = (
    "t", "P_up", "P_down", "W",
    "f0_re", "f0_im", "f1_re", "f1_im", "f2_re", "f2_im", "f3_re", "f3_im",
)

DEFAULT_TOLERANCES = {"residual": 1e-5, "fidelity": 0.999, "singular": darboux.SINGULAR_TOL}


class ConfigError(DiracDarbouxError):
    pass


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    def __init__(self, key, constraint):
        self.key = key
        self.constraint = constraint
        super().__init__(f"{key}: {constraint}")


# value validators ----------------------------------------------------------


def _real(key, value):
    if isinstance(value, str):
        # PyYAML reads exponent forms such as 1e-3 as strings
        try:
            value = float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(key, f"must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(key, "must be finite")
    return value


def _positive(key, value):
    value = _real(key, value)
    if not value > 0:
        raise ValidationError(key, f"{key} > 0")
    return value


def _nonneg(key, value):
    value = _real(key, value)
    if not value >= 0:
        raise ValidationError(key, f"{key} >= 0")
    return value


def _complex(key, value):
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            raise ValidationError(key, f"cannot parse complex number {value!r}") from None
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(_real(key, value[0]), _real(key, value[1]))
    return complex(_real(key, value))


def _vector(n, item=_complex):
    def check(key, value):
        if not isinstance(value, (list, tuple)) or len(value) != n:
            raise ValidationError(key, f"must be a list of {n} entries")
        return tuple(item(f"{key}[{k}]", v) for k, v in enumerate(value))

    return check


def _sigma(key, value):
    if value not in (1, 2, 3) or isinstance(value, bool):
        raise ValidationError(key, "must be 1, 2 or 3")
    return int(value)


def _choice(options):
    def check(key, value):
        if value not in options:
            raise ValidationError(key, f"must be one of {list(options)}")
        return value

    return check


def _bounds(key, value):
    lo, hi = _vector(2, _positive)(key, value)
    if not lo < hi:
        raise ValidationError(key, "lower bound must be < upper bound")
    return (lo, hi)


def _budget(key, value):
    if isinstance(value, bool) or not isinstance(value, int) or value < 25:
        raise ValidationError(key, "must be an integer >= 25")
    return value


def _lambda_list(key, value):
    if not isinstance(value, (list, tuple)):
        raise ValidationError(key, "must be a list of positive numbers")
    return tuple(_positive(f"{key}[{k}]", v) for k, v in enumerate(value))


def _string(key, value):
    if not isinstance(value, str):
        raise ValidationError(key, "must be a string")
    return value


def _tolerances(key, value):
    if not isinstance(value, dict):
        raise ValidationError(key, "must be a mapping")
    out = dict(DEFAULT_TOLERANCES)
    for k, v in value.items():
        if k not in DEFAULT_TOLERANCES:
            raise ValidationError(f"{key}.{k}", "unknown key")
        out[k] = _positive(f"{key}.{k}", v)
    return out


_POTENTIAL_KINDS = ("constant", "polynomial", "sinusoidal", "sampled")
_COMPONENTS = ("f0", "f1", "f2", "f3")


def _potential(key, value):
    """Normalize a potential mapping to its canonical form."""
    if not isinstance(value, dict):
        raise ValidationError(key, "must be a mapping with a 'kind'")
    kind = value.get("kind")
    if kind not in _POTENTIAL_KINDS:
        raise ValidationError(f"{key}.kind", f"must be one of {list(_POTENTIAL_KINDS)}")
    allowed = {
        "constant": {"kind", "f"},
        "polynomial": {"kind", "coefficients"},
        "sinusoidal": {"kind", "components"},
        "sampled": {"kind", "t0", "h", "values"},
    }[kind]
    for k in value:
        if k not in allowed:
            raise ValidationError(f"{key}.{k}", "unknown key")
    out = {"kind": kind}
    if kind == "constant":
        out["f"] = _vector(4)(f"{key}.f", value.get("f", [0, 0, 0, 0]))
    elif kind in ("polynomial", "sinusoidal"):
        name = "coefficients" if kind == "polynomial" else "components"
        comps = value.get(name, {})
        if not isinstance(comps, dict):
            raise ValidationError(f"{key}.{name}", "must map f0..f3 to parameter lists")
        parsed = {}
        for comp, params in comps.items():
            ck = f"{key}.{name}.{comp}"
            if comp not in _COMPONENTS:
                raise ValidationError(ck, "unknown key")
            if kind == "polynomial":
                if not isinstance(params, (list, tuple)) or not params:
                    raise ValidationError(ck, "must be a nonempty coefficient list")
                parsed[comp] = tuple(_complex(f"{ck}[{j}]", c) for j, c in enumerate(params))
            else:
                amp, omega, phase, offset = _vector(4)(ck, params)
                parsed[comp] = (amp, _real(f"{ck}[1]", omega.real), _real(f"{ck}[2]", phase.real), offset)
        out[name] = {c: parsed[c] for c in _COMPONENTS if c in parsed}
    else:
        out["t0"] = _real(f"{key}.t0", value.get("t0", 0.0))
        out["h"] = _positive(f"{key}.h", value.get("h"))
        rows = value.get("values")
        if not isinstance(rows, (list, tuple)) or len(rows) < 2:
            raise ValidationError(f"{key}.values", "needs at least two four-vectors")
        out["values"] = tuple(_vector(4)(f"{key}.values[{j}]", r) for j, r in enumerate(rows))
    return out


def _resume_rows(key, value):
    if not isinstance(value, (list, tuple)) or not value:
        raise ValidationError(key, "must be a nonempty list of field configurations")
    rows = []
    for j, row in enumerate(value):
        rk = f"{key}[{j}]"
        if not isinstance(row, dict):
            raise ValidationError(rk, "must be a mapping")
        for k in row:
            if k not in _RESUME_ROW_SCHEMA:
                raise ValidationError(f"{rk}.{k}", "unknown key")
        rows.append(_fill(rk, row, _RESUME_ROW_SCHEMA))
    return tuple(rows)


_REQUIRED = object()

_ROW_SCHEMA = {
    "direction": (_vector(4), _REQUIRED),
    "amplitude": (_nonneg, _REQUIRED),
    "duration": (_positive, _REQUIRED),
    "envelope": (_choice(transistor.ENVELOPES), "constant"),
    "h": (_positive, 1e-3),
}

# value constraints on resume rows are checked per row so one bad row cannot
# suppress the others
_RESUME_ROW_SCHEMA = {
    "direction": (_vector(4), _REQUIRED),
    "amplitude": (_real, _REQUIRED),
    "duration": (_real, _REQUIRED),
    "envelope": (_string, "constant"),
    "h": (_real, 1e-3),
}

_COMMON = {
    "command": (_choice(COMMANDS), _REQUIRED),
    "output": (_string, None),
    "tolerances": (_tolerances, DEFAULT_TOLERANCES),
}

_RABI = {
    "g": (_nonneg, 1.0),
    "detuning": (_real, 0.0),
    "eps": (_real, 0.0),
    "t_final": (_positive, 100.0),
    "h": (_positive, 1e-2),
    "psi0": (_vector(2), (1 + 0j, 0j)),
}

SCHEMAS = {
    "rabi": {**_COMMON, **_RABI, "window_fraction": (_positive, 0.1)},
    "controlled": {
        **_COMMON, **_RABI,
        "sigma": (_sigma, 1),
        "lambda": (_positive, 1.0),
        "lambda_sweep": (_lambda_list, ()),
        "window_fraction": (_positive, 0.1),
    },
    "gate": {**_COMMON, **_ROW_SCHEMA},
    "synthesize": {
        **_COMMON,
        "target": (_choice(tuple(transistor.GATES)), _REQUIRED),
        "direction": (_vector(4), _REQUIRED),
        "a_bounds": (_bounds, _REQUIRED),
        "T_bounds": (_bounds, _REQUIRED),
        "budget": (_budget, 400),
        "envelope": (_choice(transistor.ENVELOPES), "constant"),
        "h": (_positive, 1e-3),
    },
    "resume": {**_COMMON, "rows": (_resume_rows, _REQUIRED)},
    "verify": {
        **_COMMON,
        "potential": (_potential, {"kind": "constant", "f": (0j, 0j, 0j, 0j)}),
        "sigma": (_sigma, 3),
        "lambda": (_positive, 1.0),
        "eps": (_real, 2.0),
        "psi0": (_vector(2), (1 + 0j, 0j)),
        "t0": (_real, 0.0),
        "t_final": (_real, 5.0),
        "h": (_positive, 1e-3),
    },
}


def _fill(prefix, raw, schema):
    out = {}
    for key, (check, default) in schema.items():
        name = f"{prefix}.{key}" if prefix else key
        if key in raw:
            out[key] = check(name, raw[key])
        elif default is _REQUIRED:
            raise ValidationError(name, "required key missing")
        else:
            out[key] = default
    return out


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)

    @property
    def output(self):
        return self.params.get("output")

    @property
    def tolerances(self):
        return self.params["tolerances"]


def validate(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ParseError("configuration document must be a mapping")
    command = raw.get("command")
    if command not in SCHEMAS:
        raise ValidationError("command", f"must be one of {list(COMMANDS)}")
    schema = SCHEMAS[command]
    for key in raw:
        if key not in schema:
            raise ValidationError(key, "unknown key")
    params = _fill("", raw, schema)
    _check_cross(command, params)
    return RunConfig(command, params)


def _check_cross(command, p):
    try:
        if command in ("rabi", "controlled"):
            step_count(0.0, p["t_final"], p["h"])
        elif command == "verify":
            step_count(p["t0"], p["t_final"], p["h"])
    except BadGrid as exc:
        raise ValidationError("h", f"t_final/h must be an integer >= 1 ({exc})") from None
    if command in ("rabi", "controlled") and not 0 < p["window_fraction"] <= 0.5:
        raise ValidationError("window_fraction", "0 < window_fraction <= 0.5")


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse and validate a YAML configuration document."""
    try:
        raw = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ParseError(f"malformed configuration{where}: {getattr(exc, 'problem', exc)}") from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ParseError("configuration document must be a mapping")
    raw = dict(raw)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "command" and raw.get("command", value) != value:
            raise ValidationError("command", f"config says {raw['command']!r} but {value!r} was invoked")
        raw[key] = value
    return validate(raw)


def _plain(value):
    if isinstance(value, complex):
        return value.real if value.imag == 0 else [value.real, value.imag]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def config_dict(cfg: RunConfig) -> dict:
    return _plain({k: v for k, v in cfg.params.items() if v is not None})


def render(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_dict(cfg), sort_keys=True)


# output ------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    if isinstance(value, (complex, np.complexfloating)):
        if value.imag == 0:
            return "%.17g" % value.real
        return "(%.17g%+.17gj)" % (value.real, value.imag)
    return str(value)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [_json_safe(value.real), _json_safe(value.imag)]
    return value


def summary_path(csv_path: Path) -> Path:
    return csv_path.with_name(csv_path.stem + ".summary.json")


def inversion_rows(series: cavity.InversionSeries):
    prof = cavity.potential_profile(series)
    for j in range(len(series.t)):
        row = {"t": series.t[j], "P_up": series.P_up[j], "P_down": series.P_down[j], "W": series.W[j]}
        row.update({k: prof[k][j] for k in INVERSION_COLUMNS[4:]})
        yield row


# commands ------------------------------------------------------------------


def _rabi_config(p) -> cavity.RabiConfig:
    return cavity.RabiConfig(p["g"], p["detuning"], p["eps"], p["t_final"], p["h"], p["psi0"])


def _potential_spec(p) -> PotentialSpec:
    kind = p["kind"]
    if kind == "constant":
        return PotentialSpec.constant(p["f"])
    if kind == "polynomial":
        return PotentialSpec.polynomial({int(c[1]): v for c, v in p["coefficients"].items()})
    if kind == "sinusoidal":
        return PotentialSpec.sinusoidal({int(c[1]): v for c, v in p["components"].items()})
    return PotentialSpec.sampled(p["t0"], p["h"], p["values"])


def _collapse(series, p):
    try:
        return cavity.collapse_metric(series.W, p["window_fraction"])
    except TooShort:
        return None


def _run_rabi(p):
    series = cavity.rabi_baseline(_rabi_config(p))
    results = {"collapse_metric": _collapse(series, p)}
    return INVERSION_COLUMNS, list(inversion_rows(series)), results, EXIT_OK


def _run_controlled(p):
    cfg = _rabi_config(p)
    tol = p["tolerances"]["singular"]
    lambdas = (p["lambda"],) + tuple(x for x in p["lambda_sweep"] if x != p["lambda"])
    series, failures = cavity.controlled_run_with_fallback(cfg, p["sigma"], lambdas, tol)
    results = {
        "collapse_metric": _collapse(series, p),
        "lambda_used": series.lam,
        "seed_eigenvalues": list(series.eigenvalues),
        "skipped_lambdas": {_fmt(k): str(v) for k, v in failures.items()},
    }
    return INVERSION_COLUMNS, list(inversion_rows(series)), results, EXIT_OK


def _run_gate(p):
    row = {k: p[k] for k in _ROW_SCHEMA}
    cfg = transistor.FieldConfig(**row)
    report = transistor.gate_for(cfg)
    d = cfg.direction
    out = {
        "row": 0, "d0": d[0], "d1": d[1], "d2": d[2], "d3": d[3],
        "amplitude": cfg.amplitude, "duration": cfg.duration,
        "best_match": report.best_match, "fidelity": report.fidelity,
        "global_phase": report.global_phase, "error": "",
    }
    results = {
        "best_match": report.best_match,
        "fidelity": report.fidelity,
        "global_phase": report.global_phase,
        "unitarity_defect": report.unitarity_defect,
        "tie": report.tie,
    }
    return transistor.RESUME_COLUMNS, [out], results, EXIT_OK


def _run_synthesize(p):
    res = transistor.synthesize(
        p["target"], p["direction"], p["a_bounds"], p["T_bounds"], p["budget"],
        p["envelope"], p["h"], p["tolerances"]["fidelity"],
    )
    d = p["direction"]
    out = {
        "row": 0, "d0": d[0], "d1": d[1], "d2": d[2], "d3": d[3],
        "amplitude": res.amplitude, "duration": res.duration,
        "best_match": res.report.best_match, "fidelity": res.fidelity,
        "global_phase": res.global_phase,
        "error": "SynthesisIncomplete" if res.incomplete else "",
    }
    results = {
        "amplitude": res.amplitude,
        "duration": res.duration,
        "fidelity": res.fidelity,
        "best_match": res.report.best_match,
        "evaluations": res.evaluations,
        "synthesis_incomplete": res.incomplete,
    }
    return transistor.RESUME_COLUMNS, [out], results, EXIT_OK


def _run_resume(p):
    table = transistor.resume_table([dict(r) for r in p["rows"]])
    for row in table:
        for c in transistor.RESUME_COLUMNS:
            row.setdefault(c, "")
    results = {"rows": len(table), "failed_rows": [r["row"] for r in table if r["error"]]}
    return transistor.RESUME_COLUMNS, table, results, EXIT_OK


def _run_verify(p):
    spec = _potential_spec(p["potential"])
    seed = darboux.seed_for_sigma(p["sigma"], spec, p["lambda"], p["t0"], p["t_final"], p["h"], p["tolerances"]["singular"])
    traj = integrate_stationary(spec, p["eps"], p["psi0"], p["t0"], p["t_final"], p["h"])
    result = darboux.delta_V(seed)
    report = darboux.verify_intertwining(seed, traj, result)
    tol = p["tolerances"]["residual"]
    t = traj.t[1:-1]
    rows = [{"t": t[j], "residual": report.residual[j]} for j in range(len(t))]
    results = {
        "residual_max": report.max,
        "residual_mean": report.mean,
        "zero_output": report.zero_output,
        "residual_tolerance": tol,
        "seed_eigenvalues": list(result.eigenvalues),
    }
    code = EXIT_OK if report.passed(tol) else EXIT_VERIFY
    return ("t", "residual"), rows, results, code


_RUNNERS = {
    "rabi": _run_rabi,
    "controlled": _run_controlled,
    "gate": _run_gate,
    "synthesize": _run_synthesize,
    "resume": _run_resume,
    "verify": _run_verify,
}


def run(cfg: RunConfig, output: str | os.PathLike | None = None) -> int:
    """Execute a validated configuration and write its artifacts."""
    path = Path(output or cfg.output or f"{cfg.command}.csv")
    summary = {"command": cfg.command, "config": config_dict(cfg)}
    try:
        columns, rows, results, code = _RUNNERS[cfg.command](cfg.params)
    except NumericalError as exc:
        summary.update(status="numerical_failure", error=f"{type(exc).__name__}: {exc}", exit_code=EXIT_NUMERICAL)
        if isinstance(exc, darboux.SingularSeed):
            summary["t_star"] = exc.t_star
        _atomic_write(summary_path(path), json.dumps(_json_safe(summary), sort_keys=True, indent=2) + "\n")
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    summary.update(status="ok" if code == EXIT_OK else "verification_failed", results=results, exit_code=code)
    _atomic_write(path, csv_text(columns, rows))
    _atomic_write(summary_path(path), json.dumps(_json_safe(summary), sort_keys=True, indent=2) + "\n")
    if code == EXIT_VERIFY:
        print(f"verification failed: residual max {results['residual_max']} > {results['residual_tolerance']}", file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dirac-darboux", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "rabi": "baseline two-level Rabi dynamics",
        "controlled": "Rabi dynamics under the Darboux controller D(sigma_i)",
        "gate": "propagator and gate classification for one field configuration",
        "synthesize": "tune amplitude and duration towards a target gate",
        "resume": "classify a list of field configurations",
        "verify": "numerically check the intertwining relation",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name], description=helps[name])
        p.add_argument("--config", type=Path, help="YAML configuration document")
        p.add_argument("--output", help="CSV output path (summary written alongside)")
        p.add_argument("--h", type=float, help="step size")
        p.add_argument("--t-final", dest="t_final", type=float, help="final time")
        p.add_argument("--sigma", type=int, help="controller index 1, 2 or 3")
        p.add_argument("--lambda", dest="lam", type=float, help="seed eigenvalue magnitude")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text() if args.config else ""
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    overrides = {
        "command": args.command,
        "output": args.output,
        "h": args.h,
        "t_final": args.t_final,
        "sigma": args.sigma,
        "lambda": args.lam,
    }
    try:
        cfg = parse_config(text, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
