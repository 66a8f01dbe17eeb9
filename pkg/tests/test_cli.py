import csv
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_darboux import cli
from dirac_darboux.cli import ParseError, ValidationError, main, parse_config, render, summary_path


def run_cli(tmp_path, text, command, *flags):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(text)
    out = tmp_path / "out.csv"
    code = main([command, "--config", str(cfg), "--output", str(out), *flags])
    summary = json.loads(summary_path(out).read_text())
    return code, out, summary


class TestParse:
    def test_minimal_rabi(self):
        cfg = parse_config("command: rabi\ng: 1\nt_final: 10\nh: 0.001\n")
        p = cfg.params
        assert cfg.command == "rabi"
        assert (p["g"], p["t_final"], p["h"], p["detuning"], p["eps"]) == (1.0, 10.0, 1e-3, 0.0, 0.0)
        assert p["psi0"] == (1, 0)
        assert p["tolerances"] == {"residual": 1e-5, "fidelity": 0.999, "singular": 1e-8}

    def test_negative_h(self):
        with pytest.raises(ValidationError) as info:
            parse_config("command: rabi\nh: -0.1\n")
        assert info.value.key == "h" and "h > 0" in str(info.value)

    def test_unknown_key(self):
        with pytest.raises(ValidationError) as info:
            parse_config("command: rabi\ngg: 1\n")
        assert info.value.key == "gg" and "unknown key" in str(info.value)

    def test_comments_and_exponents(self):
        cfg = parse_config("# a comment\ncommand: rabi  # trailing\nh: 1e-3\nt_final: 1\n")
        assert cfg.params["h"] == 1e-3

    def test_malformed(self):
        with pytest.raises(ParseError, match="line"):
            parse_config("command: rabi\n  g: [1,\n")

    def test_not_a_mapping(self):
        with pytest.raises(ParseError):
            parse_config("- rabi\n")

    def test_grid_cross_check(self):
        with pytest.raises(ValidationError) as info:
            parse_config("command: rabi\nt_final: 1\nh: 0.3\n")
        assert info.value.key == "h"

    def test_tolerance_override(self):
        cfg = parse_config("command: verify\ntolerances: {residual: 1.0e-3}\n")
        assert cfg.tolerances["residual"] == 1e-3 and cfg.tolerances["singular"] == 1e-8
        with pytest.raises(ValidationError):
            parse_config("command: verify\ntolerances: {resid: 1}\n")

    def test_overrides_win(self):
        cfg = parse_config("command: controlled\nsigma: 1\n", {"sigma": 3, "lambda": 2.0, "h": None})
        assert cfg.params["sigma"] == 3 and cfg.params["lambda"] == 2.0 and cfg.params["h"] == 1e-2

    def test_command_clash(self):
        with pytest.raises(ValidationError):
            parse_config("command: rabi\n", {"command": "verify"})

    def test_potential_forms(self):
        text = "command: verify\npotential:\n  kind: sinusoidal\n  components:\n    f1: [0.3, 1.0, 0.0, 0.0]\n"
        spec = cli._potential_spec(parse_config(text).params["potential"])
        assert spec.coefficients(math.pi / 2)[1] == pytest.approx(0.3)
        with pytest.raises(ValidationError):
            parse_config("command: verify\npotential: {kind: constant, f: [0, 1]}\n")


class TestRoundTrip:
    @pytest.mark.parametrize(
        "text",
        [
            "command: rabi\n",
            "command: controlled\npsi0: [[0.6, 0.1], 0.8]\ndetuning: -0.5\nlambda_sweep: [0.5, 2]\n",
            "command: gate\ndirection: [0.2, 1, 0, 0]\namplitude: 2\nduration: 0.5\nenvelope: sine-ramp\n",
            "command: synthesize\ntarget: H\ndirection: [0, 1, 0, 1]\na_bounds: [0.5, 2]\nT_bounds: [0.5, 4]\n",
            "command: resume\nrows:\n  - {direction: [0, 1, 0, 0], amplitude: 0, duration: 1}\n",
            "command: verify\npotential: {kind: polynomial, coefficients: {f2: [0.1, [0, 0.2]]}}\n",
            "command: verify\npotential: {kind: sampled, t0: 0, h: 2.5, values: [[0,0,0,1],[0,0,0,2],[0,1,0,0]]}\n",
        ],
    )
    def test_examples(self, text):
        cfg = parse_config(text)
        assert parse_config(render(cfg)) == cfg

    @settings(max_examples=50, deadline=None)
    @given(
        g=st.floats(0, 10),
        detuning=st.floats(-10, 10),
        eps=st.floats(-5, 5),
        n=st.integers(1, 5000),
        h=st.floats(1e-4, 1.0),
        psi=st.tuples(st.floats(-1, 1), st.floats(-1, 1)),
    )
    def test_rabi_configs(self, g, detuning, eps, n, h, psi):
        text = render(parse_config(f"command: rabi\nh: {h!r}\nt_final: {n * h!r}\n"))
        base = parse_config(text)
        params = dict(base.params, g=g, detuning=detuning, eps=eps, psi0=(complex(*psi), 0j))
        cfg = cli.RunConfig("rabi", params)
        assert parse_config(render(cfg)) == cfg


class TestRun:
    def test_rabi_csv(self, tmp_path):
        code, out, summary = run_cli(tmp_path, "command: rabi\nt_final: 100\nh: 0.01\n", "rabi")
        assert code == 0 and summary["status"] == "ok"
        with out.open() as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == cli.INVERSION_COLUMNS
        assert len(rows) == 10002
        assert float(rows[1][3]) == 1.0
        assert 0.95 <= summary["results"]["collapse_metric"] <= 1.05
        assert summary["config"]["g"] == 1.0

    def test_deterministic_bytes(self, tmp_path):
        text = "command: controlled\nsigma: 1\nlambda: 0.5\nt_final: 20\n"
        outputs = []
        for _ in range(2):
            code, out, _ = run_cli(tmp_path, text, "controlled")
            assert code == 0
            outputs.append((out.read_bytes(), summary_path(out).read_bytes()))
        assert outputs[0] == outputs[1]

    def test_floats_lossless(self, tmp_path):
        code, out, _ = run_cli(tmp_path, "command: rabi\nt_final: 1\nh: 0.1\ng: 0.7\n", "rabi")
        from dirac_darboux.cavity import RabiConfig, rabi_baseline

        series = rabi_baseline(RabiConfig(g=0.7, t_final=1, h=0.1))
        with out.open() as fh:
            rows = list(csv.DictReader(fh))
        assert [float(r["P_down"]) for r in rows] == list(series.P_down)

    def test_singular_exit_3(self, tmp_path, capsys):
        text = "command: verify\nsigma: 1\nlambda: 1\nt_final: 1\n"
        code, out, summary = run_cli(tmp_path, text, "verify")
        assert code == 3
        assert abs(summary["t_star"] - math.pi / 4) < 1e-3
        assert "SingularSeed" in summary["error"] and "t*" in capsys.readouterr().err
        assert not out.exists()

    def test_controlled_singular_exit_3(self, tmp_path):
        code, _, summary = run_cli(tmp_path, "command: controlled\nsigma: 1\nlambda: 1\n", "controlled")
        assert code == 3 and 0 < summary["t_star"] < 100

    def test_controlled_sweep(self, tmp_path):
        code, _, summary = run_cli(tmp_path, "command: controlled\nlambda_sweep: [2, 0.5]\n", "controlled")
        assert code == 0
        assert summary["results"]["lambda_used"] == 0.5
        assert set(summary["results"]["skipped_lambdas"]) == {"1", "2"}
        assert summary["results"]["seed_eigenvalues"] == [0.5, -0.5]

    def test_verify_commuting(self, tmp_path):
        text = "command: verify\npotential: {kind: constant, f: [0, 0, 0, 0.3]}\neps: 1.2\npsi0: [0.6, 0.8]\n"
        code, _, summary = run_cli(tmp_path, text, "verify")
        assert code == 0 and summary["results"]["residual_max"] <= 1e-6

    def test_verify_exit_4(self, tmp_path):
        text = "command: verify\ntolerances: {residual: 1.0e-9}\n"
        code, out, summary = run_cli(tmp_path, text, "verify")
        assert code == 4 and summary["status"] == "verification_failed" and out.exists()

    def test_config_error_exit_2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.yaml"
        cfg.write_text("command: rabi\nh: -0.1\n")
        assert main(["rabi", "--config", str(cfg)]) == 2
        assert "h > 0" in capsys.readouterr().err
        assert main(["rabi", "--config", str(tmp_path / "missing.yaml")]) == 2
        assert main(["rabi", "--config", str(cfg), "--sigma", "2", "--h", "0.1"]) == 2

    def test_flag_overrides(self, tmp_path):
        code, out, summary = run_cli(tmp_path, "command: rabi\n", "rabi", "--h", "0.05", "--t-final", "2")
        assert code == 0 and summary["config"]["h"] == 0.05
        assert len(out.read_text().splitlines()) == 42

    def test_resume_csv(self, tmp_path):
        text = (
            "command: resume\nrows:\n"
            "  - {direction: [0, 1, 0, 0], amplitude: 0, duration: 1}\n"
            "  - {direction: [0, 1, 0, 0], amplitude: -1, duration: 1}\n"
            "  - {direction: [0, [0, 1], 0, 0], amplitude: 1, duration: 1}\n"
            "  - {direction: [0, 0, 0, 1], amplitude: 1, duration: 1.5707963267948966}\n"
        )
        code, out, summary = run_cli(tmp_path, text, "resume")
        assert code == 0
        with out.open() as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0]) == list(cli.transistor.RESUME_COLUMNS)
        assert rows[0]["best_match"] == "I" and float(rows[0]["fidelity"]) == 1.0 and float(rows[0]["global_phase"]) == 0
        assert rows[1]["error"].startswith("BadConfig")
        assert rows[2]["error"].startswith("NonHermitian")
        assert rows[3]["best_match"] == "Z"
        assert summary["results"]["failed_rows"] == [1, 2]

    def test_gate_and_synthesize(self, tmp_path):
        code, out, summary = run_cli(
            tmp_path, "command: gate\ndirection: [0, 1, 0, 0]\namplitude: 1\nduration: 1.5707963267948966\n", "gate"
        )
        assert code == 0 and summary["results"]["best_match"] == "X"
        text = "command: synthesize\ntarget: Z\ndirection: [0, 0, 0, 1]\na_bounds: [0.5, 2]\nT_bounds: [0.5, 2]\nbudget: 25\n"
        code, out, summary = run_cli(tmp_path, text, "synthesize")
        assert code == 0 and summary["results"]["fidelity"] >= 0.999

    def test_short_run_has_no_metric(self, tmp_path):
        code, _, summary = run_cli(tmp_path, "command: rabi\nt_final: 1\nh: 0.1\n", "rabi")
        assert code == 0 and summary["results"]["collapse_metric"] is None

    def test_atomic_write_leaves_no_temp(self, tmp_path):
        run_cli(tmp_path, "command: rabi\nt_final: 1\nh: 0.1\n", "rabi")
        assert sorted(p.name for p in tmp_path.iterdir()) == ["out.csv", "out.summary.json", "run.yaml"]


@pytest.mark.parametrize("command", [[], ["verify"]])
def test_help(command):
    proc = subprocess.run([sys.executable, "-m", "dirac_darboux.cli", *command, "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "--config" in proc.stdout or "verify" in proc.stdout
