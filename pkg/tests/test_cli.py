"""Command-line behavior: artifacts, determinism, exit codes."""
import json
import os
import subprocess
import sys

import pytest

from test_config import MINIMAL_GAUSSIAN, discrete_config_dict, simulate_config_dict
from twdp.cli import main
from twdp.errors import InternalConsistencyError


def run_cli(args, env_extra=None, cwd=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "twdp.cli", *args],
        capture_output=True, text=True, env=env, cwd=cwd,
    )


@pytest.fixture
def gaussian_cfg(tmp_path):
    path = tmp_path / "gauss.json"
    path.write_text(json.dumps(MINIMAL_GAUSSIAN))
    return str(path)


@pytest.fixture
def discrete_cfg(tmp_path):
    path = tmp_path / "disc.json"
    path.write_text(json.dumps(discrete_config_dict()))
    return str(path)


@pytest.fixture
def simulate_cfg(tmp_path):
    path = tmp_path / "sim.json"
    path.write_text(json.dumps(simulate_config_dict()))
    return str(path)


class TestGaussianCommand:
    def test_report_contains_half_bit_corners(self, gaussian_cfg, tmp_path):
        out = tmp_path / "report.json"
        proc = run_cli(["gaussian", "--input", gaussian_cfg, "--output", str(out)])
        assert proc.returncode == 0, proc.stderr
        body = json.loads(out.read_text())
        assert abs(body["gp_rate"]["r1"] - 0.5) < 1e-9
        assert abs(body["gp_rate"]["r2"] - 0.5) < 1e-9

    def test_stdout_when_no_output_path(self, gaussian_cfg):
        proc = run_cli(["gaussian", "--input", gaussian_cfg])
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["command"] == "gaussian"


class TestRegionCommand:
    def test_csv_and_sidecar(self, discrete_cfg, tmp_path):
        out = tmp_path / "region.csv"
        proc = run_cli(["region", "--input", discrete_cfg, "--output", str(out)])
        assert proc.returncode == 0, proc.stderr
        lines = out.read_text().splitlines()
        assert lines[0] == "r1,r2,is_frontier"
        for line in lines[1:]:
            r1, r2, flag = line.split(",")
            assert flag in ("true", "false")
            assert r1 == format(float(r1), ".12g")  # 12 significant digits
        side = json.loads((tmp_path / "region.json").read_text())
        assert side["frontier"], "sidecar must carry the achieving policies"
        entry = side["frontier"][0]
        assert "policy1" in entry and "aux_given_state" in entry["policy1"]

    def test_convexify_flag_adds_hull(self, discrete_cfg):
        proc = run_cli(["region", "--input", discrete_cfg, "--convexify"])
        assert proc.returncode == 0
        assert "convex_hull" in json.loads(proc.stdout)

    def test_grid_step_override_rejected_when_bad(self, discrete_cfg):
        proc = run_cli(["region", "--input", discrete_cfg, "--grid-step", "0.7"])
        assert proc.returncode == 1
        assert "grid" in proc.stderr.lower() or "step" in proc.stderr.lower()

    def test_byte_identical_reruns(self, discrete_cfg, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli(["region", "--input", discrete_cfg, "--output", str(out1)])
        run_cli(["region", "--input", discrete_cfg, "--output", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


class TestSimulateCommand:
    def test_report_and_curve(self, simulate_cfg, tmp_path):
        rep = tmp_path / "rep.json"
        curve = tmp_path / "curve.csv"
        proc = run_cli(["simulate", "--input", simulate_cfg,
                        "--output", str(rep), "--curve", str(curve)])
        assert proc.returncode == 0, proc.stderr
        body = json.loads(rep.read_text())
        assert [r["n"] for r in body["runs"]] == [8, 12]
        lines = curve.read_text().splitlines()
        assert lines[0] == "n,p_err1,p_err2,encode_fail1,encode_fail2"
        assert len(lines) == 3

    def test_zero_trials_override_exits_1(self, simulate_cfg):
        proc = run_cli(["simulate", "--input", simulate_cfg, "--trials", "0"])
        assert proc.returncode == 1
        assert "trial" in proc.stderr.lower()

    def test_seed_override_reflected(self, simulate_cfg):
        proc = run_cli(["simulate", "--input", simulate_cfg, "--seed", "42"])
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["seed"] == 42

    def test_thread_count_does_not_change_bytes(self, simulate_cfg, tmp_path):
        out1, out2 = tmp_path / "t1.json", tmp_path / "t8.json"
        p1 = run_cli(["simulate", "--input", simulate_cfg, "--output", str(out1)],
                     env_extra={"TWDP_THREADS": "1"})
        p8 = run_cli(["simulate", "--input", simulate_cfg, "--output", str(out2)],
                     env_extra={"TWDP_THREADS": "8"})
        assert p1.returncode == 0 and p8.returncode == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestVerifyCommand:
    def test_gaussian_verify_prints_properties(self, gaussian_cfg):
        proc = run_cli(["verify", "--input", gaussian_cfg])
        assert proc.returncode == 0, proc.stderr
        assert "PASS entropy_identity" in proc.stdout
        assert "FAIL" not in proc.stdout

    def test_failed_property_exits_2(self, gaussian_cfg, monkeypatch, capsys):
        import twdp.cli as cli_mod
        monkeypatch.setattr(cli_mod, "run_verify", lambda parsed: {
            "command": "verify", "kind": "gaussian", "all_passed": False,
            "properties": [{"name": "broken_thing", "passed": False, "detail": "x"}],
        })
        with pytest.raises(SystemExit) as exc:
            main(["verify", "--input", gaussian_cfg])
        assert exc.value.code == 2
        assert "FAIL broken_thing" in capsys.readouterr().out


class TestExitCodes:
    def test_validation_error_exits_1(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(dict(MINIMAL_GAUSSIAN, rho_s=2.0)))
        proc = run_cli(["gaussian", "--input", str(bad)])
        assert proc.returncode == 1
        assert "rho_s" in proc.stderr

    def test_parse_error_exits_1(self, tmp_path):
        bad = tmp_path / "broken.json"
        bad.write_text('{"kind": ???}')
        proc = run_cli(["gaussian", "--input", str(bad)])
        assert proc.returncode == 1
        assert "line" in proc.stderr

    def test_missing_file_exits_1(self):
        proc = run_cli(["gaussian", "--input", "/nonexistent/nope.json"])
        assert proc.returncode == 1

    def test_kind_mismatch_exits_1(self, discrete_cfg):
        proc = run_cli(["gaussian", "--input", discrete_cfg])
        assert proc.returncode == 1

    def test_internal_error_exits_2(self, gaussian_cfg, monkeypatch):
        import twdp.cli as cli_mod

        def boom(spec):
            raise InternalConsistencyError("covariance check failed")

        monkeypatch.setattr(cli_mod, "run_gaussian", boom)
        with pytest.raises(SystemExit) as exc:
            main(["gaussian", "--input", gaussian_cfg])
        assert exc.value.code == 2

    def test_unknown_flag_exits_1(self, gaussian_cfg):
        proc = run_cli(["gaussian", "--input", gaussian_cfg, "--bogus"])
        assert proc.returncode == 1
