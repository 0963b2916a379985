import json
import math

import pytest

from conewave import cli


class TestConfig:
    def test_defaults_valid(self):
        cfg = cli.load_config()
        assert cfg.d == 4 and cfg.N == 96

    def test_file_and_overrides(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("d = 5\ntau_max = 8.0  # horizon\npairs = 2,5;inf,3.5\n")
        cfg = cli.load_config(p, {"seed": 7, "N": None})
        assert cfg.d == 5
        assert cfg.tau_max == 8.0
        assert cfg.seed == 7
        assert cfg.pairs[1] == (math.inf, 3.5)

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("dtau_wrong = 0.1\n")
        with pytest.raises(ValueError):
            cli.load_config(p)

    def test_malformed_line(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("just some text\n")
        with pytest.raises(ValueError):
            cli.load_config(p)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            cli.load_config(None, {"N": 4})
        with pytest.raises(ValueError):
            cli.load_config(None, {"delta": 0.9})


class TestExitCodes:
    def test_malformed_config_exit(self, tmp_path, capsys):
        p = tmp_path / "bad.cfg"
        p.write_text("no equals sign\n")
        code = cli.main(["evolve", "--config", str(p)])
        assert code == cli.EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_bad_flag_exit(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["evolve", "--nonsense"])
        assert exc.value.code == cli.EXIT_CONFIG

    def test_bad_range_exit(self, capsys):
        code = cli.main(["evolve", "--N", "4", "--out", "/tmp/x"])
        assert code == cli.EXIT_CONFIG


class TestCommands:
    def test_evolve_deterministic(self, tmp_path):
        args = ["evolve", "--N", "32", "--tau-max", "1.0", "--seed", "5"]
        assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
        assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0
        csv_a = (tmp_path / "a" / "trajectory.csv").read_bytes()
        csv_b = (tmp_path / "b" / "trajectory.csv").read_bytes()
        assert csv_a == csv_b
        side = json.loads((tmp_path / "a" / "trajectory_norms.json").read_text())
        assert side["mode"] == "linear-perturbed"
        manifest = json.loads(
            (tmp_path / "a" / "evolve_manifest.json").read_text())
        assert manifest["config"]["N"] == 32
        assert "config_sha256" in manifest

    def test_green_check_passes(self, tmp_path):
        code = cli.main(["green-check", "--N", "48", "--out", str(tmp_path)])
        assert code == 0
        body = (tmp_path / "green_check.csv").read_text().splitlines()
        assert body[0] == "lambda,ode_residual,round_trip_error"
        assert len(body) == 4

    def test_strichartz_zero_spread_guard(self, tmp_path):
        code = cli.main(["strichartz", "--N", "48", "--tau-max", "16.0",
                         "--out", str(tmp_path)])
        assert code == 0
        summary = json.loads(
            (tmp_path / "strichartz_summary.json").read_text())
        assert summary["ok"]
