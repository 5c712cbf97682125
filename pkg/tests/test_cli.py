import csv
import json

import pytest

from kuokit.cli import main

POSITIVE = """
[problem]
r = 2
checks = ["K", "K_tilde"]

[germ]
components = ["x1^2 + x2^2"]

[sigma]
kind = "origin"

[sampling]
per_shell = 96
shells = 10
seed = 5
"""

NEGATIVE = POSITIVE.replace('components = ["x1^2 + x2^2"]',
                            'components = ["x1^2"]\nn = 2')


@pytest.fixture
def config_path(tmp_path):
    def write(text, name="problem.toml"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


class TestCheckCommand:
    def test_exit_zero_and_human_output(self, config_path, capsys):
        code = main(["check", "--config", config_path(POSITIVE)])
        out = capsys.readouterr().out
        assert code == 0
        assert "K_tilde: HOLDS" in out

    def test_exit_one_on_failure(self, config_path, capsys):
        code = main(["check", "--config", config_path(NEGATIVE)])
        assert code == 1
        assert "FAILS" in capsys.readouterr().out

    def test_json_report_to_file(self, config_path, tmp_path):
        out = tmp_path / "report.json"
        code = main(["check", "--config", config_path(POSITIVE),
                     "--format", "json", "--out", str(out)])
        assert code == 0
        data = json.loads(out.read_text())
        assert data["config"]["r"] == 2
        assert {v["condition"] for v in data["verdicts"]} >= {"K", "K_tilde"}

    def test_alpha_and_seed_overrides(self, config_path, tmp_path):
        out = tmp_path / "r.json"
        main(["check", "--config", config_path(POSITIVE), "--format", "json",
              "--out", str(out), "--alpha", "0.25", "--seed", "99"])
        data = json.loads(out.read_text())
        assert data["config"]["sampling"]["alpha"] == 0.25
        assert data["config"]["sampling"]["seed"] == 99

    def test_exit_three_on_bad_config(self, config_path, capsys):
        code = main(["check", "--config", config_path("not toml at [[", "bad.toml")])
        assert code == 3
        assert "error" in capsys.readouterr().err


class TestFunctionalsCommand:
    def test_values_at_point(self, capsys):
        code = main(["functionals", "--component", "x1^2 + x2^2",
                     "--component", "x1*x2", "--point", "1,2"])
        out = capsys.readouterr().out
        assert code == 0
        assert "kappa" in out and "nu" in out

    def test_json_output(self, capsys):
        code = main(["functionals", "--component", "x1^2 + x2^2", "--component",
                     "x1*x2", "--point", "1,2", "--format", "json"])
        data = json.loads(capsys.readouterr().out)
        assert code == 0
        assert data["values"][0]["minor_sum"] == pytest.approx(36.0)
        assert data["values"][0]["gram_det"] == pytest.approx(36.0)


class TestSampleCommand:
    def test_csv_shape(self, config_path, capsys):
        code = main(["sample", "--config", config_path(POSITIVE), "--format", "csv"])
        out = capsys.readouterr().out
        assert code == 0
        rows = list(csv.reader(out.strip().split("\n")))
        assert rows[0] == ["shell", "rho", "distance", "x1", "x2"]
        assert len(rows) - 1 == 10 * 96

    def test_json_reproducible(self, config_path, capsys):
        path = config_path(POSITIVE)
        main(["sample", "--config", path, "--format", "json"])
        first = capsys.readouterr().out
        main(["sample", "--config", path, "--format", "json"])
        second = capsys.readouterr().out
        assert first == second


class TestArcsCommand:
    def test_orders_output(self, config_path, capsys):
        text = NEGATIVE + '\n[[arcs]]\ncomponents = ["0", "t"]\n'
        code = main(["arcs", "--config", config_path(text)])
        out = capsys.readouterr().out
        assert code == 0
        assert "kappa_df: infinite" in out

    def test_missing_arcs_is_an_error(self, config_path, capsys):
        code = main(["arcs", "--config", config_path(POSITIVE)])
        assert code == 3
