import json

import numpy as np
import pytest

from kuokit import AnalysisReport, ConfigError, emit_report, load_config, run_analysis

MINIMAL = """
[problem]
r = 2
checks = ["K_tilde"]

[germ]
components = ["x1^2 + x2^2"]

[sigma]
kind = "origin"
"""

TRIO_POSITIVE = """
[problem]
r = 2
checks = ["K", "K_tilde", "gram3", "dual4"]

[germ]
components = ["x1^2 + x2^2"]

[sigma]
kind = "origin"

[sampling]
alpha = 0.5
shells = 10
per_shell = 128
seed = 3
"""


def small(text, per_shell=96, shells=10):
    cfg = load_config(text)
    from dataclasses import replace
    return replace(cfg, per_shell=per_shell, n_shells=shells)


class TestLoadConfig:
    def test_minimal_defaults(self):
        cfg = load_config(MINIMAL)
        assert cfg.alpha == 0.5
        assert cfg.n_shells == 12
        assert cfg.per_shell == 512
        assert cfg.seed == 0
        assert cfg.checks == ("K_tilde",)
        assert cfg.germ.to_strings() == ["x1^2 + x2^2"]

    def test_json_encoding_accepted(self):
        cfg = load_config(json.dumps({
            "r": 1,
            "checks": ["KZ"],
            "germ": {"components": ["x1"]},
            "sigma": {"kind": "origin"},
            "sampling": {"per_shell": 32},
        }))
        assert cfg.checks == ("KZ",)
        assert cfg.per_shell == 32

    def test_rejects_p_greater_than_n(self):
        bad = MINIMAL.replace('["x1^2 + x2^2"]', '["x1", "x1^2"]')
        with pytest.raises(ConfigError, match="n >= p required"):
            load_config(bad)

    def test_rejects_unknown_check(self):
        with pytest.raises(ConfigError, match="unknown check"):
            load_config(MINIMAL.replace("K_tilde", "K_banana"))

    def test_rejects_missing_r(self):
        with pytest.raises(ConfigError, match="'r'"):
            load_config(MINIMAL.replace("r = 2\n", ""))

    def test_rejects_non_flat_extra_perturbation(self):
        text = MINIMAL + '\n[problem2]\n'
        text = MINIMAL.replace(
            'checks = ["K_tilde"]',
            'checks = ["K_tilde"]\nextra_perturbations = [["x1^2 + x2^2 + x1^2"]]',
        )
        with pytest.raises(ConfigError, match="flat"):
            load_config(text)

    def test_accepts_flat_extra_perturbation(self):
        text = MINIMAL.replace(
            'checks = ["K_tilde"]',
            'checks = ["K_tilde"]\nextra_perturbations = [["x1^2 + x2^2 + 0.5*x1^3"]]',
        )
        cfg = load_config(text)
        assert len(cfg.extra_perturbations) == 1

    def test_threshold_overrides(self):
        text = MINIMAL + "\n[thresholds]\nslope_tol = 0.1\n"
        assert load_config(text).thresholds.slope_tol == 0.1
        with pytest.raises(ConfigError):
            load_config(MINIMAL + "\n[thresholds]\nnot_a_knob = 1\n")

    def test_arc_entries(self):
        text = MINIMAL + '\n[[arcs]]\ncomponents = ["t^2", "t"]\n'
        cfg = load_config(text)
        assert len(cfg.arcs) == 1
        assert cfg.arcs[0].ambient_dim == 2


class TestRunAnalysis:
    def test_positive_trio_exit_zero(self):
        report = run_analysis(small(TRIO_POSITIVE))
        assert report.exit_code == 0
        assert {v.condition for v in report.verdicts} >= {"K", "K_tilde", "gram3", "dual4"}
        # the containment diagnostic rides along when K holds
        assert any(v.condition == "singular_containment" for v in report.verdicts)

    def test_negative_germ_exit_one_with_axis_witness(self):
        text = TRIO_POSITIVE.replace('["x1^2 + x2^2"]', '["x1^2"]') \
                            .replace('components = ["x1^2"]',
                                     'components = ["x1^2"]\nn = 2')
        report = run_analysis(small(text))
        assert report.exit_code == 1
        w = np.asarray(report.verdict("K_tilde").witnesses[0]["point"])
        assert abs(w[0]) <= 1e-3 * np.linalg.norm(w)

    def test_inconclusive_exit_two(self):
        text = """
[problem]
r = 2
checks = ["certificate"]

[germ]
components = ["x1^3"]

[sigma]
kind = "origin"

[sampling]
per_shell = 96
shells = 10
"""
        report = run_analysis(load_config(text))
        assert report.verdict("certificate").status == "inconclusive"
        assert report.exit_code == 2

    def test_relative_example_exit_zero(self):
        text = """
[problem]
r = 3
checks = ["K"]

[germ]
components = ["x1^3"]
n = 2

[sigma]
kind = "linear_subspace"
basis = [[0.0], [1.0]]

[sampling]
per_shell = 96
shells = 10
"""
        report = run_analysis(load_config(text))
        assert report.verdict("K").status == "holds"
        assert report.exit_code == 0

    def test_stability_flags_attached(self):
        report = run_analysis(small(TRIO_POSITIVE))
        for tag in ("K", "K_tilde"):
            stab = report.verdict(tag).stability
            assert stab["stable"] is True
            assert stab["alpha_quarter"] == pytest.approx(stab["alpha"] / 4)

    def test_arc_table(self):
        text = MINIMAL.replace('["x1^2 + x2^2"]', '["x1^2"]') \
                      .replace('components = ["x1^2"]', 'components = ["x1^2"]\nn = 2')
        text += '\n[[arcs]]\ncomponents = ["0", "t"]\n'
        report = run_analysis(small(text, per_shell=48, shells=8))
        (row,) = report.arc_table
        assert row["orders"]["kappa_df"] == "infinite"  # gradient dies on the axis
        assert row["orders"]["f_norm"] == "infinite"    # f vanishes there too


@pytest.fixture(scope="module")
def report():
    return run_analysis(small(TRIO_POSITIVE))


class TestEmission:

    def test_json_round_trip(self, report):
        text = emit_report(report, "json")
        back = AnalysisReport.from_dict(json.loads(text))
        assert back == report

    def test_csv_row_count_law(self, report):
        lines = emit_report(report, "csv").strip().split("\n")
        regressions = sum(1 for v in report.verdicts if v.estimate is not None)
        shells = len(report.shell_table["rho"])
        assert len(lines) - 1 == shells * regressions
        assert lines[0] == "regression,shell_radius,infimum,fitted_value"

    def test_csv_full_precision(self, report):
        body = emit_report(report, "csv")
        cell = body.strip().split("\n")[1].split(",")[1]
        assert float(cell) == report.shell_table["rho"][0]

    def test_human_one_status_token_per_check(self, report):
        text = emit_report(report, "human")
        for tag in ("K", "K_tilde", "gram3", "dual4"):
            lines = [l for l in text.split("\n") if l.strip().startswith(f"{tag}:")]
            assert len(lines) == 1
            tokens = sum(lines[0].count(w) for w in ("HOLDS", "FAILS", "INCONCLUSIVE"))
            assert tokens == 1

    def test_determinism_excluding_timing(self):
        cfg = small(TRIO_POSITIVE)
        a = run_analysis(cfg).to_dict()
        b = run_analysis(cfg).to_dict()
        a.pop("timing")
        b.pop("timing")
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_unknown_format_rejected(self, report):
        from kuokit import InputError
        with pytest.raises(InputError):
            emit_report(report, "yaml")
