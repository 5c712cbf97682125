"""Analysis orchestration and report emission (json / csv / human).

``run_analysis`` samples once, runs every requested check, re-runs them on an
alpha/4 sample to set the two-scale stability flag, adds the
singular-containment diagnostic whenever the relative Kuo condition holds,
and assembles everything into an ``AnalysisReport``.  Reports round-trip
losslessly through their dict/JSON form apart from the ``timing`` block.

Exit-code law: 0 when every requested check holds, 1 when any fails, 2 when
none fails but some are inconclusive (execution errors are the CLI's exit 3).
"""

from __future__ import annotations

import csv
import io
import json
import math
import platform
import time
from dataclasses import dataclass, replace

import numpy as np

from .version import __version__
from .conditions import (ConditionVerdict, check_certificate, check_dual4,
                         check_gram3, check_K, check_K_delta, check_K_tilde,
                         check_K_tilde_delta, check_KZ, check_singular_containment,
                         gram_ratio_field, kappa_field, nu_field)
from .config import ProblemConfig
from .errors import EstimationError, InputError, KuokitError
from .germs import make_perturbation_family
from .sampling import ShellSample, arc_orders, sample_shells


@dataclass(frozen=True)
class AnalysisReport:
    """Everything one analysis produced, in JSON-able form."""

    config: dict
    verdicts: tuple
    shell_table: dict
    arc_table: tuple
    environment: dict
    timing: dict

    @property
    def exit_code(self) -> int:
        requested = set(self.config.get("checks", ()))
        statuses = [v.status for v in self.verdicts if v.condition in requested]
        if any(s == "fails" for s in statuses):
            return 1
        if any(s == "inconclusive" for s in statuses):
            return 2
        return 0

    def verdict(self, condition: str) -> ConditionVerdict:
        for v in self.verdicts:
            if v.condition == condition:
                return v
        raise KeyError(condition)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "shell_table": self.shell_table,
            "arc_table": list(self.arc_table),
            "environment": self.environment,
            "timing": self.timing,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisReport":
        return cls(
            config=data["config"],
            verdicts=tuple(ConditionVerdict.from_dict(v) for v in data["verdicts"]),
            shell_table=data["shell_table"],
            arc_table=tuple(data["arc_table"]),
            environment=data["environment"],
            timing=data["timing"],
        )


def _checker_table(config: ProblemConfig, family):
    f, sigma, r = config.germ, config.sigma, config.r
    th = config.thresholds
    extra = tuple((f"g=extra[{i}]", g) for i, g in enumerate(config.extra_perturbations))
    return {
        "K": lambda s: check_K(f, sigma, r, w_bar=config.w_bar, sample=s, thresholds=th),
        "K_tilde": lambda s: check_K_tilde(f, sigma, r, sample=s, thresholds=th),
        "gram3": lambda s: check_gram3(f, sigma, r, sample=s, thresholds=th),
        "dual4": lambda s: check_dual4(f, sigma, r, sample=s, thresholds=th),
        "K_delta": lambda s: check_K_delta(f, sigma, r, family, sample=s,
                                           w_bar=config.w_bar, thresholds=th,
                                           extra_members=extra),
        "K_tilde_delta": lambda s: check_K_tilde_delta(f, sigma, r, family, sample=s,
                                                       thresholds=th, extra_members=extra),
        "KZ": lambda s: check_KZ(f, sigma, r, sample=s, thresholds=th),
        "certificate": lambda s: check_certificate(f, sigma, r, sample=s, thresholds=th),
        "singular_containment": lambda s: check_singular_containment(
            f, sigma, r, w_bar=config.w_bar, sample=s, thresholds=th),
    }


def _shell_functional_table(config: ProblemConfig, sample: ShellSample) -> dict:
    """Per-shell infima of the basic functionals, for plotting and the report."""
    f = config.germ
    kappa = kappa_field(f)
    nu = nu_field(f)
    gram = gram_ratio_field(f)
    rows = {"rho": [], "inf_kappa": [], "inf_nu": [], "inf_gram_eta": [],
            "inf_f_norm": [], "inf_lhs_K_tilde": []}
    for shell in sample.shells:
        rows["rho"].append(shell.rho)
        if shell.count == 0:
            for key in ("inf_kappa", "inf_nu", "inf_gram_eta", "inf_f_norm",
                        "inf_lhs_K_tilde"):
                rows[key].append(None)
            continue
        pts, d = shell.points, shell.distances
        kv = kappa(pts)
        nv = nu(pts)
        gv = gram(pts)
        fn = f.norm_batch(pts)
        rows["inf_kappa"].append(float(kv.min()))
        rows["inf_nu"].append(float(nv.min()))
        rows["inf_gram_eta"].append(float(gv.min()))
        rows["inf_f_norm"].append(float(fn.min()))
        rows["inf_lhs_K_tilde"].append(float((d * kv + fn).min()))
    return rows


_ARC_QUANTITIES = ("f_norm", "kappa_df", "nu_df", "lhs_K_tilde")


def _arc_rows(config: ProblemConfig) -> list:
    f, sigma = config.germ, config.sigma
    kappa = kappa_field(f)
    nu = nu_field(f)

    def lhs(pts):
        d = sigma.distance_batch(pts)
        return d * kappa(pts) + f.norm_batch(pts)

    quantity_fns = {
        "f_norm": f.norm_batch,
        "kappa_df": kappa,
        "nu_df": nu,
        "lhs_K_tilde": lhs,
    }
    rows = []
    for probe in config.arcs:
        orders = {}
        for name in _ARC_QUANTITIES:
            try:
                (value,) = arc_orders(probe, [quantity_fns[name]], sigma)
                orders[name] = "infinite" if math.isinf(value) else value
            except EstimationError as exc:
                orders[name] = f"error: {exc}"
        rows.append({"components": [_component_text(c) for c in probe.components],
                     "orders": orders})
    return rows


def _component_text(component) -> str:
    if not component:
        return "0"
    parts = []
    for power, coeff in component:
        parts.append(f"{coeff!r}*t^({power})")
    return " + ".join(parts)


def _wrap_stage(stage: str, exc: KuokitError) -> KuokitError:
    try:
        return type(exc)(f"[{stage}] {exc}")
    except TypeError:
        return KuokitError(f"[{stage}] {exc}")


def run_analysis(config: ProblemConfig) -> AnalysisReport:
    """Sample, check, diagnose, and assemble the report for one problem."""
    t_start = time.perf_counter()
    timing = {}

    needs_family = any(tag in ("K_delta", "K_tilde_delta") for tag in config.checks)
    family = None
    if needs_family:
        try:
            family = make_perturbation_family(config.germ, config.sigma, config.r,
                                              config.amplitudes)
        except KuokitError as exc:
            raise _wrap_stage("perturbation family", exc) from exc

    try:
        t0 = time.perf_counter()
        sample = sample_shells(config.sigma, config.alpha, config.n_shells,
                               config.per_shell, config.seed)
        timing["sampling_seconds"] = time.perf_counter() - t0
    except KuokitError as exc:
        raise _wrap_stage("sampling", exc) from exc

    checkers = _checker_table(config, family)
    verdicts = []
    for tag in config.checks:
        try:
            t0 = time.perf_counter()
            verdicts.append(checkers[tag](sample))
            timing[f"check_{tag}_seconds"] = time.perf_counter() - t0
        except KuokitError as exc:
            raise _wrap_stage(f"check {tag}", exc) from exc

    if "K" in config.checks and "singular_containment" not in config.checks:
        k_verdict = next(v for v in verdicts if v.condition == "K")
        if k_verdict.status == "holds":
            try:
                verdicts.append(checkers["singular_containment"](sample))
            except KuokitError as exc:
                raise _wrap_stage("check singular_containment", exc) from exc

    # two-scale stability: statuses must survive shrinking alpha by 4
    t0 = time.perf_counter()
    stability_status = {}
    try:
        quarter = sample_shells(config.sigma, config.alpha / 4.0, config.n_shells,
                                config.per_shell, config.seed)
        for tag in config.checks:
            stability_status[tag] = checkers[tag](quarter).status
        quarter_error = None
    except KuokitError as exc:
        quarter_error = str(exc)
    timing["stability_seconds"] = time.perf_counter() - t0

    stamped = []
    for v in verdicts:
        if v.condition in stability_status:
            quarter_status = stability_status[v.condition]
            stab = {
                "alpha": config.alpha,
                "alpha_quarter": config.alpha / 4.0,
                "status_at_alpha_quarter": quarter_status,
                "stable": quarter_status == v.status,
            }
        elif quarter_error is not None and v.condition in config.checks:
            stab = {"alpha": config.alpha, "alpha_quarter": config.alpha / 4.0,
                    "error": quarter_error, "stable": None}
        else:
            stab = None
        notes = v.notes
        if config.sigma.kind == "polynomial_zero_set":
            notes = notes + ("d(x, Sigma) is an upper-bound approximation (polynomial "
                             "Sigma); margins inherit its slack",)
        stamped.append(replace(v, stability=stab, notes=notes))

    t0 = time.perf_counter()
    shell_table = _shell_functional_table(config, sample)
    arc_table = _arc_rows(config)
    timing["tables_seconds"] = time.perf_counter() - t0
    timing["total_seconds"] = time.perf_counter() - t_start

    environment = {
        "kuokit_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "seed": config.seed,
    }
    return AnalysisReport(
        config=config.describe(),
        verdicts=tuple(stamped),
        shell_table=shell_table,
        arc_table=tuple(arc_table),
        environment=environment,
        timing=timing,
    )


# -- emission -------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    return f"{value:.17g}"


def emit_json(report: AnalysisReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def emit_csv(report: AnalysisReport) -> str:
    """One plot-ready table per regression: shell_radius, infimum, fitted_value."""
    radii = report.shell_table["rho"]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["regression", "shell_radius", "infimum", "fitted_value"])
    for verdict in report.verdicts:
        est = verdict.estimate
        if est is None:
            continue
        infima = {rho: inf for rho, inf in est.per_shell_infima}
        for rho in radii:
            inf = infima.get(rho)
            fitted = None
            if est.slope is not None:
                fitted = 2.0 ** (est.intercept + est.slope * math.log2(rho))
            writer.writerow([verdict.condition, _fmt(rho), _fmt(inf), _fmt(fitted)])
    return buffer.getvalue()


_STATUS_WORD = {"holds": "HOLDS", "fails": "FAILS", "inconclusive": "INCONCLUSIVE"}


def emit_human(report: AnalysisReport) -> str:
    lines = []
    cfg = report.config
    lines.append(f"kuokit {report.environment['kuokit_version']} analysis")
    lines.append(f"germ f = ({', '.join(cfg['germ'])})  n={cfg['n']} p={cfg['p']}")
    lines.append(f"Sigma: {cfg['sigma']['kind']}   r = {cfg['r']}   "
                 f"alpha = {cfg['sampling']['alpha']}  seed = {cfg['sampling']['seed']}")
    lines.append("")
    for v in report.verdicts:
        bits = [f"{v.condition}: {_STATUS_WORD[v.status]}"]
        if v.margin is not None:
            bits.append(f"margin={v.margin:.4g}")
        if v.estimate is not None and v.estimate.slope is not None:
            bits.append(f"slope={v.estimate.slope:.3f}")
            bits.append(f"r2={v.estimate.r2:.3f}")
        if v.delta_hat is not None:
            bits.append(f"delta_hat={v.delta_hat:.3f}")
        if v.stability is not None:
            if v.stability.get("stable") is None:
                bits.append("stability=error")
            else:
                bits.append(f"stable(alpha/4)={'yes' if v.stability['stable'] else 'NO'}")
        lines.append("  " + "  ".join(bits))
        for note in v.notes:
            lines.append(f"      note: {note}")
        for w in v.witnesses[:3]:
            point = ", ".join(f"{c:.6g}" for c in w["point"])
            tagbit = " (refined)" if w.get("refined") else ""
            lines.append(f"      witness{tagbit}: x=({point})  d={w['d']:.3g}  "
                         f"ratio={w['ratio']:.3g}")
    if report.arc_table:
        lines.append("")
        lines.append("arc probes (fitted order against d):")
        for row in report.arc_table:
            lines.append(f"  gamma(t) = ({', '.join(row['components'])})")
            for name, order in row["orders"].items():
                lines.append(f"      {name}: {order}")
    lines.append("")
    lines.append(f"exit code {report.exit_code}")
    return "\n".join(lines) + "\n"


def emit_report(report: AnalysisReport, fmt: str = "human") -> str:
    """Serialize a report as json (full fidelity), csv (plot tables) or human text."""
    if fmt == "json":
        return emit_json(report)
    if fmt == "csv":
        return emit_csv(report)
    if fmt == "human":
        return emit_human(report)
    raise InputError(f"unknown report format {fmt!r}; use json, csv or human")
