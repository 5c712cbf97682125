"""Problem configuration: parsing, defaults, and validation.

Configs are hand-editable TOML (JSON is accepted as an alternative encoding;
a leading ``{`` selects it).  A minimal problem::

    [problem]
    r = 2
    checks = ["K", "K_tilde"]

    [germ]
    components = ["x1^2 + x2^2"]

    [sigma]
    kind = "origin"

Scalar problem keys (r, checks, w_bar, extra_perturbations) live in the
``[problem]`` table; plain top-level keys are also accepted (the natural spot
in JSON).  Sampling defaults are alpha = 0.5, 12 shells, 512 points per
shell, seed 0.
Extra realisations for the family checks go in ``extra_perturbations`` (each
one a list of p component expressions); their difference from the germ must
be empirically (r+1)-flat relative to Sigma on the configured sample, or the
config is rejected.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .conditions import DEFAULT_THRESHOLDS, Thresholds
from .errors import ConfigError, InputError, KuokitError
from .germs import PolyMap
from .regression import MIN_FIT_POINTS, power_fit
from .sampling import ArcProbe, sample_shells
from .sigma import SigmaSet

VALID_CHECKS = ("K", "K_tilde", "gram3", "dual4", "K_delta", "K_tilde_delta",
                "KZ", "certificate", "singular_containment")

DEFAULT_ALPHA = 0.5
DEFAULT_SHELLS = 12
DEFAULT_PER_SHELL = 512
DEFAULT_SEED = 0


@dataclass(frozen=True)
class ProblemConfig:
    """A fully validated analysis problem."""

    germ: PolyMap
    sigma: SigmaSet
    r: int
    checks: tuple
    alpha: float = DEFAULT_ALPHA
    n_shells: int = DEFAULT_SHELLS
    per_shell: int = DEFAULT_PER_SHELL
    seed: int = DEFAULT_SEED
    w_bar: float = 1.0
    amplitudes: tuple = (1.0,)
    extra_perturbations: tuple = ()
    arcs: tuple = ()
    thresholds: Thresholds = DEFAULT_THRESHOLDS

    def describe(self) -> dict:
        return {
            "germ": self.germ.to_strings(),
            "n": self.germ.n,
            "p": self.germ.p,
            "sigma": self.sigma.describe(),
            "r": self.r,
            "checks": list(self.checks),
            "sampling": {
                "alpha": self.alpha,
                "shells": self.n_shells,
                "per_shell": self.per_shell,
                "seed": self.seed,
            },
            "w_bar": self.w_bar,
            "amplitudes": list(self.amplitudes),
            "extra_perturbations": [g.to_strings() for g in self.extra_perturbations],
            "arcs": [{"components": [_arc_text(c) for c in probe.components],
                      "t_max": float(probe.t_grid[0]),
                      "t_min": float(probe.t_grid[-1]),
                      "grid_size": int(probe.t_grid.size)} for probe in self.arcs],
            "thresholds": self.thresholds.to_dict(),
        }


def _arc_text(component) -> str:
    if not component:
        return "0"
    pieces = []
    for power, coeff in component:
        if power == 1:
            term = "t"
        else:
            term = f"t^({power})" if power.denominator != 1 else f"t^{power}"
        pieces.append(f"{coeff!r}*{term}")
    return " + ".join(pieces)


def _parse_text(text: str) -> dict:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc


def _require(table: dict, key: str, kind, context: str):
    if key not in table:
        raise ConfigError(f"missing key {key!r} in {context}")
    value = table[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(f"key {key!r} in {context} must be {kind.__name__}")
    return value


def _build_sigma(table: dict, n: int) -> SigmaSet:
    kind = _require(table, "kind", str, "[sigma]")
    try:
        if kind == "origin":
            return SigmaSet.origin(n)
        if kind == "linear_subspace":
            basis = np.asarray(_require(table, "basis", list, "[sigma]"), dtype=float)
            if basis.ndim == 1:
                basis = basis[:, None]
            return SigmaSet.subspace_from_span(basis)
        if kind == "polynomial_zero_set":
            polys = _require(table, "defining_polys", list, "[sigma]")
            slack = float(table.get("approx_slack", 0.05))
            return SigmaSet.zero_set([str(s) for s in polys], ambient_dim=n,
                                     approx_slack=slack)
    except KuokitError as exc:
        raise ConfigError(f"[sigma] invalid: {exc}") from exc
    raise ConfigError(f"[sigma] kind must be one of origin/linear_subspace/"
                      f"polynomial_zero_set, got {kind!r}")


def _check_extra_flat(f: PolyMap, g: PolyMap, sigma: SigmaSet, r: int,
                      alpha: float, n_shells: int, per_shell: int, seed: int,
                      index: int):
    """Reject an extra realisation whose difference from f is not (r+1)-flat.

    Empirical test on the configured sample: the per-shell suprema of
    ||g - f|| must decay with fitted exponent >= r+1 (within 2 slope_tol), or
    vanish identically.
    """
    diff = g - f
    if all(c.is_zero() for c in diff.components):
        return
    probe = sample_shells(sigma, alpha, n_shells, min(per_shell, 64), seed)
    rhos, sups = [], []
    for shell in probe.shells:
        if shell.count == 0:
            continue
        rhos.append(shell.rho)
        sups.append(float(diff.norm_batch(shell.points).max()))
    positive = [(r_, s) for r_, s in zip(rhos, sups) if s > 0.0]
    if len(positive) < MIN_FIT_POINTS:
        return
    slope, _, _ = power_fit(np.array([r_ for r_, _ in positive]),
                            np.array([s for _, s in positive]))
    if slope < (r + 1) - 0.1:
        raise ConfigError(
            f"extra_perturbations[{index}]: g - f is not (r+1)-flat relative to Sigma "
            f"(per-shell sup of ||g-f|| decays with exponent {slope:.2f} < {r + 1})"
        )


def load_config(source) -> ProblemConfig:
    """Load and fully validate a problem config from a path or raw text."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).exists()):
        text = Path(source).read_text()
    else:
        text = str(source)
    data = _parse_text(text)

    problem = data.get("problem", {})
    if not isinstance(problem, dict):
        raise ConfigError("[problem] must be a table")
    for key, value in problem.items():
        data.setdefault(key, value)

    germ_table = _require(data, "germ", dict, "config")
    components = _require(germ_table, "components", list, "[germ]")
    if not components or not all(isinstance(c, str) for c in components):
        raise ConfigError("[germ] components must be a non-empty list of strings")
    n = germ_table.get("n")
    try:
        germ = PolyMap.from_strings(components, n=n)
    except KuokitError as exc:
        raise ConfigError(f"[germ] invalid: {exc}") from exc

    sigma = _build_sigma(_require(data, "sigma", dict, "config"), germ.n)

    r = _require(data, "r", int, "config")
    if r < 1:
        raise ConfigError("key 'r' must be a positive jet order (r >= 1)")

    checks = _require(data, "checks", list, "config")
    if not checks:
        raise ConfigError("key 'checks' must name at least one condition")
    for tag in checks:
        if tag not in VALID_CHECKS:
            raise ConfigError(f"unknown check {tag!r}; valid: {', '.join(VALID_CHECKS)}")

    sampling = data.get("sampling", {})
    alpha = float(sampling.get("alpha", DEFAULT_ALPHA))
    n_shells = int(sampling.get("shells", DEFAULT_SHELLS))
    per_shell = int(sampling.get("per_shell", DEFAULT_PER_SHELL))
    seed = int(sampling.get("seed", DEFAULT_SEED))
    if alpha <= 0:
        raise ConfigError("[sampling] alpha must be positive")
    if n_shells < 2:
        raise ConfigError("[sampling] shells must be >= 2")
    if per_shell < 1:
        raise ConfigError("[sampling] per_shell must be >= 1")

    w_bar = float(data.get("w_bar", 1.0))
    if w_bar <= 0:
        raise ConfigError("key 'w_bar' must be positive")

    family = data.get("family", {})
    amplitudes = tuple(float(a) for a in family.get("amplitudes", [1.0]))
    if not amplitudes or any(a <= 0 for a in amplitudes):
        raise ConfigError("[family] amplitudes must be positive")

    extras = []
    for idx, entry in enumerate(data.get("extra_perturbations", [])):
        if isinstance(entry, str):
            entry = [entry]
        try:
            g = PolyMap.from_strings([str(c) for c in entry], n=germ.n)
        except KuokitError as exc:
            raise ConfigError(f"extra_perturbations[{idx}] invalid: {exc}") from exc
        if (g.n, g.p) != (germ.n, germ.p):
            raise ConfigError(f"extra_perturbations[{idx}] must share (n, p) with the germ")
        _check_extra_flat(germ, g, sigma, r, alpha, n_shells, per_shell, seed, idx)
        extras.append(g)

    arcs = []
    for idx, entry in enumerate(data.get("arcs", [])):
        comps = _require(entry, "components", list, f"[[arcs]] entry {idx}")
        if len(comps) != germ.n:
            raise ConfigError(f"[[arcs]] entry {idx} needs {germ.n} components")
        grid = entry.get("t_grid")
        try:
            arcs.append(ArcProbe.from_strings([str(c) for c in comps],
                                              None if grid is None else grid))
        except KuokitError as exc:
            raise ConfigError(f"[[arcs]] entry {idx} invalid: {exc}") from exc

    try:
        thresholds = DEFAULT_THRESHOLDS.updated(data.get("thresholds", {}))
    except InputError as exc:
        raise ConfigError(f"[thresholds] invalid: {exc}") from exc

    return ProblemConfig(
        germ=germ, sigma=sigma, r=r, checks=tuple(checks),
        alpha=alpha, n_shells=n_shells, per_shell=per_shell, seed=seed,
        w_bar=w_bar, amplitudes=amplitudes, extra_perturbations=tuple(extras),
        arcs=tuple(arcs), thresholds=thresholds,
    )
