"""Empirical checkers for the Kuo-type inequality conditions.

Every condition has the shape "LHS(x) is bounded below by a power of
d(x, Sigma), up to a constant, on a domain shrinking to 0".  At desk scale a
checker can only grade the evidence, so each verdict is one of

* ``holds``        -- per-shell infima of the ratio stay above the margin
  floor, the fitted exponent of the LHS does not exceed the target, the fit
  is clean, and a deterministic falsification search finds no collapse;
* ``fails``        -- an exact zero of the LHS off Sigma, a per-shell ratio
  decaying with a clean positive slope, or a falsification search that drives
  the ratio orders of magnitude below the shell-typical value;
* ``inconclusive`` -- anything in between (poor fits, empty domains,
  boundary-tied exponents).

The falsification search matters: a failure locus that is a cone (the same
directions at every scale) leaves per-shell infima *scale-free*, so no
regression slope can expose it; minimizing the pointwise ratio from the worst
sampled points does.  The search runs for origin/subspace Sigma, where the
distance is exact and cheap, and is confined to the deepest shells: germ
conditions quantify over arbitrarily small neighbourhoods, so a rank drop or
zero at a fixed outer scale is not a counterexample (it merely blocks a
confident holds).

Statuses are empirical at finite scale; each verdict records the sample
configuration, and the report layer adds an alpha-vs-alpha/4 stability flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .errors import CapabilityError, EstimationError, InputError
from .functionals import gram_ratio_batch, kappa_batch, nu_batch, spectral_norm_batch
from .germs import PerturbationFamily, PolyMap
from .regression import MIN_FIT_POINTS, power_fit
from .sampling import ShellSample, horn_filter
from .sigma import SigmaSet
from .utils import ordered_map


@dataclass(frozen=True)
class Thresholds:
    """Verdict thresholds; the defaults are the pinned engine constants."""

    slope_tol: float = 0.05
    delta_floor: float = 0.05
    margin_floor: float = 1e-8
    rank_tol: float = 1e-8
    containment_tol: float = 1e-6
    min_r2: float = 0.95
    #: falsification search: refined ratio below this multiple of the
    #: shell-median ratio is a definitive collapse (fails) ...
    refine_fail_ratio: float = 1e-4
    #: ... and below this multiple it is suspicious (blocks holds)
    refine_suspect_ratio: float = 1e-2

    def updated(self, overrides: dict) -> "Thresholds":
        known = {f: getattr(self, f) for f in self.__dataclass_fields__}
        for key, value in overrides.items():
            if key not in known:
                raise InputError(f"unknown threshold {key!r}")
            known[key] = float(value)
        return Thresholds(**known)

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


DEFAULT_THRESHOLDS = Thresholds()

#: width used for horn filtering when the caller does not override it
DEFAULT_WIDTH = 1.0


@dataclass(frozen=True)
class ExponentEstimate:
    """A fitted power law for per-shell infima of a quantity.

    ``slope`` is None when fewer than 4 shells had a positive infimum;
    ``excluded_zero_shells`` counts the shells dropped for a zero infimum.
    """

    slope: float | None
    intercept: float | None
    r2: float | None
    per_shell_infima: tuple
    excluded_zero_shells: int = 0

    def usable(self) -> bool:
        return self.slope is not None

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "per_shell_infima": [[rho, inf] for rho, inf in self.per_shell_infima],
            "excluded_zero_shells": self.excluded_zero_shells,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExponentEstimate":
        return cls(
            slope=data["slope"],
            intercept=data["intercept"],
            r2=data["r2"],
            per_shell_infima=tuple((float(r), float(v)) for r, v in data["per_shell_infima"]),
            excluded_zero_shells=int(data["excluded_zero_shells"]),
        )


@dataclass(frozen=True)
class ConditionVerdict:
    """Outcome of one condition check with its evidence."""

    condition: str
    status: str
    estimate: ExponentEstimate | None = None
    margin: float | None = None
    delta_hat: float | None = None
    witnesses: tuple = ()
    notes: tuple = ()
    sample_info: dict | None = None
    stability: dict | None = None

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "status": self.status,
            "estimate": self.estimate.to_dict() if self.estimate else None,
            "margin": self.margin,
            "delta_hat": self.delta_hat,
            "witnesses": [dict(w) for w in self.witnesses],
            "notes": list(self.notes),
            "sample_info": self.sample_info,
            "stability": self.stability,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConditionVerdict":
        est = data.get("estimate")
        return cls(
            condition=data["condition"],
            status=data["status"],
            estimate=ExponentEstimate.from_dict(est) if est else None,
            margin=data["margin"],
            delta_hat=data["delta_hat"],
            witnesses=tuple(dict(w) for w in data["witnesses"]),
            notes=tuple(data["notes"]),
            sample_info=data.get("sample_info"),
            stability=data.get("stability"),
        )


# -- scalar fields over sample points ------------------------------------------


def kappa_field(f: PolyMap):
    """x -> kappa(df(x)), vectorized over point arrays."""
    return lambda pts: kappa_batch(f.jacobian_batch(pts))


def nu_field(f: PolyMap):
    """x -> nu(df(x)) (smallest singular value), vectorized."""
    return lambda pts: nu_batch(f.jacobian_batch(pts))


def gram_ratio_field(f: PolyMap):
    """x -> sqrt(Gamma(grads) / sum_j Gamma(grads without j)), vectorized."""
    return lambda pts: gram_ratio_batch(f.jacobian_batch(pts))


def additive_lhs(func_field, g: PolyMap):
    """(points, d) -> d * field(points) + ||g(points)||."""
    return lambda pts, d: d * func_field(pts) + g.norm_batch(pts)


def field_lhs(func_field):
    """(points, d) -> field(points); for conditions without the norm term."""
    return lambda pts, d: func_field(pts)


# -- exponent estimation ---------------------------------------------------------


def _shell_blocks(sample: ShellSample):
    return [(s.rho, s.points, s.distances) for s in sample.shells if s.count]


def _fit_infima(pairs) -> ExponentEstimate:
    pairs = tuple((float(r), float(v)) for r, v in pairs)
    positive = [(r, v) for r, v in pairs if v > 0.0]
    zero_count = len(pairs) - len(positive)
    if len(positive) < MIN_FIT_POINTS:
        return ExponentEstimate(None, None, None, pairs, zero_count)
    rho = np.array([r for r, _ in positive])
    inf = np.array([v for _, v in positive])
    slope, intercept, r2 = power_fit(rho, inf)
    return ExponentEstimate(slope, intercept, r2, pairs, zero_count)


def estimate_exponent(sample: ShellSample, quantity) -> ExponentEstimate:
    """Fit the per-shell infimum of a scalar field against the shell scale.

    ``quantity`` maps an (N, n) point array to N non-negative values.  Shells
    with a zero infimum are excluded from the fit and counted.  Fewer than 4
    usable shells raises EstimationError.
    """
    pairs = []
    for rho, pts, _d in _shell_blocks(sample):
        values = np.asarray(quantity(pts), dtype=float)
        if np.any(values < 0):
            raise InputError("exponent estimation expects a non-negative field")
        pairs.append((rho, float(values.min())))
    est = _fit_infima(pairs)
    if not est.usable():
        raise EstimationError(
            f"exponent fit needs {MIN_FIT_POINTS} shells with positive infima; "
            f"got {len(pairs) - est.excluded_zero_shells} of {len(pairs)}"
        )
    return est


# -- shared evidence gathering ----------------------------------------------------


@dataclass
class _Evidence:
    """Per-shell arrays of the LHS and its ratio to d^target on a domain."""

    sample: ShellSample
    target: float
    shells: list = field(default_factory=list)   # (rho, pts, d, lhs, ratio)

    @classmethod
    def collect(cls, sample: ShellSample, lhs_fn, target: float) -> "_Evidence":
        ev = cls(sample, target)
        blocks = _shell_blocks(sample)

        def evaluate(block):
            rho, pts, d = block
            lhs = np.asarray(lhs_fn(pts, d), dtype=float)
            return rho, pts, d, lhs, lhs / d ** target

        ev.shells = ordered_map(evaluate, blocks)
        return ev

    def n_shells(self) -> int:
        return len(self.shells)

    def lhs_pairs(self):
        return [(rho, float(lhs.min())) for rho, _p, _d, lhs, _r in self.shells]

    def ratio_pairs(self):
        return [(rho, float(ratio.min())) for rho, _p, _d, _l, ratio in self.shells]

    def min_ratio(self) -> float | None:
        if not self.shells:
            return None
        return min(float(r.min()) for *_ignored, r in self.shells)

    def shell_medians(self) -> dict:
        return {rho: float(np.median(ratio)) for rho, _p, _d, _l, ratio in self.shells}

    def zero_points(self, rho_max: float = math.inf, cap: int = 10):
        """Points with an exactly vanishing LHS, restricted to shells rho <= rho_max."""
        out = []
        for rho, pts, d, lhs, _ratio in self.shells:
            if rho > rho_max:
                continue
            for idx in np.nonzero(lhs == 0.0)[0]:
                out.append(_witness(pts[idx], float(d[idx]), 0.0, 0.0))
                if len(out) >= cap:
                    return out
        return out

    def worst_points(self, cap: int = 10):
        rows = []
        for _rho, pts, d, lhs, ratio in self.shells:
            for idx in range(pts.shape[0]):
                rows.append((float(ratio[idx]), pts[idx], float(d[idx]), float(lhs[idx])))
        rows.sort(key=lambda item: item[0])
        return [_witness(p, d, r, l) for r, p, d, l in rows[:cap]]


def _witness(point, d: float, ratio: float, lhs: float, refined: bool = False) -> dict:
    return {
        "point": [float(v) for v in np.asarray(point).ravel()],
        "d": d,
        "ratio": ratio,
        "lhs": lhs,
        "refined": refined,
    }


# -- falsification search -----------------------------------------------------------


def deep_shell_cut(alpha: float, n_shells: int) -> float:
    """Outer radius of the deepest shells, where germ-scale evidence counts.

    The falsification search and the exact-zero rule are confined to the
    deepest max(4, K/3) shells so that behaviour at a fixed outer scale
    (which a shrinking neighbourhood would discard) cannot fail a germ
    condition.
    """
    deep = min(n_shells, max(4, n_shells // 3))
    return alpha * 2.0 ** (-(n_shells - deep))


#: skip the falsification search when every deep shell's sampled infimum sits
#: above this fraction of the shell's median ratio (no suspicious lower tail;
#: a local search started from such points cannot reach a collapse anyway)
REFINE_TAIL_GATE = 0.2


def _refine_ratio_minimum(evidence: _Evidence, lhs_fn, sigma: SigmaSet, alpha: float,
                          n_shells: int, horn=None, n_starts: int = 6,
                          maxiter: int = 240):
    """Deterministic local minimization of the pointwise ratio LHS/d^target.

    Starts from the worst sampled points of the deepest shells and descends
    with Nelder-Mead on the log-ratio, penalized to stay inside the deep
    annulus, the alpha-ball and (when given) the horn
    ``||g|| <= width * d^degree``.  Returns the best feasible refined value
    normalized by the median ratio of its shell, or None when refinement is
    unavailable (polynomial Sigma), the deep shells are empty, or no deep
    shell shows a suspicious lower tail.
    """
    if sigma.kind == "polynomial_zero_set":
        return None
    if not evidence.shells:
        return None
    target = evidence.target
    d_lo = alpha * 2.0 ** (-n_shells)
    d_hi = deep_shell_cut(alpha, n_shells)
    medians = evidence.shell_medians()
    if all(m <= 0.0 for m in medians.values()):
        return None

    rows = []
    tail_suspicious = False
    for rho, pts, d, _lhs, ratio in evidence.shells:
        if rho > d_hi:
            continue
        med = medians[rho]
        if med <= 0.0 or float(ratio.min()) < REFINE_TAIL_GATE * med:
            tail_suspicious = True
        for idx in range(pts.shape[0]):
            rows.append((float(ratio[idx]), pts[idx], float(d[idx])))
    if not rows or not tail_suspicious:
        return None
    rows.sort(key=lambda item: item[0])
    starts = rows[:n_starts]

    def objective(x):
        x = np.asarray(x, dtype=float)
        d = sigma.distance_batch(x[None])[0]
        if d <= 0.0:
            return 1e6
        lhs = float(lhs_fn(x[None], np.array([d]))[0])
        value = math.log2(max(lhs, 1e-300)) - target * math.log2(d)
        penalty = 0.0
        if d < d_lo:
            penalty += 50.0 * math.log2(d_lo / d)
        if d > d_hi:
            penalty += 50.0 * math.log2(d / d_hi)
        norm_x = float(np.linalg.norm(x))
        if norm_x > alpha:
            penalty += 50.0 * math.log2(norm_x / alpha)
        if horn is not None:
            g, degree, width = horn
            g_norm = float(g.norm_batch(x[None])[0])
            bound = width * d ** degree
            if g_norm > bound:
                penalty += 50.0 * math.log2(max(g_norm, 1e-300) / max(bound, 1e-300))
        return value + penalty

    def nearest_median(d: float) -> float:
        best_rho = min(medians, key=lambda rho: abs(math.log2(rho) - math.log2(d)))
        return medians[best_rho]

    best = None
    for _ratio0, x0, _d0 in starts:
        # log2-ratio objective: 1e-3 resolves 0.07% while collapse spans
        # orders of magnitude, so a loose fatol stops flat basins early
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"maxiter": maxiter, "fatol": 1e-3, "xatol": 1e-12})
        x = np.asarray(res.x, dtype=float)
        d = float(sigma.distance_batch(x[None])[0])
        if not (d_lo * (1 - 1e-9) <= d <= d_hi * (1 + 1e-9)):
            continue
        if float(np.linalg.norm(x)) > alpha * (1 + 1e-9):
            continue
        if horn is not None:
            g, degree, width = horn
            if float(g.norm_batch(x[None])[0]) > width * d ** degree * (1 + 1e-6) + 1e-300:
                continue
        lhs = float(lhs_fn(x[None], np.array([d]))[0])
        ratio = lhs / d ** target
        med = nearest_median(d)
        collapse = ratio / med if med > 0.0 else 0.0
        if best is None or collapse < best["collapse"]:
            best = {"ratio": ratio, "collapse": collapse, "point": x, "d": d, "lhs": lhs}
        if best["collapse"] <= 1e-8:
            break   # collapse already beyond doubt; remaining starts add nothing
    return best


# -- generic verdict assembly --------------------------------------------------------


def _domain(sample: ShellSample, horn, alpha_cut):
    """Apply the ball cut and horn filter that define a condition's domain."""
    domain = sample
    if alpha_cut is not None and alpha_cut < sample.alpha:
        domain = domain.restricted_to_ball(alpha_cut)
    if horn is not None:
        g, degree, width = horn
        domain = horn_filter(domain, g, degree, width)
    return domain


def _bound_verdict(tag: str, sample: ShellSample, sigma: SigmaSet, lhs_fn, target: float,
                   thresholds: Thresholds, *, horn=None, alpha_cut=None,
                   hold_slope_max=None, fail_slope_min=None,
                   margin_lhs=None, margin_target=None,
                   refine=True, extra_notes=()) -> ConditionVerdict:
    """Grade ``LHS >= C * d^target`` on a horn/ball domain of the sample.

    ``hold_slope_max`` defaults to target + slope_tol (the LHS must not decay
    faster than its target power); ``fail_slope_min`` is the ratio-infima
    slope above which decay to 0 is declared (default slope_tol).
    """
    th = thresholds
    hold_slope_max = target + th.slope_tol if hold_slope_max is None else hold_slope_max
    fail_slope_min = th.slope_tol if fail_slope_min is None else fail_slope_min
    notes = list(extra_notes)

    domain = _domain(sample, horn, alpha_cut)
    evidence = _Evidence.collect(domain, lhs_fn, target)
    info = sample.describe()

    if evidence.n_shells() == 0:
        notes.append("domain is empty at every shell; no evidence either way")
        return ConditionVerdict(tag, "inconclusive", None, None, None, (),
                                tuple(notes), info)

    est_lhs = _fit_infima(evidence.lhs_pairs())
    est_ratio = _fit_infima(evidence.ratio_pairs())
    margin = evidence.min_ratio()
    if margin_lhs is not None:
        margin_ev = _Evidence.collect(domain, margin_lhs, margin_target)
        margin = margin_ev.min_ratio()

    deep_cut = deep_shell_cut(sample.alpha, sample.n_shells)
    deep_zeros = evidence.zero_points(rho_max=deep_cut)
    if deep_zeros:
        notes.append("LHS vanishes exactly at sampled points off Sigma in the "
                     "deepest shells")
        return ConditionVerdict(tag, "fails", est_lhs, margin, None,
                                tuple(deep_zeros), tuple(notes), info)
    shallow_zeros = evidence.zero_points()

    refined = None
    if refine:
        refined = _refine_ratio_minimum(evidence, lhs_fn, sigma, sample.alpha,
                                        sample.n_shells, horn=horn)
    witnesses = evidence.worst_points()
    if refined is not None:
        witnesses = [_witness(refined["point"], refined["d"], refined["ratio"],
                              refined["lhs"], refined=True)] + witnesses[:9]

    if refined is not None and refined["collapse"] <= th.refine_fail_ratio:
        notes.append(
            f"falsification search drove the ratio to {refined['collapse']:.2e} of the "
            f"shell-typical value; the infimum collapses to 0"
        )
        return ConditionVerdict(tag, "fails", est_lhs, margin, None,
                                tuple(witnesses), tuple(notes), info)

    if (est_ratio.usable() and est_ratio.slope >= fail_slope_min
            and est_ratio.r2 >= th.min_r2):
        notes.append(
            f"per-shell infima of the ratio decay with slope {est_ratio.slope:.3f} "
            f"(r2={est_ratio.r2:.3f}); the ratio tends to 0 with d"
        )
        return ConditionVerdict(tag, "fails", est_lhs, margin, None,
                                tuple(witnesses), tuple(notes), info)

    suspect = refined is not None and refined["collapse"] <= th.refine_suspect_ratio
    if suspect:
        notes.append(
            f"falsification search reached {refined['collapse']:.2e} of the "
            f"shell-typical ratio; too low to trust a positive margin"
        )
    if shallow_zeros:
        suspect = True
        notes.append("LHS vanishes exactly at sampled points in the outer shells; "
                     "a shrinking neighbourhood may or may not exclude them")
    if evidence.n_shells() < MIN_FIT_POINTS:
        notes.append(f"only {evidence.n_shells()} non-empty shells; no exponent fit")
    elif not est_lhs.usable():
        notes.append("fewer than 4 shells with positive infima")

    if (not suspect and est_lhs.usable() and margin is not None
            and margin >= th.margin_floor
            and est_lhs.slope <= hold_slope_max
            and est_lhs.r2 >= th.min_r2):
        return ConditionVerdict(tag, "holds", est_lhs, margin, None,
                                tuple(witnesses), tuple(notes), info)

    if est_lhs.usable() and est_lhs.r2 < th.min_r2:
        notes.append(f"fit quality r2={est_lhs.r2:.3f} below {th.min_r2}")
    if est_lhs.usable() and est_lhs.slope > hold_slope_max:
        notes.append(
            f"LHS infima decay with slope {est_lhs.slope:.3f} > allowed {hold_slope_max:.3f}"
        )
    return ConditionVerdict(tag, "inconclusive", est_lhs, margin, None,
                            tuple(witnesses), tuple(notes), info)


# -- the four checkers equivalent to the relative Kuo condition ----------------------


def check_K(f: PolyMap, sigma: SigmaSet, r: int, w_bar: float = DEFAULT_WIDTH,
            alpha: float | None = None, sample: ShellSample = None,
            thresholds: Thresholds = DEFAULT_THRESHOLDS) -> ConditionVerdict:
    """Relative Kuo condition: kappa(df) >= C d^{r-1} inside the horn of f.

    The reported margin is the infimum of the additive form
    ``(d kappa(df) + ||f||) / d^r`` on the same domain, the constant shared
    by the whole equivalence class of this condition.
    """
    _validate_check_args(f, sigma, r, sample)
    kappa = kappa_field(f)
    return _bound_verdict(
        "K", sample, sigma, field_lhs(kappa), r - 1, thresholds,
        horn=(f, r, w_bar), alpha_cut=alpha,
        margin_lhs=additive_lhs(kappa, f), margin_target=r,
    )


def check_K_tilde(f: PolyMap, sigma: SigmaSet, r: int, sample: ShellSample = None,
                  thresholds: Thresholds = DEFAULT_THRESHOLDS) -> ConditionVerdict:
    """Additive form: d kappa(df) + ||f|| >= C d^r on a full neighbourhood."""
    _validate_check_args(f, sigma, r, sample)
    return _bound_verdict(
        "K_tilde", sample, sigma, additive_lhs(kappa_field(f), f), r, thresholds,
    )


def check_gram3(f: PolyMap, sigma: SigmaSet, r: int, sample: ShellSample = None,
                thresholds: Thresholds = DEFAULT_THRESHOLDS) -> ConditionVerdict:
    """Gram-determinant form: the minor ratio replaces kappa in the additive LHS."""
    _validate_check_args(f, sigma, r, sample)
    return _bound_verdict(
        "gram3", sample, sigma, additive_lhs(gram_ratio_field(f), f), r, thresholds,
    )


def check_dual4(f: PolyMap, sigma: SigmaSet, r: int, sample: ShellSample = None,
                thresholds: Thresholds = DEFAULT_THRESHOLDS) -> ConditionVerdict:
    """Dual-map form: the uniform-in-y infimum of ||df* y|| is nu(df)."""
    _validate_check_args(f, sigma, r, sample)
    return _bound_verdict(
        "dual4", sample, sigma, additive_lhs(nu_field(f), f), r, thresholds,
    )


def _validate_check_args(f: PolyMap, sigma: SigmaSet, r: int, sample):
    if r < 1:
        raise InputError("jet order r must be >= 1")
    if sample is None:
        raise InputError("a ShellSample is required; use sample_shells first")
    if f.n != sigma.ambient_dim or f.n != sample.ambient_dim:
        raise InputError("germ, Sigma and sample dimensions must agree")


# -- second relative Kuo condition (family checks) ------------------------------------


def _member_slope_verdict(sample, sigma, lhs_fn, ratio_target,
                          hold_max, fail_min, thresholds, horn):
    """Slope-based member grading shared by the delta-family checks."""
    th = thresholds
    domain = _domain(sample, horn, None)
    evidence = _Evidence.collect(domain, lhs_fn, ratio_target)

    if evidence.n_shells() == 0:
        return "empty", None, (), None
    est = _fit_infima(evidence.lhs_pairs())
    deep_cut = deep_shell_cut(sample.alpha, sample.n_shells)
    deep_zeros = evidence.zero_points(rho_max=deep_cut)
    refined = _refine_ratio_minimum(evidence, lhs_fn, sigma, sample.alpha,
                                    sample.n_shells, horn=horn, n_starts=4,
                                    maxiter=200)
    witnesses = evidence.worst_points()
    if refined is not None:
        witnesses = [_witness(refined["point"], refined["d"], refined["ratio"],
                              refined["lhs"], refined=True)] + witnesses[:9]
    if deep_zeros:
        return "fails", est, tuple(deep_zeros), None
    if refined is not None and refined["collapse"] <= th.refine_fail_ratio:
        return "fails", est, tuple(witnesses), None
    if not est.usable():
        return "thin", est, tuple(witnesses), None
    if est.r2 < th.min_r2:
        return "poor_fit", est, tuple(witnesses), None
    if est.slope >= fail_min:
        return "fails", est, tuple(witnesses), est.slope
    suspect = refined is not None and refined["collapse"] <= th.refine_suspect_ratio
    if est.slope <= hold_max and not suspect:
        return "holds", est, tuple(witnesses), est.slope
    return "boundary", est, tuple(witnesses), est.slope


def _horn_certifiably_empty(sample, g, degree, width, thresholds) -> bool:
    """True when per-shell infima of ||g||/d^degree exceed the width and grow as d -> 0.

    That certifies (at sample scale) that the horn of g is empty near 0, so a
    condition quantified over it holds vacuously.
    """
    pairs = []
    for rho, pts, d in _shell_blocks(sample):
        ratio = g.norm_batch(pts) / d ** degree
        pairs.append((rho, float(ratio.min())))
    if not pairs:
        return False
    if min(v for _r, v in pairs) < width:
        return False
    est = _fit_infima(pairs)
    return est.usable() and est.slope <= -thresholds.slope_tol and est.r2 >= thresholds.min_r2


def check_K_delta(f: PolyMap, sigma: SigmaSet, r: int, family: PerturbationFamily,
                  sample: ShellSample = None, w_bar: float = DEFAULT_WIDTH,
                  thresholds: Thresholds = DEFAULT_THRESHOLDS,
                  extra_members=()) -> ConditionVerdict:
    """Second relative Kuo condition over a finite perturbation family.

    For every realisation g in the family, kappa(df) must decay strictly
    slower than d^r inside the degree-(r+1) horn of g.  The verdict is
    family-relative: it never proves the for-all-g claim, and the notes say
    so.  A member whose horn is certifiably empty near 0 holds vacuously.
    """
    _validate_check_args(f, sigma, r, sample)
    if family is None:
        raise CapabilityError("no perturbation family available for this Sigma kind; "
                              "use check_certificate instead")
    th = thresholds
    kappa = field_lhs(kappa_field(f))
    statuses = {}
    worst = None   # (slope, est, witnesses, label)
    fail_payload = None
    member_notes = []
    members = list(family.members()) + [(label, g) for label, g in extra_members]
    for label, g in members:
        kind, est, witnesses, slope = _member_slope_verdict(
            sample, sigma, kappa, r,
            hold_max=r - th.delta_floor, fail_min=r - th.slope_tol,
            thresholds=th, horn=(g, r + 1, w_bar),
        )
        if kind == "empty":
            if _horn_certifiably_empty(sample, g, r + 1, w_bar, th):
                statuses[label] = "vacuous"
                continue
            statuses[label] = "undersampled"
            member_notes.append(f"{label}: horn has no sampled points and is not "
                                f"certifiably empty")
            continue
        statuses[label] = kind
        if kind == "fails" and fail_payload is None:
            fail_payload = (est, witnesses, label)
        if slope is not None and (worst is None or slope > worst[0]):
            worst = (slope, est, witnesses, label)

    notes = [
        "family-relative verdict: the for-all-g quantifier is approximated by "
        f"{len(members)} polynomial realisations of the relative {r}-jet",
    ] + member_notes
    info = sample.describe()
    if fail_payload is not None:
        est, witnesses, label = fail_payload
        notes.append(f"member {label} violates the condition")
        return ConditionVerdict("K_delta", "fails", est, None, None, witnesses,
                                tuple(notes), info)
    delta_hat = r - worst[0] if worst else None
    if all(s in ("holds", "vacuous") for s in statuses.values()) and worst is not None:
        est = worst[1]
        return ConditionVerdict("K_delta", "holds", est, None, delta_hat,
                                worst[2], tuple(notes), info)
    if all(s == "vacuous" for s in statuses.values()):
        notes.append("every member horn is certifiably empty near 0; the condition "
                     "holds vacuously at sample scale")
        return ConditionVerdict("K_delta", "holds", None, None, None, (),
                                tuple(notes), info)
    undecided = [f"{label}: {s}" for label, s in statuses.items()
                 if s not in ("holds", "vacuous")]
    notes.append("undecided members: " + "; ".join(undecided))
    est = worst[1] if worst else None
    return ConditionVerdict("K_delta", "inconclusive", est, None, delta_hat, (),
                            tuple(notes), info)


def check_K_tilde_delta(f: PolyMap, sigma: SigmaSet, r: int, family: PerturbationFamily,
                        sample: ShellSample = None,
                        thresholds: Thresholds = DEFAULT_THRESHOLDS,
                        extra_members=()) -> ConditionVerdict:
    """Additive second Kuo condition: d kappa + ||g|| >= C d^{r+1-delta} per member.

    Both variants of the LHS (kappa of df and kappa of dg) are regressed and
    must agree in status; the fitted delta is r+1 minus the worst slope.
    """
    _validate_check_args(f, sigma, r, sample)
    if family is None:
        raise CapabilityError("no perturbation family available for this Sigma kind; "
                              "use check_certificate instead")
    th = thresholds
    target = r + 1
    statuses = {}
    worst = None
    fail_payload = None
    member_notes = []
    kappa_df = kappa_field(f)
    members = list(family.members()) + [(label, g) for label, g in extra_members]
    for label, g in members:
        verdicts = []
        for variant_name, lhs in (("kappa(df)", additive_lhs(kappa_df, g)),
                                  ("kappa(dg)", additive_lhs(kappa_field(g), g))):
            kind, est, witnesses, slope = _member_slope_verdict(
                sample, sigma, lhs, target,
                hold_max=target - th.delta_floor, fail_min=target - th.slope_tol,
                thresholds=th, horn=None,
            )
            verdicts.append((variant_name, kind, est, witnesses, slope))
        kinds = {v[1] for v in verdicts}
        if kinds == {"holds"} or kinds == {"fails"}:
            kind = verdicts[0][1]
        else:
            kind = "variants_disagree" if len(kinds) > 1 else verdicts[0][1]
            if len(kinds) > 1:
                member_notes.append(
                    f"{label}: kappa(df)/kappa(dg) variants disagree "
                    f"({verdicts[0][1]} vs {verdicts[1][1]})"
                )
        statuses[label] = kind
        slopes = [v[4] for v in verdicts if v[4] is not None]
        if kind == "fails" and fail_payload is None:
            bad = verdicts[0] if verdicts[0][1] == "fails" else verdicts[1]
            fail_payload = (bad[2], bad[3], label)
        if slopes and (worst is None or max(slopes) > worst[0]):
            src = max(verdicts, key=lambda v: -math.inf if v[4] is None else v[4])
            worst = (max(slopes), src[2], src[3], label)

    notes = [
        "family-relative verdict: the for-all-g quantifier is approximated by "
        f"{len(members)} polynomial realisations of the relative {r}-jet",
    ] + member_notes
    info = sample.describe()
    delta_hat = target - worst[0] if worst else None
    if fail_payload is not None:
        est, witnesses, label = fail_payload
        notes.append(f"member {label} violates the condition")
        return ConditionVerdict("K_tilde_delta", "fails", est, None, delta_hat,
                                witnesses, tuple(notes), info)
    if statuses and all(s == "holds" for s in statuses.values()):
        return ConditionVerdict("K_tilde_delta", "holds", worst[1], None, delta_hat,
                                worst[2], tuple(notes), info)
    undecided = [f"{label}: {s}" for label, s in statuses.items() if s != "holds"]
    notes.append("undecided members: " + "; ".join(undecided))
    est = worst[1] if worst else None
    return ConditionVerdict("K_tilde_delta", "inconclusive", est, None, delta_hat, (),
                            tuple(notes), info)


# -- divergence and certificate forms --------------------------------------------------


def check_KZ(f: PolyMap, sigma: SigmaSet, r: int, sample: ShellSample = None,
             thresholds: Thresholds = DEFAULT_THRESHOLDS) -> ConditionVerdict:
    """Divergence form: (d nu(df) + ||f||) / d^{r+1} -> infinity as d -> 0.

    Holds when per-shell infima of the ratio grow toward small shells (fitted
    slope <= -slope_tol); a bounded or collapsing ratio fails.
    """
    _validate_check_args(f, sigma, r, sample)
    th = thresholds
    target = r + 1
    lhs_fn = additive_lhs(nu_field(f), f)
    evidence = _Evidence.collect(sample, lhs_fn, target)
    info = sample.describe()
    notes = []
    if evidence.n_shells() == 0:
        return ConditionVerdict("KZ", "inconclusive", None, None, None, (),
                                ("sample is empty",), info)
    est_ratio = _fit_infima(evidence.ratio_pairs())
    margin = evidence.min_ratio()
    deep_zeros = evidence.zero_points(rho_max=deep_shell_cut(sample.alpha,
                                                             sample.n_shells))
    if deep_zeros:
        notes.append("LHS vanishes exactly at sampled points off Sigma")
        return ConditionVerdict("KZ", "fails", est_ratio, margin, None,
                                tuple(deep_zeros), tuple(notes), info)
    refined = _refine_ratio_minimum(evidence, lhs_fn, sigma, sample.alpha,
                                    sample.n_shells)
    witnesses = evidence.worst_points()
    if refined is not None:
        witnesses = [_witness(refined["point"], refined["d"], refined["ratio"],
                              refined["lhs"], refined=True)] + witnesses[:9]
    if refined is not None and refined["collapse"] <= th.refine_fail_ratio:
        notes.append("falsification search collapses the ratio; it cannot diverge")
        return ConditionVerdict("KZ", "fails", est_ratio, margin, None,
                                tuple(witnesses), tuple(notes), info)
    if not est_ratio.usable():
        notes.append("fewer than 4 shells with positive infima")
        return ConditionVerdict("KZ", "inconclusive", est_ratio, margin, None,
                                tuple(witnesses), tuple(notes), info)
    if est_ratio.r2 < th.min_r2:
        notes.append(f"fit quality r2={est_ratio.r2:.3f} below {th.min_r2}")
        return ConditionVerdict("KZ", "inconclusive", est_ratio, margin, None,
                                tuple(witnesses), tuple(notes), info)
    suspect = refined is not None and refined["collapse"] <= th.refine_suspect_ratio
    if est_ratio.slope <= -th.slope_tol and not suspect:
        return ConditionVerdict("KZ", "holds", est_ratio, margin, None,
                                tuple(witnesses), tuple(notes), info)
    if suspect:
        notes.append("falsification search reached a suspiciously low ratio")
        return ConditionVerdict("KZ", "inconclusive", est_ratio, margin, None,
                                tuple(witnesses), tuple(notes), info)
    notes.append(
        f"ratio infima are bounded (slope {est_ratio.slope:.3f} >= -{th.slope_tol}); "
        f"no divergence"
    )
    return ConditionVerdict("KZ", "fails", est_ratio, margin, None,
                            tuple(witnesses), tuple(notes), info)


def check_certificate(f: PolyMap, sigma: SigmaSet, r: int, sample: ShellSample = None,
                      thresholds: Thresholds = DEFAULT_THRESHOLDS) -> ConditionVerdict:
    """f-only sufficient certificate: d kappa(df) + ||f|| >= C d^{r+1-delta}.

    This single regression is the fallback when the for-all-g quantifier
    cannot be approximated (general Sigma).  The fitted slope s gives
    delta_hat = r+1-s; a slope tied with r+1 is a boundary case and reported
    inconclusive, since the condition requires a strict delta > 0.
    """
    _validate_check_args(f, sigma, r, sample)
    th = thresholds
    target = r + 1
    verdict = _bound_verdict(
        "certificate", sample, sigma, additive_lhs(kappa_field(f), f), target,
        thresholds,
        hold_slope_max=target - th.delta_floor,
        fail_slope_min=None,
    )
    est = verdict.estimate
    delta_hat = None
    if est is not None and est.usable():
        delta_hat = target - est.slope
    if verdict.status == "inconclusive" and est is not None and est.usable():
        if target - th.delta_floor < est.slope < target + th.slope_tol:
            verdict = replace(verdict, notes=verdict.notes + (
                f"slope {est.slope:.3f} ties the boundary r+1={target}; the strict "
                f"delta > 0 cannot be certified",))
    return replace(verdict, delta_hat=delta_hat)


def check_singular_containment(f: PolyMap, sigma: SigmaSet, r: int,
                               w_bar: float = DEFAULT_WIDTH,
                               sample: ShellSample = None,
                               thresholds: Thresholds = DEFAULT_THRESHOLDS) -> ConditionVerdict:
    """Diagnostic: rank-deficient points of df inside the horn must lie on Sigma.

    Flags sampled horn points where nu(df) drops below rank_tol times the
    spectral norm (or df vanishes entirely) while d(x, Sigma) stays above
    containment_tol.
    """
    _validate_check_args(f, sigma, r, sample)
    th = thresholds
    domain = horn_filter(sample, f, r, w_bar)
    info = sample.describe()
    flagged = []
    smallest = None
    for _rho, pts, d in _shell_blocks(domain):
        J = f.jacobian_batch(pts)
        nu = nu_batch(J)
        top = spectral_norm_batch(J)
        rel = np.where(top > 0.0, nu / np.maximum(top, 1e-300), 0.0)
        shell_min = float(rel.min()) if rel.size else None
        if shell_min is not None:
            smallest = shell_min if smallest is None else min(smallest, shell_min)
        singular = (nu < th.rank_tol * top) | (top == 0.0)
        for idx in np.nonzero(singular & (d > th.containment_tol))[0]:
            flagged.append(_witness(pts[idx], float(d[idx]), float(rel[idx]), float(nu[idx])))
    notes = ("singular set of f inside the horn must be contained in Sigma",)
    if domain.total_points() == 0:
        return ConditionVerdict("singular_containment", "holds", None, None, None, (),
                                notes + ("horn is empty at sample scale (vacuous)",), info)
    if flagged:
        return ConditionVerdict("singular_containment", "fails", None, smallest, None,
                                tuple(flagged[:10]), notes, info)
    return ConditionVerdict("singular_containment", "holds", None, smallest, None, (),
                            notes, info)
