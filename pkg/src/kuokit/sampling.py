"""Radial shell samples near 0, horn-neighbourhood filtering, and arc probes.

Shells are geometric in the distance to Sigma: shell k collects points with
``alpha * 2^-(k+1) < d(x, Sigma) <= alpha * 2^-k``.  Uniform ball sampling
fills the outer shells; thin shells are topped up by stepping off Sigma along
normal directions and re-binning by the recomputed distance.  Everything is
reproducible from the seed, with per-shell sub-seeds, so samples are
bit-identical across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EstimationError, InputError, SamplingError
from .polynomials import eval_arc_component, parse_arc_component
from .regression import MIN_FIT_POINTS, power_fit
from .sigma import SigmaSet

#: points with d(x, Sigma) below this multiple of alpha are discarded
RELATIVE_DISTANCE_FLOOR = 1e-12

#: top-up attempts allowed per missing point before giving up on a shell
TOPUP_BUDGET_PER_POINT = 400


@dataclass(frozen=True)
class Shell:
    """One radial band: outer scale rho and the points binned into it."""

    rho: float
    points: np.ndarray      # (count, n)
    distances: np.ndarray   # (count,)

    @property
    def count(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class ShellSample:
    """A batch of sample points organized in geometric radial shells."""

    sigma: SigmaSet
    alpha: float
    shells: tuple
    seed: int | None = None
    requested_per_shell: int | None = None

    @property
    def n_shells(self) -> int:
        return len(self.shells)

    @property
    def ambient_dim(self) -> int:
        return self.sigma.ambient_dim

    def total_points(self) -> int:
        return sum(s.count for s in self.shells)

    def radii(self) -> np.ndarray:
        return np.array([s.rho for s in self.shells])

    def all_points(self) -> np.ndarray:
        blocks = [s.points for s in self.shells if s.count]
        if not blocks:
            return np.zeros((0, self.ambient_dim))
        return np.vstack(blocks)

    def all_distances(self) -> np.ndarray:
        blocks = [s.distances for s in self.shells if s.count]
        if not blocks:
            return np.zeros(0)
        return np.concatenate(blocks)

    def filtered(self, keep) -> "ShellSample":
        """New sample retaining, per shell, the points flagged by ``keep``.

        ``keep(points, distances) -> bool mask`` is evaluated shell by shell;
        shells may end up empty, which downstream consumers tolerate.
        """
        shells = []
        for shell in self.shells:
            if shell.count == 0:
                shells.append(shell)
                continue
            mask = np.asarray(keep(shell.points, shell.distances), dtype=bool)
            shells.append(Shell(shell.rho, shell.points[mask], shell.distances[mask]))
        return ShellSample(self.sigma, self.alpha, tuple(shells), self.seed,
                           self.requested_per_shell)

    def restricted_to_ball(self, radius: float) -> "ShellSample":
        """Drop points with ||x|| >= radius (the alpha cut of the domain)."""
        return self.filtered(lambda pts, d: np.linalg.norm(pts, axis=1) < radius)

    @classmethod
    def from_points(cls, sigma: SigmaSet, alpha: float, n_shells: int,
                    points: np.ndarray, seed: int | None = None) -> "ShellSample":
        """Bin explicit points by their (recomputed) distance to Sigma."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != sigma.ambient_dim:
            raise InputError("expected an (N, n) array of points")
        distances = sigma.distance_batch(points)
        buckets_p = [[] for _ in range(n_shells)]
        buckets_d = [[] for _ in range(n_shells)]
        floor = RELATIVE_DISTANCE_FLOOR * alpha
        for x, d in zip(points, distances):
            k = _shell_index(d, alpha, n_shells, floor)
            if k is not None:
                buckets_p[k].append(x)
                buckets_d[k].append(d)
        shells = []
        for k in range(n_shells):
            rho = alpha * 2.0 ** (-k)
            pts = np.array(buckets_p[k]) if buckets_p[k] else np.zeros((0, sigma.ambient_dim))
            ds = np.array(buckets_d[k]) if buckets_d[k] else np.zeros(0)
            shells.append(Shell(rho, pts, ds))
        return cls(sigma, alpha, tuple(shells), seed)

    def describe(self) -> dict:
        return {
            "alpha": self.alpha,
            "n_shells": self.n_shells,
            "points_per_shell": self.requested_per_shell,
            "seed": self.seed,
            "sigma": self.sigma.describe(),
        }

    def to_dict(self) -> dict:
        out = self.describe()
        out["shells"] = [
            {"rho": s.rho, "points": s.points.tolist(), "distances": s.distances.tolist()}
            for s in self.shells
        ]
        return out


def _shell_index(d: float, alpha: float, n_shells: int, floor: float):
    if not (floor <= d <= alpha):
        return None
    k = int(math.floor(-math.log2(d / alpha)))
    if 0 <= k < n_shells:
        return k
    return None


def _uniform_ball(rng: np.random.Generator, count: int, dim: int, radius: float) -> np.ndarray:
    directions = rng.standard_normal((count, dim))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    radii = radius * rng.random(count) ** (1.0 / dim)
    return directions / norms * radii[:, None]


def _unit_vectors(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    v = rng.standard_normal((count, dim))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return v / norms


def sample_shells(sigma: SigmaSet, alpha: float, n_shells: int, per_shell: int,
                  seed: int) -> ShellSample:
    """Draw ``per_shell`` points for each of ``n_shells`` geometric shells.

    Stage one draws uniformly from the alpha-ball and bins by d(x, Sigma);
    stage two tops up each deficient shell with ``x = z + rho * u`` where z
    projects a ball point onto Sigma and u is a random normal direction, then
    re-bins by the recomputed distance.  A shell that cannot be filled within
    the attempt budget raises SamplingError naming the shell.
    """
    if alpha <= 0:
        raise InputError("alpha must be positive")
    if n_shells < 2:
        raise InputError("need at least 2 shells")
    if per_shell < 1:
        raise InputError("need at least 1 point per shell")
    n = sigma.ambient_dim
    floor = RELATIVE_DISTANCE_FLOOR * alpha
    buckets_p = [[] for _ in range(n_shells)]
    buckets_d = [[] for _ in range(n_shells)]

    rng0 = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    ball = _uniform_ball(rng0, n_shells * per_shell, n, alpha)
    dists = sigma.distance_batch(ball)
    for x, d in zip(ball, dists):
        k = _shell_index(d, alpha, n_shells, floor)
        if k is not None and len(buckets_p[k]) < per_shell:
            buckets_p[k].append(x)
            buckets_d[k].append(d)

    normal = sigma.normal_basis() if sigma.kind == "linear_subspace" else None
    for k in range(n_shells):
        deficit = per_shell - len(buckets_p[k])
        if deficit <= 0:
            continue
        rho_hi = alpha * 2.0 ** (-k)
        rho_lo = alpha * 2.0 ** (-k - 1)
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), 1000 + k]))
        budget = TOPUP_BUDGET_PER_POINT * deficit
        spent = 0
        while deficit > 0 and spent < budget:
            batch = min(max(2 * deficit, 16), budget - spent)
            spent += batch
            radii = rng.uniform(rho_lo, rho_hi, batch)
            if sigma.kind == "origin":
                base = np.zeros((batch, n))
                dirs = _unit_vectors(rng, batch, n)
            elif sigma.kind == "linear_subspace":
                base = _uniform_ball(rng, batch, n, alpha)
                base = (base @ sigma.basis) @ sigma.basis.T
                dirs = _unit_vectors(rng, batch, normal.shape[1]) @ normal.T
            else:
                base_raw = _uniform_ball(rng, batch, n, alpha)
                base = np.array([sigma.project(b) for b in base_raw])
                dirs = np.empty((batch, n))
                for idx in range(batch):
                    grads = np.array([
                        [float(g.evaluate(base[idx])) for g in row]
                        for row in sigma._grad_table
                    ])
                    norms = np.linalg.norm(grads, axis=1)
                    active = int(np.argmax(norms))
                    if norms[active] < 1e-12:
                        dirs[idx] = _unit_vectors(rng, 1, n)[0]
                        continue
                    g_hat = grads[active] / norms[active]
                    sign = 1.0 if rng.random() < 0.5 else -1.0
                    jitter = rng.standard_normal(n)
                    jitter -= (jitter @ g_hat) * g_hat
                    v = sign * g_hat + 0.3 * jitter
                    dirs[idx] = v / np.linalg.norm(v)
            candidates = base + radii[:, None] * dirs
            inside = np.linalg.norm(candidates, axis=1) <= alpha
            candidates = candidates[inside]
            if candidates.shape[0] == 0:
                continue
            cand_d = sigma.distance_batch(candidates)
            for x, d in zip(candidates, cand_d):
                if deficit == 0:
                    break
                if _shell_index(d, alpha, n_shells, floor) == k:
                    buckets_p[k].append(x)
                    buckets_d[k].append(d)
                    deficit -= 1
        if deficit > 0:
            raise SamplingError(
                f"shell {k} (d in ({rho_lo:.3g}, {rho_hi:.3g}]) still misses {deficit} "
                f"of {per_shell} points after {budget} attempts; Sigma may be too fat "
                f"or too thin at that scale"
            )

    shells = tuple(
        Shell(alpha * 2.0 ** (-k), np.array(buckets_p[k]), np.array(buckets_d[k]))
        for k in range(n_shells)
    )
    return ShellSample(sigma, float(alpha), shells, int(seed), int(per_shell))


def horn_filter(sample: ShellSample, g, degree: int, width: float) -> ShellSample:
    """Retain the points of the horn-neighbourhood ||g(x)|| <= width * d^degree.

    The comparison allows a few ulps of slack so points that satisfy the
    bound with mathematical equality (e.g. ||g|| = d^degree identically) are
    not dropped by rounding of the two evaluation routes.
    """
    if degree < 1:
        raise InputError("horn degree must be >= 1")
    if not width > 0:
        raise InputError("horn width must be positive")
    if g.n != sample.ambient_dim:
        raise InputError("map and sample dimensions differ")
    slack = 1.0 + 8 * np.finfo(float).eps
    return sample.filtered(
        lambda pts, d: g.norm_batch(pts) <= width * d ** degree * slack
    )


# -- arc probes ---------------------------------------------------------------


def default_t_grid() -> np.ndarray:
    return 2.0 ** -np.arange(2, 21)


@dataclass(frozen=True)
class ArcProbe:
    """A parametrized arc gamma(t) with gamma(0) = 0, evaluated on a grid t -> 0."""

    components: tuple
    t_grid: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.t_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise InputError("t grid must be a 1-d array with at least 2 values")
        if np.any(grid <= 0) or np.any(np.diff(grid) >= 0):
            raise InputError("t grid must be strictly decreasing and positive")
        object.__setattr__(self, "t_grid", grid)

    @property
    def ambient_dim(self) -> int:
        return len(self.components)

    @classmethod
    def from_strings(cls, texts, t_grid=None) -> "ArcProbe":
        components = tuple(parse_arc_component(t) for t in texts)
        grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
        return cls(components, grid)

    def points(self) -> np.ndarray:
        """gamma(t_k) for the whole grid, shape (len(grid), n)."""
        cols = [eval_arc_component(c, self.t_grid) for c in self.components]
        return np.column_stack(cols)


def arc_orders(probe: ArcProbe, quantities, sigma: SigmaSet) -> list:
    """Empirical asymptotic order of each quantity against d(gamma(t), Sigma).

    ``quantities`` maps a point array (T, n) to positive values (T,); a
    quantity that vanishes identically along the arc gets order ``inf`` (the
    degenerate flag).  Fewer than 4 usable grid points raises EstimationError.
    """
    points = probe.points()
    if points.shape[1] != sigma.ambient_dim:
        raise InputError("arc and Sigma dimensions differ")
    distances = sigma.distance_batch(points)
    on_sigma = distances <= 0.0
    orders = []
    for quantity in quantities:
        values = np.asarray(quantity(points), dtype=float)
        if values.shape != distances.shape:
            raise InputError("quantity must return one value per arc point")
        if np.all(values[~on_sigma] == 0.0):
            orders.append(math.inf)
            continue
        mask = (~on_sigma) & (values > 0.0)
        if int(mask.sum()) < MIN_FIT_POINTS:
            raise EstimationError(
                f"arc fit needs at least {MIN_FIT_POINTS} usable grid points, "
                f"got {int(mask.sum())}"
            )
        slope, _, _ = power_fit(distances[mask], values[mask])
        orders.append(slope)
    return orders
