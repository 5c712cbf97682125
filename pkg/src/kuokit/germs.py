"""Polynomial map germs f: (R^n, 0) -> (R^p, 0) and jet-preserving perturbations.

A ``PolyMap`` bundles ``p`` sparse polynomials in ``n`` variables (n >= p),
each vanishing at the origin, with exact symbolic differentiation.  A
``PerturbationFamily`` realizes the "all realisations of the same relative
r-jet" quantifier for the supported Sigma kinds: it collects generators
``m(u) * e_i`` where ``m`` runs over the monomials of total degree r+1 in the
coordinates ``u`` normal to Sigma, so that ``|m(u)| <= d(x, Sigma)^{r+1}``
holds pointwise by construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, InputError
from .polynomials import Poly, infer_nvars, parse_poly


class PolyMap:
    """A polynomial map germ with components f_1..f_p vanishing at 0."""

    __slots__ = ("n", "p", "components", "exact", "_partials")

    def __init__(self, components, n: int | None = None):
        components = tuple(components)
        if not components:
            raise InputError("a map germ needs at least one component")
        nvars = components[0].nvars
        if any(c.nvars != nvars for c in components):
            raise InputError("all components must share the variable count")
        if n is not None and n != nvars:
            raise InputError(f"declared n={n} but components use {nvars} variables")
        p = len(components)
        if p > nvars:
            raise InputError(f"n >= p required (got n={nvars}, p={p})")
        for i, comp in enumerate(components):
            if comp.constant_term() != 0:
                raise InputError(f"component {i + 1} has a nonzero constant term; germs satisfy f(0)=0")
        self.n = nvars
        self.p = p
        self.components = components
        self.exact = all(c.exact for c in components)
        self._partials = None

    @classmethod
    def from_strings(cls, texts, n: int | None = None, exact: bool = False) -> "PolyMap":
        """Build a germ from expression strings in variables x1..xn."""
        texts = list(texts)
        if n is None:
            n = infer_nvars(texts)
        return cls([parse_poly(t, n, exact) for t in texts])

    # -- evaluation -----------------------------------------------------------

    def __call__(self, point):
        return self.eval(point)

    def eval(self, point):
        """Value f(x) at a single point; exact when self and point are exact."""
        if len(point) != self.n:
            raise InputError(f"point has {len(point)} coordinates, expected {self.n}")
        values = [c.evaluate(point) for c in self.components]
        if self.exact:
            return values
        return np.array(values, dtype=float)

    def eval_batch(self, points: np.ndarray) -> np.ndarray:
        """Values at many points, shape (N, p)."""
        points = np.asarray(points, dtype=float)
        return np.column_stack([c.evaluate_batch(points) for c in self.components])

    def norm_batch(self, points: np.ndarray) -> np.ndarray:
        """Euclidean norms ||f(x)|| at many points, shape (N,)."""
        values = self.eval_batch(points)
        return np.linalg.norm(values, axis=1)

    def _partial_table(self):
        if self._partials is None:
            self._partials = tuple(
                tuple(c.diff(j) for j in range(self.n)) for c in self.components
            )
        return self._partials

    def jacobian(self, point) -> np.ndarray:
        """The differential df(x) as a (p, n) array of exact partial values."""
        if len(point) != self.n:
            raise InputError(f"point has {len(point)} coordinates, expected {self.n}")
        partials = self._partial_table()
        rows = [[float(partials[i][j].evaluate(point)) for j in range(self.n)]
                for i in range(self.p)]
        return np.array(rows, dtype=float)

    def jacobian_batch(self, points: np.ndarray) -> np.ndarray:
        """Differentials at many points, shape (N, p, n)."""
        points = np.asarray(points, dtype=float)
        partials = self._partial_table()
        out = np.empty((points.shape[0], self.p, self.n))
        for i in range(self.p):
            for j in range(self.n):
                out[:, i, j] = partials[i][j].evaluate_batch(points)
        return out

    # -- algebra ---------------------------------------------------------------

    def __add__(self, other: "PolyMap") -> "PolyMap":
        if not isinstance(other, PolyMap):
            return NotImplemented
        if (self.n, self.p) != (other.n, other.p):
            raise InputError("maps must share (n, p) to be added")
        return PolyMap([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "PolyMap") -> "PolyMap":
        return self + other.scaled(-1)

    def scaled(self, factor) -> "PolyMap":
        return PolyMap([c.scaled(factor) for c in self.components])

    def rotated(self, rotation: np.ndarray) -> "PolyMap":
        """The composition x -> f(R x) for an orthogonal matrix R."""
        rotation = np.asarray(rotation, dtype=float)
        if rotation.shape != (self.n, self.n):
            raise InputError("rotation must be an n x n matrix")
        return PolyMap([c.to_float().compose_linear(rotation) for c in self.components])

    def truncated(self, order: int) -> "PolyMap":
        if order < 1:
            raise InputError("jet order must be >= 1")
        return PolyMap([c.truncated(order) for c in self.components])

    def max_degree(self) -> int:
        return max(c.total_degree() for c in self.components)

    def to_strings(self) -> list[str]:
        return [c.to_string() for c in self.components]

    def __repr__(self):
        return f"PolyMap(n={self.n}, p={self.p}, [{', '.join(self.to_strings())}])"


# -- spec-level operation names ----------------------------------------------


def eval_map(f: PolyMap, point):
    """Evaluate a germ at a point (dimension-checked)."""
    return f.eval(point)


def jacobian(f: PolyMap, point) -> np.ndarray:
    """df(x), rows grad f_i(x), by symbolic differentiation then evaluation."""
    return f.jacobian(point)


def truncate_jet(f: PolyMap, order: int) -> PolyMap:
    """All monomials of total degree <= order; canonical jet representative for Sigma={0}."""
    return f.truncated(order)


@dataclass(frozen=True)
class PerturbationFamily:
    """Finite family of jet-preserving perturbations of a base germ.

    Every generator ``h`` has ``||h(x)|| <= d(x, Sigma)^{r+1}`` pointwise
    (exactly, up to rounding, thanks to the normal-coordinate construction),
    so ``f + eps*h`` shares the relative r-jet of ``f``.
    """

    base: PolyMap
    sigma: "object"
    order: int
    generators: tuple = ()
    labels: tuple = ()
    amplitudes: tuple = ()
    normal_basis: np.ndarray = field(default=None, repr=False)

    def members(self):
        """Yield (label, g) pairs: the base germ first, then each f + eps*h."""
        yield "g=f", self.base
        for eps in self.amplitudes:
            for label, gen in zip(self.labels, self.generators):
                yield f"g=f+{eps}*{label}", self.base + gen.scaled(eps)

    def n_members(self) -> int:
        return 1 + len(self.amplitudes) * len(self.generators)

    def check_flatness_on(self, points: np.ndarray, distances: np.ndarray, tol: float = 1e-9) -> float:
        """Largest ||h(x)|| / d(x,Sigma)^{r+1} over the sample; raises above 1+tol."""
        points = np.asarray(points, dtype=float)
        distances = np.asarray(distances, dtype=float)
        if np.any(distances <= 0):
            raise InputError("flatness check needs points off Sigma")
        bound = distances ** (self.order + 1)
        worst = 0.0
        for label, gen in zip(self.labels, self.generators):
            ratio = gen.norm_batch(points) / bound
            top = float(ratio.max()) if ratio.size else 0.0
            if top > 1.0 + tol:
                raise InputError(
                    f"generator {label} violates the flatness bound: ||h|| = {top:.3g} * d^{self.order + 1}"
                )
            worst = max(worst, top)
        return worst


def _monomial_exponents(nvars: int, degree: int):
    """All exponent tuples of total degree exactly ``degree``."""
    for cuts in itertools.combinations_with_replacement(range(nvars), degree):
        exps = [0] * nvars
        for j in cuts:
            exps[j] += 1
        yield tuple(exps)


def make_perturbation_family(f: PolyMap, sigma, order: int, eps_grid) -> PerturbationFamily:
    """Generators m(u)*e_i with m of degree r+1 in the coordinates normal to Sigma.

    Supported for Sigma = {0} (all coordinates are normal) and linear
    subspaces (normal coordinates after the orthogonal split).  For a
    polynomial zero set there is no certified monomial bound, so the caller
    is pointed to the f-only sufficient certificate instead.
    """
    if order < 1:
        raise InputError("jet order must be >= 1")
    eps_grid = tuple(float(e) for e in eps_grid)
    if not eps_grid or any(e <= 0 for e in eps_grid):
        raise InputError("amplitude grid must be non-empty and positive")
    kind = getattr(sigma, "kind", None)
    if kind == "origin":
        normal = np.eye(f.n)
    elif kind == "linear_subspace":
        normal = sigma.normal_basis()
    else:
        raise CapabilityError(
            f"perturbation families are only generated for Sigma of kind origin or "
            f"linear_subspace (got {kind!r}); use check_certificate for general Sigma"
        )
    if sigma.ambient_dim != f.n:
        raise InputError("Sigma ambient dimension must match the germ")
    n_normal = normal.shape[1]
    generators = []
    labels = []
    zero = Poly.zero(f.n)
    for exps in _monomial_exponents(n_normal, order + 1):
        mono = Poly.monomial(n_normal, exps, 1.0)
        if kind == "origin":
            mono_x = Poly(f.n, dict(mono.terms))
        else:
            mono_x = mono.compose_linear(normal.T)
        for i in range(f.p):
            comps = [zero] * f.p
            comps[i] = mono_x
            generators.append(PolyMap(comps))
            labels.append(f"{mono.to_string().replace('x', 'u')}*e{i + 1}")
    return PerturbationFamily(
        base=f,
        sigma=sigma,
        order=order,
        generators=tuple(generators),
        labels=tuple(labels),
        amplitudes=eps_grid,
        normal_basis=normal,
    )
