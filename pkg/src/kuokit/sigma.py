"""The closed germ Sigma and the distance function d(x, Sigma).

Three kinds are supported, all containing the origin:

* ``origin``            -- Sigma = {0}; d(x) = ||x|| exactly.
* ``linear_subspace``   -- spanned by an orthonormal basis; d(x) is the norm
  of the component of x orthogonal to the basis, exactly.
* ``polynomial_zero_set`` -- common zeros of polynomials with zero constant
  term; d(x) is an *upper bound* computed by multi-start penalty descent
  followed by a Gauss-Newton polish onto the constraint set.

The three kinds are subanalytic by construction, which is documented rather
than verified.  Sigma = R^n is rejected (0 must be an accumulation point of
the complement), and a heuristic warning fires when the defining polynomials
appear to vanish identically near 0.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.optimize import minimize

from .errors import ApproximationError, InputError
from .polynomials import parse_poly

#: constraint residual accepted for points "on" a polynomial zero set
CONSTRAINT_TOL = 1e-10

#: default relative slack attributed to polynomial-kind distance values
DEFAULT_APPROX_SLACK = 0.05


class SigmaSet:
    """Immutable representation of the closed germ Sigma with 0 in Sigma."""

    __slots__ = ("kind", "ambient_dim", "basis", "defining_polys", "approx_slack",
                 "_normal", "_grad_table", "n_starts")

    def __init__(self, kind: str, ambient_dim: int, basis=None, defining_polys=None,
                 approx_slack: float = DEFAULT_APPROX_SLACK, n_starts: int = 16):
        if ambient_dim < 1:
            raise InputError("ambient dimension must be >= 1")
        self.kind = kind
        self.ambient_dim = int(ambient_dim)
        self.approx_slack = float(approx_slack)
        self.n_starts = int(n_starts)
        self.basis = None
        self.defining_polys = None
        self._normal = None
        self._grad_table = None
        if kind == "origin":
            pass
        elif kind == "linear_subspace":
            basis = np.asarray(basis, dtype=float)
            if basis.ndim != 2 or basis.shape[0] != ambient_dim:
                raise InputError("subspace basis must be an (n, k) array of columns")
            k = basis.shape[1]
            if k < 1:
                raise InputError("use kind='origin' for the zero subspace")
            if k >= ambient_dim:
                raise InputError("Sigma = R^n is not allowed; 0 must be an accumulation "
                                 "point of the complement")
            gram = basis.T @ basis
            if np.max(np.abs(gram - np.eye(k))) > 1e-12:
                raise InputError("subspace basis must be orthonormal within 1e-12")
            self.basis = basis
        elif kind == "polynomial_zero_set":
            polys = tuple(defining_polys or ())
            polys = tuple(q for q in polys if not q.is_zero())
            if not polys:
                raise InputError("Sigma = R^n is not allowed; give at least one nonzero "
                                 "defining polynomial")
            for q in polys:
                if q.nvars != ambient_dim:
                    raise InputError("defining polynomials must use the ambient variables")
                if q.constant_term() != 0:
                    raise InputError("defining polynomials must vanish at 0 (0 in Sigma)")
            self.defining_polys = tuple(q.to_float() for q in polys)
            self._grad_table = tuple(
                tuple(q.diff(j) for j in range(ambient_dim)) for q in self.defining_polys
            )
            self._warn_if_flat_near_origin()
        else:
            raise InputError(f"unknown Sigma kind {kind!r}")

    # -- constructors -----------------------------------------------------------

    @classmethod
    def origin(cls, ambient_dim: int) -> "SigmaSet":
        return cls("origin", ambient_dim)

    @classmethod
    def subspace(cls, basis) -> "SigmaSet":
        basis = np.asarray(basis, dtype=float)
        return cls("linear_subspace", basis.shape[0], basis=basis)

    @classmethod
    def subspace_from_span(cls, vectors) -> "SigmaSet":
        """Orthonormalize a spanning set (columns) with QR, then build the subspace."""
        V = np.asarray(vectors, dtype=float)
        if V.ndim != 2:
            raise InputError("spanning set must be an (n, k) array")
        q, r = np.linalg.qr(V)
        keep = np.abs(np.diag(r)) > 1e-12
        if not np.any(keep):
            raise InputError("spanning set has rank 0; use kind='origin'")
        return cls.subspace(q[:, keep])

    @classmethod
    def zero_set(cls, polys, ambient_dim: int | None = None,
                 approx_slack: float = DEFAULT_APPROX_SLACK) -> "SigmaSet":
        """Zero set of polynomials given as Poly values or expression strings."""
        items = list(polys)
        if items and isinstance(items[0], str):
            if ambient_dim is None:
                raise InputError("ambient_dim is required when polys are strings")
            items = [parse_poly(t, ambient_dim) for t in items]
        if ambient_dim is None:
            ambient_dim = items[0].nvars
        return cls("polynomial_zero_set", ambient_dim, defining_polys=items,
                   approx_slack=approx_slack)

    def _warn_if_flat_near_origin(self):
        probes = 0.01 * np.array(
            [[np.cos(1.7 * i + 0.3 * j) for j in range(self.ambient_dim)]
             for i in range(8)]
        )
        values = np.column_stack([q.evaluate_batch(probes) for q in self.defining_polys])
        if np.all(np.abs(values) < 1e-14):
            warnings.warn("defining polynomials vanish at all probe points near 0; "
                          "Sigma may have full dimension there", stacklevel=3)

    # -- geometry ----------------------------------------------------------------

    def normal_basis(self) -> np.ndarray:
        """Orthonormal basis of the orthogonal complement (linear_subspace kind)."""
        if self.kind == "origin":
            return np.eye(self.ambient_dim)
        if self.kind != "linear_subspace":
            raise InputError("normal_basis is defined for origin/subspace kinds only")
        if self._normal is None:
            u, s, _ = np.linalg.svd(self.basis, full_matrices=True)
            self._normal = u[:, self.basis.shape[1]:]
        return self._normal

    def _check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.ambient_dim:
            raise InputError(f"point has {x.shape[0]} coordinates, expected {self.ambient_dim}")
        return x

    def distance(self, x) -> float:
        """d(x, Sigma); exact for origin/subspace, upper bound for zero sets."""
        x = self._check_point(x)
        if self.kind == "origin":
            return float(np.linalg.norm(x))
        if self.kind == "linear_subspace":
            proj = self.basis @ (self.basis.T @ x)
            return float(np.linalg.norm(x - proj))
        dist, _ = self._nearest_on_variety(x)
        return dist

    def project(self, x) -> np.ndarray:
        """A point z in Sigma with ||x - z|| equal to the reported distance."""
        x = self._check_point(x)
        if self.kind == "origin":
            return np.zeros(self.ambient_dim)
        if self.kind == "linear_subspace":
            return self.basis @ (self.basis.T @ x)
        _, z = self._nearest_on_variety(x)
        return z

    def distance_batch(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.ambient_dim:
            raise InputError("expected an (N, n) array of points")
        if self.kind == "origin":
            return np.linalg.norm(points, axis=1)
        if self.kind == "linear_subspace":
            proj = (points @ self.basis) @ self.basis.T
            return np.linalg.norm(points - proj, axis=1)
        return np.array([self._nearest_on_variety(x)[0] for x in points])

    def constraint_values(self, x) -> np.ndarray:
        return np.array([float(q.evaluate(x)) for q in self.defining_polys])

    def _constraint_jacobian(self, z: np.ndarray) -> np.ndarray:
        m = len(self.defining_polys)
        J = np.empty((m, self.ambient_dim))
        for i in range(m):
            for j in range(self.ambient_dim):
                J[i, j] = float(self._grad_table[i][j].evaluate(z))
        return J

    def _polish_onto_variety(self, z: np.ndarray):
        """Gauss-Newton steps onto g(z) = 0; None when it fails to converge."""
        z = z.copy()
        for _ in range(60):
            g = self.constraint_values(z)
            if np.max(np.abs(g)) <= 1e-13:
                return z
            J = self._constraint_jacobian(z)
            step, *_ = np.linalg.lstsq(J, g, rcond=None)
            if not np.all(np.isfinite(step)):
                return None
            z = z - step
        if np.max(np.abs(self.constraint_values(z))) <= CONSTRAINT_TOL:
            return z
        return None

    def _nearest_on_variety(self, x: np.ndarray):
        """Multi-start penalty continuation; returns (distance upper bound, witness)."""
        n = self.ambient_dim

        def objective(z, w):
            diff = z - x
            g = self.constraint_values(z)
            value = float(diff @ diff + w * (g @ g))
            grad = 2.0 * diff
            if w:
                J = self._constraint_jacobian(z)
                grad = grad + 2.0 * w * (J.T @ g)
            return value, grad

        bits = np.frombuffer(np.ascontiguousarray(x).tobytes(), dtype=np.uint64)
        rng = np.random.default_rng(np.random.SeedSequence([0x5167, *bits.tolist()]))
        scale = 0.5 * (np.linalg.norm(x) + 0.1)
        starts = [x.copy(), np.zeros(n)]
        for _ in range(max(self.n_starts - 2, 0)):
            starts.append(x + scale * rng.standard_normal(n))

        best_z = None
        best_d = np.inf
        for start in starts:
            z = start
            for w in 10.0 ** np.arange(0, 7):
                res = minimize(objective, z, args=(w,), jac=True, method="L-BFGS-B",
                               options={"maxiter": 80})
                z = res.x
            z = self._polish_onto_variety(z)
            if z is None:
                continue
            d = float(np.linalg.norm(x - z))
            if d < best_d:
                best_d, best_z = d, z
        if best_z is None:
            raise ApproximationError(
                f"projection onto the zero set did not converge for x={x.tolist()}",
                best_bound=float(np.linalg.norm(x)),
            )
        return best_d, best_z

    # -- transforms & serialization ----------------------------------------------

    def rotated(self, rotation: np.ndarray) -> "SigmaSet":
        """The image R Sigma (origin is fixed; bases and defining polys transform)."""
        R = np.asarray(rotation, dtype=float)
        if R.shape != (self.ambient_dim, self.ambient_dim):
            raise InputError("rotation must be n x n")
        if self.kind == "origin":
            return self
        if self.kind == "linear_subspace":
            return SigmaSet.subspace_from_span(R @ self.basis)
        polys = [q.compose_linear(R.T) for q in self.defining_polys]
        return SigmaSet("polynomial_zero_set", self.ambient_dim, defining_polys=polys,
                        approx_slack=self.approx_slack, n_starts=self.n_starts)

    def describe(self) -> dict:
        out = {"kind": self.kind, "ambient_dim": self.ambient_dim}
        if self.kind == "linear_subspace":
            out["basis"] = self.basis.tolist()
        if self.kind == "polynomial_zero_set":
            out["defining_polys"] = [q.to_string() for q in self.defining_polys]
            out["approx_slack"] = self.approx_slack
        return out

    def __repr__(self):
        return f"SigmaSet({self.describe()})"


def distance_to_sigma(sigma: SigmaSet, x) -> float:
    """d(x, Sigma) -- see SigmaSet.distance."""
    return sigma.distance(x)


def project_to_sigma(sigma: SigmaSet, x) -> np.ndarray:
    """Witness point for the reported distance -- see SigmaSet.project."""
    return sigma.project(x)
