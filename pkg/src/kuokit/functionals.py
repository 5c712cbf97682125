"""Matrix functionals attached to a differential df(x): kappa, nu, eta, Gram forms.

All functions act on a p x n real matrix T (rows are grad f_i(x), n >= p):

* ``kuo_distance``  -- min over i of the distance from row i to the span of
  the other rows (``||v||`` when p = 1).
* ``rabier_nu``     -- inf over unit y of ``||T* y||`` = smallest of the p
  singular values; equals the distance of T to the non-surjective maps.
* ``eta``           -- sqrt of (sum of squared p x p minors) / (sum of squared
  (p-1) x (p-1) minors with one row deleted), with 0/0 = 0.
* ``eta_tilde``     -- max over column subsets I of |M_I| / h_I where h_I is
  the largest sub-minor of M_I, with 0/0 = 0.

The four are equivalent within a sqrt(p) factor:
``nu <= kappa <= sqrt(p) nu`` and ``eta <= kappa <= sqrt(p) eta``.

Batched variants (``*_batch``) evaluate a stack of differentials (N, p, n) in
one shot; the condition engine relies on them.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import CapabilityError, InputError

#: refuse minor enumeration beyond this many column subsets
MAX_MINOR_SUBSETS = 1_000_000


def _as_matrix(T) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    if T.ndim != 2:
        raise InputError("a linear map is a 2-d (p, n) array")
    p, n = T.shape
    if p < 1 or n < p:
        raise InputError(f"n >= p required (got p={p}, n={n})")
    if not np.all(np.isfinite(T)):
        raise InputError("linear map entries must be finite")
    return T


def _guard_minors(n: int, p: int):
    if math.comb(n, p) > MAX_MINOR_SUBSETS:
        raise CapabilityError(
            f"minor enumeration needs C({n},{p}) = {math.comb(n, p)} column subsets "
            f"(limit {MAX_MINOR_SUBSETS}); use kuo_distance or rabier_nu for large n"
        )


def kuo_distance(T) -> float:
    """Kuo distance: min_i dist(v_i, span of the other rows).

    Each distance is a least-squares residual (SVD-based, robust to rank
    deficiency in the remaining rows).  For p = 1 this is the row norm.
    """
    T = _as_matrix(T)
    p = T.shape[0]
    if p == 1:
        return float(np.linalg.norm(T[0]))
    best = math.inf
    for i in range(p):
        v = T[i]
        others = np.delete(T, i, axis=0)
        coeffs, *_ = np.linalg.lstsq(others.T, v, rcond=None)
        dist = float(np.linalg.norm(v - others.T @ coeffs))
        best = min(best, dist)
    return best


def rabier_nu(T) -> float:
    """Rabier's function: the smallest of the p singular values of T."""
    T = _as_matrix(T)
    return float(np.linalg.svd(T, compute_uv=False)[-1])


def _subset_minors(T: np.ndarray, size: int) -> np.ndarray:
    """Determinants of all size x size blocks T[rows, cols] with rows = first `size`.

    Expects T already reduced to `size` rows; enumerates column subsets and
    evaluates the determinants in one batched call.
    """
    n = T.shape[1]
    if size == 0:
        return np.ones(1)
    cols = np.array(list(itertools.combinations(range(n), size)))
    blocks = np.moveaxis(T[:, cols], 1, 0)  # (n_subsets, size, size)
    return np.linalg.det(blocks)


def eta(T) -> float:
    """Minor-ratio functional; 0/0 = 0, and the p=1 denominator convention is 1."""
    T = _as_matrix(T)
    p, n = T.shape
    _guard_minors(n, p)
    numerator = float(np.sum(_subset_minors(T, p) ** 2))
    if numerator == 0.0:
        return 0.0
    if p == 1:
        denominator = 1.0
    else:
        denominator = 0.0
        for j in range(p):
            denominator += float(np.sum(_subset_minors(np.delete(T, j, axis=0), p - 1) ** 2))
    if denominator == 0.0:
        return 0.0
    return math.sqrt(numerator / denominator)


def eta_tilde(T) -> float:
    """Max over column subsets I of |M_I| / (largest sub-minor of M_I); 0/0 = 0."""
    T = _as_matrix(T)
    p, n = T.shape
    _guard_minors(n, p)
    numerators = np.abs(_subset_minors(T, p))
    if p == 1:
        return float(numerators.max())
    sub_index = {S: i for i, S in enumerate(itertools.combinations(range(n), p - 1))}
    sub_minors = np.array([np.abs(_subset_minors(np.delete(T, j, axis=0), p - 1))
                           for j in range(p)])
    best = 0.0
    for idx, I in enumerate(itertools.combinations(range(n), p)):
        numerator = float(numerators[idx])
        if numerator == 0.0:
            continue
        h = max(float(sub_minors[:, sub_index[J]].max())
                for J in itertools.combinations(I, p - 1))
        if h == 0.0:
            continue
        best = max(best, numerator / h)
    return best


def gram_det(vectors) -> float:
    """Gram determinant det(<v_i, v_j>); the squared volume of the parallelepiped."""
    V = np.asarray(vectors, dtype=float)
    if V.ndim != 2:
        raise InputError("gram_det expects a (k, n) array of row vectors")
    k, n = V.shape
    if k > n:
        raise InputError(f"at most n vectors allowed (got k={k} in dimension {n})")
    det = float(np.linalg.det(V @ V.T))
    return max(det, 0.0)


def jacobian_minor_sum(f, point) -> float:
    """Sum of squared p x p jacobian minors of f at a point.

    Equals the Gram determinant of the gradient rows (Cauchy-Binet); both
    routes are kept independent so each can check the other.
    """
    J = f.jacobian(point)
    p, n = J.shape
    _guard_minors(n, p)
    return float(np.sum(_subset_minors(J, p) ** 2))


def dual_apply(T, y) -> float:
    """||T* y|| for a unit covector y; realizes the dual-map condition pointwise."""
    T = _as_matrix(T)
    y = np.asarray(y, dtype=float)
    if y.shape != (T.shape[0],):
        raise InputError(f"y must have shape ({T.shape[0]},)")
    if abs(np.linalg.norm(y) - 1.0) > 1e-12:
        raise InputError("y must be a unit vector (within 1e-12)")
    return float(np.linalg.norm(T.T @ y))


# -- batched variants for stacks of differentials ------------------------------


def _as_stack(J) -> np.ndarray:
    J = np.asarray(J, dtype=float)
    if J.ndim != 3:
        raise InputError("expected a stack of differentials with shape (N, p, n)")
    if J.shape[1] > J.shape[2]:
        raise InputError("n >= p required")
    return J


def nu_batch(J) -> np.ndarray:
    """Smallest singular value per differential, shape (N,)."""
    J = _as_stack(J)
    if J.shape[0] == 0:
        return np.zeros(0)
    return np.linalg.svd(J, compute_uv=False)[..., -1]


def spectral_norm_batch(J) -> np.ndarray:
    """Largest singular value per differential, shape (N,)."""
    J = _as_stack(J)
    if J.shape[0] == 0:
        return np.zeros(0)
    return np.linalg.svd(J, compute_uv=False)[..., 0]


def kappa_batch(J) -> np.ndarray:
    """Kuo distance per differential, shape (N,)."""
    J = _as_stack(J)
    N, p, _ = J.shape
    if N == 0:
        return np.zeros(0)
    if p == 1:
        return np.linalg.norm(J[:, 0, :], axis=1)
    best = np.full(N, np.inf)
    for i in range(p):
        v = J[:, i, :]
        others = np.delete(J, i, axis=1)
        others_t = np.swapaxes(others, 1, 2)
        coeffs = np.linalg.pinv(others_t) @ v[..., None]
        proj = (others_t @ coeffs)[..., 0]
        dist = np.linalg.norm(v - proj, axis=1)
        best = np.minimum(best, dist)
    return best


def gram_ratio_batch(J) -> np.ndarray:
    """sqrt(Gamma(all rows) / sum_j Gamma(rows without j)) per differential.

    This is the Gram-determinant form of the minor functional (equal to eta
    by Cauchy-Binet); 0/0 is mapped to 0.  For p = 1 the empty-set Gram
    determinant is 1, so the value is the gradient norm.
    """
    J = _as_stack(J)
    N, p, _ = J.shape
    if N == 0:
        return np.zeros(0)
    if p == 1:
        return np.linalg.norm(J[:, 0, :], axis=1)
    gram = J @ np.swapaxes(J, 1, 2)
    num = np.maximum(np.linalg.det(gram), 0.0)
    den = np.zeros(N)
    for j in range(p):
        keep = [i for i in range(p) if i != j]
        sub = gram[np.ix_(range(N), keep, keep)]
        if p == 2:
            den += sub[:, 0, 0]
        else:
            den += np.maximum(np.linalg.det(sub), 0.0)
    out = np.zeros(N)
    ok = den > 0.0
    out[ok] = np.sqrt(num[ok] / den[ok])
    return out
