import itertools

import numpy as np
import pytest

from kuokit import Poly, PolyMap


def random_rotation(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-ish orthogonal matrix with determinant +1."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_polymap(rng: np.random.Generator, n: int, p: int, max_degree: int,
                   density: float = 0.6) -> PolyMap:
    """Random germ with coefficients in [-1, 1] and zero constant terms."""
    comps = []
    for _ in range(p):
        terms = {}
        for deg in range(1, max_degree + 1):
            for exps in itertools.combinations_with_replacement(range(n), deg):
                if rng.random() > density:
                    continue
                e = [0] * n
                for j in exps:
                    e[j] += 1
                terms[tuple(e)] = rng.uniform(-1, 1)
        if not terms:
            e = [0] * n
            e[int(rng.integers(n))] = 1
            terms[tuple(e)] = rng.uniform(0.2, 1.0)
        comps.append(Poly(n, terms))
    return PolyMap(comps)


def central_difference_jacobian(f: PolyMap, x, step: float = 1e-5) -> np.ndarray:
    """Finite-difference oracle for df(x), independent of the symbolic path."""
    x = np.asarray(x, dtype=float)
    out = np.zeros((f.p, f.n))
    for j in range(f.n):
        forward = x.copy()
        backward = x.copy()
        forward[j] += step
        backward[j] -= step
        out[:, j] = (np.asarray(f.eval(forward)) - np.asarray(f.eval(backward))) / (2 * step)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
