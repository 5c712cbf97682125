"""Polynomial germs and the matrix functionals attached to their differentials.

A map germ f: (R^n, 0) -> (R^p, 0) is entered as expressions in x1..xn.  Its
differential df(x) is computed symbolically, and four functionals measure how
far df(x) is from dropping rank:

* kappa  -- the Kuo distance: min distance of one gradient row to the span of
            the others,
* nu     -- Rabier's function: the smallest singular value,
* eta    -- a ratio of sums of squared minors,
* eta~   -- a max-ratio variant of eta.

They agree up to a sqrt(p) factor, which this script spot-checks.
"""

import numpy as np

from kuokit import (PolyMap, dual_apply, eta, eta_tilde, gram_det,
                    jacobian_minor_sum, kuo_distance, rabier_nu)

f = PolyMap.from_strings(["x1^2 + x2^2", "x1*x2"])
print("germ f =", f.to_strings(), f"  (n={f.n}, p={f.p})")

x = [1.0, 2.0]
print("f(1, 2)        =", f.eval(x))
J = f.jacobian(x)
print("df(1, 2)       =\n", J)

print("\nfunctionals at (1, 2):")
print("  kappa(df)    =", kuo_distance(J))
print("  nu(df)       =", rabier_nu(J))
print("  eta(df)      =", eta(J))
print("  eta~(df)     =", eta_tilde(J))

# the sum of squared maximal jacobian minors equals the Gram determinant of
# the gradient rows (Cauchy-Binet); both routes are implemented independently
print("\nminor sum      =", jacobian_minor_sum(f, x))
print("Gram det       =", gram_det(J))

# nu is the uniform-in-y infimum of ||df^* y|| over the unit sphere
angles = np.linspace(0.0, 2 * np.pi, 2000, endpoint=False)
grid = min(dual_apply(J, [np.cos(a), np.sin(a)]) for a in angles)
print("\nsphere-grid min of ||df* y|| =", grid, " vs nu =", rabier_nu(J))

# sandwich inequalities on random matrices
rng = np.random.default_rng(0)
print("\nsandwich nu <= kappa <= sqrt(p) nu on 1000 random matrices:")
worst_low, worst_high = np.inf, 0.0
for _ in range(1000):
    n = int(rng.integers(1, 7))
    p = int(rng.integers(1, n + 1))
    T = rng.uniform(-1, 1, (p, n))
    k, nu = kuo_distance(T), rabier_nu(T)
    if nu > 0:
        worst_low = min(worst_low, k / nu)
        worst_high = max(worst_high, k / nu / np.sqrt(p))
print(f"  kappa/nu ranged over [{worst_low:.4f}, sqrt(p) * {worst_high:.4f}]")
