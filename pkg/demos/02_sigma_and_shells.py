"""The closed set Sigma, distances to it, shell sampling and horn filtering.

The sampler bins points by d(x, Sigma) into geometric shells, which later
drive log-log regressions of Lojasiewicz-type exponents.  A horn
neighbourhood ||f(x)|| <= w * d(x, Sigma)^r is the cusp-shaped region around
the zero set of f on which the relative Kuo condition is tested.
"""

import numpy as np

from kuokit import PolyMap, SigmaSet, horn_filter, sample_shells

# three kinds of Sigma
origin = SigmaSet.origin(2)
axis = SigmaSet.subspace([[0.0], [1.0]])                  # the x2-axis {x1 = 0}
parabola = SigmaSet.zero_set(["x2 - x1^2"], ambient_dim=2)

x = [3.0, 4.0]
print("d((3,4), {0})        =", origin.distance(x))
print("d((3,4), {x1=0})     =", axis.distance(x))
print("d((0,1), parabola)   =", parabola.distance([0.0, 1.0]),
      " (true value sqrt(3)/2 =", np.sqrt(3) / 2, ")")
print("projection witness   =", parabola.project([0.0, 1.0]))

# geometric shells: shell k holds alpha 2^-(k+1) < d <= alpha 2^-k
sample = sample_shells(axis, alpha=0.5, n_shells=8, per_shell=64, seed=42)
print("\nshells (outer radius, points, d-range):")
for shell in sample.shells:
    print(f"  rho = {shell.rho:8.4g}   {shell.count:4d} points   "
          f"d in [{shell.distances.min():.3g}, {shell.distances.max():.3g}]")

# horn filtering around f^{-1}(0): for f = x1^2 and Sigma = {0} the horn
# ||f|| <= w d^2 is the wedge |x1| <= sqrt(w) ||x||, so the width selects a
# fraction of directions
ball_sample = sample_shells(origin, alpha=0.5, n_shells=8, per_shell=64, seed=42)
f = PolyMap.from_strings(["x1^2"], n=2)
narrow = horn_filter(ball_sample, f, 2, 0.1)
wide = horn_filter(ball_sample, f, 2, 10.0)
print(f"\nhorn of f = x1^2 at degree 2: width 0.1 keeps "
      f"{narrow.total_points()} of {ball_sample.total_points()} points, "
      f"width 10 keeps {wide.total_points()}")

# the filter is monotone in the width and always keeps zeros of f
kept = {tuple(p) for p in narrow.all_points()}
assert kept <= {tuple(p) for p in wide.all_points()}
print("monotone in the width: narrow horn is a subset of the wide one")
