"""Jet-preserving perturbation families and analytic-arc probes.

The second relative Kuo condition quantifies over *all* realisations g of
the same relative r-jet.  For Sigma = {0} or a linear subspace a finite
family approximates that quantifier: every monomial of degree r+1 in the
coordinates normal to Sigma, attached to every codomain direction, satisfies
||h(x)|| <= d(x, Sigma)^{r+1} pointwise.

Arc probes evaluate quantities along a curve gamma(t) -> 0 and fit their
asymptotic order against d(gamma(t), Sigma); this is the standard way to
exhibit a failing direction explicitly.
"""

from kuokit import (ArcProbe, PolyMap, SigmaSet, arc_orders, check_certificate,
                    check_K_delta, check_K_tilde_delta, make_perturbation_family,
                    sample_shells)
from kuokit.conditions import kappa_field

origin = SigmaSet.origin(2)
sample = sample_shells(origin, alpha=0.5, n_shells=12, per_shell=256, seed=3)

f = PolyMap.from_strings(["x1^2"], n=2)
family = make_perturbation_family(f, origin, 2, eps_grid=[1.0])
print("family members for f = x1^2, r = 2:")
for label, g in family.members():
    print("  ", label, "->", g.to_strings())

v = check_K_delta(f, origin, 2, family, sample=sample)
print("\nK_delta over the family:", v.status)
v = check_K_tilde_delta(f, origin, 2, family, sample=sample)
print("K~_delta over the family:", v.status)

good = PolyMap.from_strings(["x1^2 + x2^2"])
good_family = make_perturbation_family(good, origin, 2, eps_grid=[1.0])
v = check_K_tilde_delta(good, origin, 2, good_family, sample=sample)
print(f"\nK~_delta for x1^2 + x2^2: {v.status} with delta_hat = {v.delta_hat:.3f}")

# the f-only certificate works for any Sigma kind (no family needed)
v = check_certificate(good, origin, 2, sample=sample)
print(f"certificate: {v.status}, fitted exponent {v.estimate.slope:.3f}, "
      f"delta_hat = {v.delta_hat:.3f}")

# arcs: along gamma(t) = (0, t) the differential of x1^2 dies identically
probe = ArcProbe.from_strings(["0", "t"])
(kappa_order,) = arc_orders(probe, [kappa_field(f)], origin)
print("\norder of kappa(df) along gamma(t) = (0, t):", kappa_order)

probe2 = ArcProbe.from_strings(["t", "t^(3/2)"])
(norm_order,) = arc_orders(probe2, [f.norm_batch], origin)
print("order of ||f|| along gamma(t) = (t, t^(3/2)):", round(norm_order, 3))
