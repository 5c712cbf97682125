"""The canonical condition checks on three benchmark germs.

* f = x1^2 + x2^2 (Sigma = {0}, r = 2): the model positive case.  The
  gradient has norm 2 d(x) everywhere, so every form of the relative Kuo
  condition holds with an explicit constant.
* f = x1^2 in R^2 (Sigma = {0}, r = 2): the model negative case.  Along the
  x2-axis both kappa(df) and ||f|| vanish while d > 0, so every form fails;
  the falsification search pins a witness arbitrarily close to the axis.
* f = x1^3 relative to Sigma = {x1 = 0} with r = 3: a genuinely relative
  positive case, kappa(df) = 3 d^2.
"""

import numpy as np

from kuokit import (PolyMap, SigmaSet, check_dual4, check_gram3, check_K,
                    check_K_tilde, check_KZ, sample_shells)

origin = SigmaSet.origin(2)
sample = sample_shells(origin, alpha=0.5, n_shells=12, per_shell=512, seed=1)

QUARTET = (("K      ", check_K), ("K~     ", check_K_tilde),
           ("gram3  ", check_gram3), ("dual4  ", check_dual4))


def show(f, sigma, r, sample):
    print(f"\nf = {f.to_strings()}, Sigma = {sigma.kind}, r = {r}")
    for name, check in QUARTET:
        v = check(f, sigma, r, sample=sample)
        extra = ""
        if v.witnesses and v.status == "fails":
            w = np.asarray(v.witnesses[0]["point"])
            extra = f"  witness direction |x1|/||x|| = {abs(w[0]) / np.linalg.norm(w):.1e}"
        print(f"  {name} {v.status:12s} margin={v.margin:.4g} "
              f"slope={v.estimate.slope:.3f}{extra}")


show(PolyMap.from_strings(["x1^2 + x2^2"]), origin, 2, sample)
show(PolyMap.from_strings(["x1^2"], n=2), origin, 2, sample)

axis = SigmaSet.subspace([[0.0], [1.0]])
axis_sample = sample_shells(axis, alpha=0.5, n_shells=12, per_shell=512, seed=1)
show(PolyMap.from_strings(["x1^3"], n=2), axis, 3, axis_sample)

# the divergence form in one variable: x^2 at r=2 diverges like 1/d,
# x^3 at r=2 is pinned at a bounded ratio
line = SigmaSet.origin(1)
line_sample = sample_shells(line, alpha=0.5, n_shells=12, per_shell=256, seed=2)
for text in ("x1^2", "x1^3"):
    v = check_KZ(PolyMap.from_strings([text]), line, 2, sample=line_sample)
    print(f"\nKZ for f = {text}, r = 2: {v.status} "
          f"(ratio slope {v.estimate.slope:+.3f})")
