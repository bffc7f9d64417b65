"""How fast does the inverse of x -> x^d spread points near the origin?

The fiber map y -> {y^(1/d)} is Hölder continuous with exponent exactly 1/d:
halving y moves the root by a factor 2^(-1/d). We estimate that exponent
numerically from paired distance samples and watch it land on 1/3 and 1/5.
"""

import numpy as np

from regulab import AnalysisBox, Inverse, SingleValued, estimate_pseudo_holder

K = AnalysisBox(np.array([-2.0]), np.array([2.0]), 64)

for d in (3, 5):
    F = SingleValued((f"x1^{d}",), n=1, m=1)
    fit = estimate_pseudo_holder(Inverse(F), [0.0], K, eps=1.0, mode="lower")
    print(f"x^{d}: verdict={fit.verdict:8s} alpha={fit.alpha:.4f} "
          f"(exact 1/{d} = {1.0 / d:.4f})  c={fit.c:.3f}")
