"""A bounded map whose preimages run away.

f(x) = x^2/(1+x^2) for x >= 0 (odd elsewhere) squeezes the whole line into
(-1, 1). The preimage of y = 1 - 1/k is the single point sqrt(k-1), which
marches off to infinity as y approaches the edge of the range: no uniform
regularity estimate can survive on an unbounded slice. On a compact box the
subregularity estimate at y* = 0 is still perfectly well behaved.
"""

import math

import numpy as np

from regulab import AnalysisBox, dist_to_preimage, estimate_subregularity, load_fixture

fix = load_fixture("example-5.2-bounded")
F = fix.map_model()
wide = fix.box("wide")

print("preimage distances from x = 0:")
for k in (2, 5, 10, 17):
    y = 1.0 - 1.0 / k
    got = dist_to_preimage(F, [0.0], [y], wide)
    print(f"  y = 1 - 1/{k:<2d} = {y:.4f}  ->  dist = {got:.4f} "
          f"(exact sqrt({k}-1) = {math.sqrt(k - 1):.4f})")

fit = estimate_subregularity(F, [0.0], fix.box("x"))
print(f"\nsubregularity at y*=0 on {fix.box('x').lo.tolist()}..."
      f"{fix.box('x').hi.tolist()}: {fit.verdict}, alpha={fit.alpha:.3f}")
