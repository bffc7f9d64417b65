"""An open homeomorphism whose inverse defeats every Hölder exponent.

The odd extension of exp(-1/x) maps the line onto (-1, 1), is continuous,
strictly increasing, and open -- yet it is infinitely flat at the origin, so
its inverse moves points faster than any power law. The envelope fit watches
the log-log slope decay toward zero across shrinking dyadic windows and
declares NotHolder; the cross-check of the equivalent regularity conditions
comes out Inconsistent, which is exactly the point: the equivalences are a
theorem about semialgebraic maps, and this map is not semialgebraic.
"""

from regulab import Inverse, equivalence_audit, estimate_pseudo_holder, load_fixture
from regulab.regularity import test_openness as check_openness

fix = load_fixture("example-5.4-exp")
F = fix.map_model()
xbox, ybox = fix.box("x"), fix.box("y")

print(f"openness: {check_openness(F, xbox, ybox).verdict}")

fit = estimate_pseudo_holder(Inverse(F), [0.0], xbox, fix.parameters["eps"],
                             mode="lower")
print(f"inverse modulus: {fit.verdict}; window slopes -> "
      f"{tuple(round(s, 4) for s in fit.slopes[:4])} (decaying to 0)")

audit = equivalence_audit(F, xbox, ybox, [0.0], fix.parameters["eps"],
                          semialgebraic=False)
print(f"audit: {audit.consistency}")
print(f"  {audit.annotation}")
