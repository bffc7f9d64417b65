"""The complex-squaring map as a parametric equation.

f(x1, x2) = (x1^2 - x2^2, 2 x1 x2) doubles angles and squares radii: it is
open, every nonzero value has exactly two preimages, and distances obey a
square-root modulus. We sweep the parametric problem f(x) + p = 0 over a
grid of p values and check cardinality, lower semicontinuity, and the fitted
exponent of the solution map at p = 0.
"""

from regulab import load_fixture, solution_set, sweep_solution_map
from regulab.regularity import test_openness as check_openness

fix = load_fixture("example-5.3-squaring")
P = fix.vi_problem()
ubox = fix.box("u")

rep = check_openness(P.f, fix.box("x"), fix.box("y"))
print(f"openness: {rep.verdict}")

sweep = sweep_solution_map(P, fix.parameters["p_grid"], ubox,
                           anchor=fix.parameters["anchor"])
print(f"sweep over {len(sweep.p_grid)} parameters: "
      f"cardinalities={sorted(set(sweep.cardinalities))}, "
      f"max={sweep.max_cardinality}, lsc={sweep.lsc_verdict}")

S0 = solution_set(P, fix.parameters["p_zero"], ubox)
print(f"at p = 0 the two branches merge: #solutions = {len(S0)}")

fit = sweep.holder_fit
print(f"solution-map modulus at p = 0: {fit.verdict}, alpha={fit.alpha:.4f} "
      f"(exact 1/2)")
