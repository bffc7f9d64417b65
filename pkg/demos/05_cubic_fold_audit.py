"""A fold: where solution branches merge and vanish.

x^3 - x has a local max of +2/(3*sqrt(3)) and a local min of the same
magnitude. Sweeping the parametric equation x^3 - x + p = 0 through that
value, the solution count jumps 1 -> 3 -> 1, and the middle branch dies at
the fold: the solution map is not lower semicontinuous, the map is not open,
and no Hölder modulus of metric regularity exists there. The audit confirms
that all four equivalent conditions fail together (all-negative is still
consistent).
"""

from regulab import load_fixture, vi_equivalence_audit
from regulab.fixtures import FOLD_VALUE

fix = load_fixture("cubic-fold")
P = fix.vi_problem()

audit = vi_equivalence_audit(
    P, fix.box("u"), fix.box("y"), fix.parameters["p_grid"],
    eps=fix.parameters["eps"], ystar=fix.parameters["ystar"],
    dom_locally_closed=True,
)

sw = audit.sweep
print(f"fold value: {FOLD_VALUE:.6f}")
print(f"cardinalities along the sweep: {list(sw.cardinalities)}")
print(f"lsc: {sw.lsc_verdict}; witness p = {sw.lsc_witness['p']}")
print(f"openness: {audit.openness.verdict}")
print(f"metric regularity: {audit.metric_regularity.verdict}")
print(f"pseudo-Hölder (lower/full): {audit.pseudo_holder_lower.verdict}/"
      f"{audit.pseudo_holder_full.verdict}")
print(f"audit: {audit.consistency} (all four conditions negative together)")
