"""Fitting growth inequalities c * psi^alpha >= phi between scalar functions.

Near the shared zero at the origin, |x| is bounded by c * (x^2)^(1/2): the
profile of per-level suprema follows a power law whose exponent the fitter
reads off the log-log plot. Swapping in the wrong exponent produces a
positive violation, and two degenerate regimes are classified separately:
psi bounded away from zero (IsolatedZero) and phi vanishing identically
near psi's zero set (ConstantZero).
"""

import numpy as np

from regulab import AnalysisBox, fit_pair, verify_inequality

K = AnalysisBox(np.array([-1.0]), np.array([1.0]), 801)

_, fit, verification = fit_pair("abs(x1)", "x1^2", K)
print(f"|x| vs x^2: {fit.dichotomy}, alpha={fit.alpha:.4f} (exact 1/2), "
      f"c={fit.c:.3f}, verification={verification:.2e}")

wrong = verify_inequality("abs(x1)", "x1^2", K, fit.c, 1.0)
print(f"forcing alpha=1 instead: violation = {wrong:+.4f} (> 0, as it must be)")

_, iso, _ = fit_pair("abs(x1)", "x1^2 + 1", K)
print(f"psi bounded below: {iso.dichotomy} with linear certificate c={iso.c:.2f}")

_, cz, _ = fit_pair("max(abs(x1) - 0.5, 0)", "abs(x1)", K)
print(f"phi flat near the zero set: {cz.dichotomy} with c={cz.c:.2f}")
