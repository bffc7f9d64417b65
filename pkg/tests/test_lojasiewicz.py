"""Growth-inequality fitting between scalar functions on a box."""

import numpy as np
import pytest

import regulab as R
from regulab import (
    AnalysisBox,
    FixtureError,
    compute_mu,
    default_t_grid,
    fit_growth,
    fit_pair,
    verify_inequality,
)


@pytest.fixture(scope="module")
def K801():
    return AnalysisBox(np.array([-1.0]), np.array([1.0]), 801)


def test_abs_vs_square_power_growth(K801):
    profile, fit, verification = fit_pair("abs(x1)", "x1^2", K801)
    assert fit.dichotomy == "PowerGrowth"
    assert fit.alpha == pytest.approx(0.5, abs=0.03)
    assert fit.max_violation <= 0.0
    assert verification <= 0.0


def test_wrong_exponent_violates(K801):
    _, fit, _ = fit_pair("abs(x1)", "x1^2", K801)
    assert verify_inequality("abs(x1)", "x1^2", K801, fit.c, 1.0) > 0.0


def test_cube_pair_matches_subregularity_exponent(K801, cube_map, box1):
    """The growth exponent of |x| against |x|^3 equals the subregularity
    exponent of the cube map at the origin (both estimate the same 1/3)."""
    _, fit, _ = fit_pair("abs(x1)", "abs(x1)^3", K801)
    assert fit.dichotomy == "PowerGrowth"
    subreg = R.estimate_subregularity(cube_map, [0.0], box1)
    assert fit.alpha == pytest.approx(subreg.alpha, abs=0.05)
    assert fit.alpha == pytest.approx(1.0 / 3.0, abs=0.05)


def test_isolated_zero_dichotomy(K801):
    # psi is bounded away from zero on the box, so small sublevels are empty
    _, fit, _ = fit_pair("abs(x1)", "x1^2 + 1", K801)
    assert fit.dichotomy == "IsolatedZero"
    assert fit.c > 0.0
    assert fit.max_violation <= 0.0


def test_constant_zero_dichotomy(K801):
    # phi vanishes identically near the zero set of psi
    _, fit, _ = fit_pair("max(abs(x1) - 0.5, 0)", "abs(x1)", K801)
    assert fit.dichotomy == "ConstantZero"
    assert fit.max_violation <= 0.0


def test_negative_psi_rejected(K801):
    with pytest.raises(FixtureError):
        compute_mu("abs(x1)", "x1", K801, np.array([0.5, 1.0]))


def test_zero_inclusion_failure_detected():
    # psi vanishes at 0 but phi does not: no growth inequality can hold
    K = AnalysisBox(np.array([-1.0]), np.array([1.0]), 801)
    _, fit, _ = fit_pair("abs(x1) + 1", "abs(x1)", K)
    assert fit.dichotomy in ("Inconclusive", "NotHolder") or fit.max_violation > 0.0 \
        or fit.c >= 1.0  # a finite certificate must pay for phi(0) = 1


def test_mu_monotone_in_box_growth():
    """Enlarging the box can only increase the per-level suprema."""
    K_small = AnalysisBox(np.array([-0.5]), np.array([0.5]), 401)
    K_big = AnalysisBox(np.array([-1.0]), np.array([1.0]), 801)
    t_grid = np.array([0.25, 0.5, 1.0])
    mu_s = compute_mu("abs(x1)", "x1^2", K_small, t_grid)
    mu_b = compute_mu("abs(x1)", "x1^2", K_big, t_grid)
    for a, b, ok_a, ok_b in zip(mu_s.mu_values, mu_b.mu_values,
                                mu_s.nonempty, mu_b.nonempty):
        if ok_a and ok_b:
            assert b >= a - 1e-12


def test_profile_rows_match_grid(K801):
    t_grid = default_t_grid("abs(x1)", "x1^2", K801)
    profile = compute_mu("abs(x1)", "x1^2", K801, t_grid)
    assert len(profile.t_grid) == len(profile.mu_values) == len(profile.nonempty)
    rows = profile.to_rows()
    assert len(rows) == len(profile.t_grid)


def test_fit_growth_inconclusive_on_tiny_profile():
    from regulab import MuProfile
    prof = MuProfile(
        t_grid=np.array([0.5, 1.0]),
        mu_values=np.array([0.5, 1.0]),
        band=0.1,
        nonempty=np.array([True, True]),
        phi_max=1.0,
    )
    fit = fit_growth(prof)
    assert fit.dichotomy == "Inconclusive"
