"""Variational inequalities via the normal-map reformulation."""

import math

import numpy as np
import pytest

import regulab as R
from regulab import (
    INF,
    AnalysisBox,
    Ball,
    Box,
    FixtureError,
    Polyhedron,
    SingleValued,
    VIProblem,
    WholeSpace,
    brute_force_solutions,
    normal_map,
    normal_map_eval,
    solution_set,
    solve_normal_equation,
    sweep_solution_map,
    vi_residual,
)

FOLD = 2.0 / (3.0 * math.sqrt(3.0))


@pytest.fixture(scope="module")
def lcp():
    """Identity map over the half-line x >= 0."""
    f = SingleValued(("x1",), n=1, m=1)
    return VIProblem(f, Polyhedron(np.array([[-1.0]]), np.array([0.0])))


@pytest.fixture(scope="module")
def fold_vi(fold_map):
    return VIProblem(fold_map, WholeSpace(1))


@pytest.fixture(scope="module")
def squaring_vi(squaring_map):
    return VIProblem(squaring_map, WholeSpace(2))


@pytest.fixture(scope="module")
def ubox():
    return AnalysisBox(np.array([-3.0]), np.array([3.0]), 64)


def test_viproblem_dimension_check():
    f = SingleValued(("x1", "x2"), n=2, m=2)
    with pytest.raises(FixtureError):
        VIProblem(f, Box(np.zeros(1), np.ones(1)))


def test_normal_map_whole_space_is_f(fold_vi):
    NM = normal_map(fold_vi)
    u = np.array([0.7])
    assert np.allclose(normal_map_eval(fold_vi, u), fold_vi.f.eval_many(u[None, :])[0])
    assert NM.n == NM.m == 1


def test_normal_map_lcp_identity(lcp):
    # f = identity makes the normal map the identity on all of R
    assert normal_map_eval(lcp, np.array([-1.0]))[0] == pytest.approx(-1.0)
    assert normal_map_eval(lcp, np.array([2.0]))[0] == pytest.approx(2.0)


def test_lcp_solutions(lcp, ubox):
    S1 = solution_set(lcp, [1.0], ubox)
    assert len(S1) == 1 and S1.points[0, 0] == pytest.approx(0.0, abs=1e-6)
    S2 = solution_set(lcp, [-1.0], ubox)
    assert len(S2) == 1 and S2.points[0, 0] == pytest.approx(1.0, abs=1e-6)


def test_solve_normal_equation_matches_projection(lcp, ubox):
    roots = solve_normal_equation(lcp, [1.0], ubox)
    assert len(roots) == 1
    assert roots.points[0, 0] == pytest.approx(-1.0, abs=1e-6)


def test_vi_residual_solution_is_zero(lcp, ubox):
    assert vi_residual(lcp, [1.0], np.array([0.0])) <= 1e-6


def test_vi_residual_nonsolution_positive(lcp):
    # at x=1 with p=1, moving toward x'=0 improves: residual 2
    assert vi_residual(lcp, [1.0], np.array([1.0])) == pytest.approx(2.0, abs=1e-6)


def test_vi_residual_infeasible_is_inf(lcp):
    assert vi_residual(lcp, [1.0], np.array([-1.0])) == INF


def test_round_trip_solutions_solve_normal_equation(fold_vi, lcp, squaring_vi):
    """Every computed solution x maps back to a normal-equation root at
    u = x - f(x) - p, i.e. ||NM(u) + p|| stays within solver tolerance."""
    tol = 1e-7
    cases = [
        (lcp, [1.0], AnalysisBox(np.array([-3.0]), np.array([3.0]), 64)),
        (lcp, [-2.0], AnalysisBox(np.array([-3.0]), np.array([3.0]), 64)),
        (fold_vi, [FOLD], AnalysisBox(np.array([-2.0]), np.array([2.0]), 64)),
        (fold_vi, [0.1], AnalysisBox(np.array([-2.0]), np.array([2.0]), 64)),
        (squaring_vi, [-1.0, 0.0],
         AnalysisBox(np.array([-2.0, -2.0]), np.array([2.0, 2.0]), 48)),
    ]
    for P, p, box in cases:
        S = solution_set(P, p, box, tol)
        assert not S.is_empty
        for x in S.points:
            fx = P.f.eval_many(x[None, :])[0]
            u = x - fx - np.asarray(p)
            assert np.linalg.norm(normal_map_eval(P, u) + np.asarray(p)) <= 10 * tol
            assert vi_residual(P, p, x) <= 10 * tol


def test_brute_force_matches_solution_set(fold_vi, lcp):
    box = AnalysisBox(np.array([-2.0]), np.array([2.0]), 64)
    for P, p, b in [(fold_vi, [0.1], box), (fold_vi, [-0.5], box),
                    (lcp, [1.0], AnalysisBox(np.array([-3.0]), np.array([3.0]), 64)),
                    (lcp, [-1.5], AnalysisBox(np.array([-3.0]), np.array([3.0]), 64))]:
        S = solution_set(P, p, b)
        scan = b.with_resolution(8 * b.resolution)
        B = brute_force_solutions(P, p, scan)
        step = float(np.max(scan.step))
        assert not B.is_empty
        # mutual coverage within one scan-grid step
        assert float(np.max(B.dist_many(S.points))) <= step + 1e-6
        assert float(np.max(S.dist_many(B.points))) <= step + 1e-6


def test_brute_force_rejects_multidim(squaring_vi):
    box = AnalysisBox(np.array([-2.0, -2.0]), np.array([2.0, 2.0]), 16)
    with pytest.raises(FixtureError):
        brute_force_solutions(squaring_vi, [0.0, 0.0], box)


def test_fold_sweep_detects_cardinality_jump_and_lsc_failure(fold_vi):
    box = AnalysisBox(np.array([-2.0]), np.array([2.0]), 64)
    p_grid = [[round(-0.6 + 0.1 * k, 10)] for k in range(13)]
    p_grid.append([FOLD])
    p_grid.sort()
    rep = sweep_solution_map(fold_vi, p_grid, box, eps=0.5)
    assert rep.max_cardinality == 3
    assert rep.lsc_verdict == "NotLSC"
    assert rep.lsc_witness is not None
    # the witness parameter sits at a fold of the cubic
    assert abs(abs(rep.lsc_witness["p"][0]) - FOLD) <= 1e-6


def test_lcp_sweep_is_singleton_and_lsc(lcp):
    box = AnalysisBox(np.array([-3.0]), np.array([3.0]), 64)
    p_grid = [[round(-2.0 + 0.25 * k, 10)] for k in range(17)]
    rep = sweep_solution_map(lcp, p_grid, box)
    assert rep.max_cardinality == 1
    assert all(c == 1 for c in rep.cardinalities)
    assert rep.lsc_verdict == "LSC"
    assert rep.holder_fit.verdict == "Holder"
    assert rep.holder_fit.alpha == pytest.approx(1.0, abs=0.05)


def test_sweep_cardinality_stable_under_refinement(squaring_vi, lcp):
    box2 = AnalysisBox(np.array([-2.0, -2.0]), np.array([2.0, 2.0]), 24)
    p = [[0.5, 0.5], [-1.0, 0.0], [0.0, 1.0]]
    cards = []
    for factor in (1, 2):
        b = box2.with_resolution(box2.resolution * factor)
        rep = sweep_solution_map(squaring_vi, p, b, eps=1.0, anchor=[0.0, 0.0])
        cards.append(rep.max_cardinality)
    assert cards[0] == cards[1] == 2


def test_ball_constrained_vi():
    # f(x) = x - 2 on C = [-1, 1]: the VI solution pins at the boundary 1
    f = SingleValued(("x1 - 2",), n=1, m=1)
    P = VIProblem(f, Ball(np.zeros(1), 1.0))
    box = AnalysisBox(np.array([-4.0]), np.array([4.0]), 64)
    S = solution_set(P, [0.0], box)
    assert len(S) == 1
    assert S.points[0, 0] == pytest.approx(1.0, abs=1e-6)
    assert vi_residual(P, [0.0], S.points[0]) <= 1e-6
