"""Convex projections and distances to images/preimages."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import regulab as R
from regulab import (
    INF,
    AnalysisBox,
    Ball,
    Box,
    Inverse,
    Polyhedron,
    SingleValued,
    WholeSpace,
    dist_to_image,
    dist_to_preimage,
    project,
    project_many,
)

TOL = 1e-9


def make_sets(dim):
    rng = np.random.default_rng(7)
    A = rng.normal(size=(4, dim))
    x0 = rng.normal(size=dim)
    b = A @ x0 + 0.5  # x0 strictly feasible
    return [
        WholeSpace(dim),
        Box(-np.ones(dim), np.ones(dim)),
        Ball(np.zeros(dim), 1.5),
        Polyhedron(A, b),
    ]


def check_projection_properties(C, u, v, z_seed):
    pu = project(C, u, TOL)
    pv = project(C, v, TOL)
    # idempotence
    assert np.linalg.norm(project(C, pu, TOL) - pu) <= 10 * TOL
    # nonexpansiveness
    assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) + 4 * TOL
    # fixed point: a feasible point projects to itself
    z = project(C, z_seed, TOL)
    assert np.linalg.norm(project(C, z, TOL) - z) <= 10 * TOL
    # variational characterization against the feasible sample z
    lhs = float(np.dot(u - pu, z - pu))
    assert lhs <= TOL * (1.0 + np.linalg.norm(u - z))


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_projection_properties_random_battery(dim):
    rng = np.random.default_rng(20240817 + dim)
    for C in make_sets(dim):
        U = rng.normal(scale=3.0, size=(400, dim))
        V = rng.normal(scale=3.0, size=(400, dim))
        Z = rng.normal(scale=3.0, size=(400, dim))
        for u, v, z in zip(U, V, Z):
            check_projection_properties(C, u, v, z)


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=2))
@settings(max_examples=150, deadline=None)
def test_projection_box_closed_form(u):
    C = Box(np.array([-1.0, 0.0]), np.array([1.0, 2.0]))
    p = project(C, np.array(u))
    assert np.allclose(p, np.clip(u, C.lo, C.hi))


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=2))
@settings(max_examples=150, deadline=None)
def test_projection_ball_closed_form(u):
    C = Ball(np.zeros(2), 1.0)
    p = project(C, np.array(u))
    nu = np.linalg.norm(u)
    want = np.array(u) if nu <= 1.0 else np.array(u) / nu
    assert np.allclose(p, want, atol=1e-9)


def test_projection_named_examples():
    assert np.allclose(project(Box(np.zeros(2), np.ones(2)), [2.0, 0.5]), [1.0, 0.5])
    assert np.allclose(project(Ball(np.zeros(2), 1.0), [3.0, 4.0]), [0.6, 0.8])
    H = Polyhedron(np.array([[1.0, 1.0]]), np.array([1.0]))
    assert np.allclose(project(H, [1.0, 1.0]), [0.5, 0.5], atol=1e-8)


def test_project_many_matches_loop():
    C = Polyhedron(np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]),
                   np.array([1.0, 1.0, 1.0]))
    rng = np.random.default_rng(3)
    U = rng.normal(scale=2.0, size=(30, 2))
    P = project_many(C, U)
    for u, p in zip(U, P):
        assert np.allclose(p, project(C, u), atol=1e-8)


def test_dist_to_image_examples(cube_map, ybox1):
    assert dist_to_image(cube_map, [1.0], [2.0], ybox1) == pytest.approx(1.0)


def test_dist_to_image_empty_fiber_is_inf(square_map, box1):
    G = Inverse(square_map)
    # -1 has no square root, so x=-1 is outside dom G
    assert dist_to_image(G, [-1.0], [0.0], box1) == INF


def test_dist_to_preimage_cube(cube_map, box1):
    assert dist_to_preimage(cube_map, [0.0], [0.008], box1) == pytest.approx(0.2, abs=1e-6)


def test_dist_to_preimage_square(square_map, box1):
    assert dist_to_preimage(square_map, [0.0], [0.01], box1) == pytest.approx(0.1, abs=1e-6)


def test_dist_to_preimage_squaring_graph_point(squaring_map):
    K = AnalysisBox(np.array([-2.0, -2.0]), np.array([2.0, 2.0]), 24)
    assert dist_to_preimage(squaring_map, [1.0, 0.0], [1.0, 0.0], K) <= 1e-5
