"""Set-valued map models: forward/inverse evaluation on boxes."""

import math

import numpy as np
import pytest

import regulab as R
from regulab import (
    AnalysisBox,
    Inverse,
    SingleValued,
    forward_set,
    inverse_set,
    range_membership,
)

FOLD = 2.0 / (3.0 * math.sqrt(3.0))


def test_inverse_set_cube(cube_map, box1):
    S = inverse_set(cube_map, [0.008], box1)
    assert len(S) == 1
    assert S.points[0, 0] == pytest.approx(0.2, abs=1e-6)


def test_inverse_set_square_two_roots(square_map, box1):
    S = inverse_set(square_map, [4.0], box1)
    assert sorted(S.points[:, 0].tolist()) == pytest.approx([-2.0, 2.0], abs=1e-6)


def test_inverse_set_empty_fiber(square_map, box1):
    S = inverse_set(square_map, [-1.0], box1)
    assert S.is_empty


def test_inverse_set_fold_double_root(fold_map, box1):
    # at the fold value the cubic has a simple root and a double root
    S = inverse_set(fold_map, [FOLD], box1)
    roots = sorted(S.points[:, 0].tolist())
    assert len(roots) == 2
    assert roots[0] == pytest.approx(-1.0 / math.sqrt(3.0), abs=1e-4)
    assert roots[1] == pytest.approx(2.0 / math.sqrt(3.0), abs=1e-5)


def test_inverse_set_squaring(squaring_map):
    K = AnalysisBox(np.array([-2.0, -2.0]), np.array([2.0, 2.0]), 24)
    S = inverse_set(squaring_map, [1.0, 0.0], K)
    assert len(S) == 2
    xs = sorted(S.points[:, 0].tolist())
    assert xs == pytest.approx([-1.0, 1.0], abs=1e-6)
    assert np.max(np.abs(S.points[:, 1])) <= 1e-6


def test_inverse_set_squaring_origin(squaring_map):
    K = AnalysisBox(np.array([-2.0, -2.0]), np.array([2.0, 2.0]), 24)
    S = inverse_set(squaring_map, [0.0, 0.0], K)
    assert len(S) == 1
    assert np.linalg.norm(S.points[0]) <= 1e-5


def test_forward_set_single_valued(cube_map, ybox1):
    S = forward_set(cube_map, [1.5], ybox1)
    assert len(S) == 1
    assert S.points[0, 0] == pytest.approx(3.375)


def test_forward_set_of_inverse_is_fiber(square_map, box1):
    G = Inverse(square_map)
    S = forward_set(G, [2.25], box1)
    assert sorted(S.points[:, 0].tolist()) == pytest.approx([-1.5, 1.5], abs=1e-6)


def test_range_membership(square_map, box1):
    assert range_membership(square_map, [4.0], box1)
    assert not range_membership(square_map, [-1.0], box1)


def test_inverse_of_inverse_round_trip(cube_map, box1, ybox1):
    G = Inverse(cube_map)
    # preimage of x=0.2 under the inverse map is the y-value 0.008
    S = inverse_set(G, [0.2], ybox1)
    assert len(S) == 1
    assert S.points[0, 0] == pytest.approx(0.008, abs=1e-6)


def test_inverse_set_refinement_stable(fold_map, box1):
    """Root counts do not change when the seeding grid is refined."""
    y = [0.1]
    base = inverse_set(fold_map, y, box1)
    fine = inverse_set(fold_map, y, box1.with_resolution(box1.resolution * 2))
    assert len(base) == len(fine) == 3
    a = np.sort(base.points[:, 0])
    b = np.sort(fine.points[:, 0])
    assert np.allclose(a, b, atol=1e-6)


def test_callable_map_model(box1):
    F = SingleValued((), n=1, m=1, fn=lambda X: np.atleast_2d(X)[:, :1] * 2.0,
                     label="doubling")
    S = inverse_set(F, [1.0], box1)
    assert len(S) == 1
    assert S.points[0, 0] == pytest.approx(0.5, abs=1e-8)
