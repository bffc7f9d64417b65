"""Shared fixtures and helpers for the test suite."""

import numpy as np
import pytest

import regulab as R


@pytest.fixture(scope="session")
def box1():
    """1-D analysis box [-2, 2] at resolution 64."""
    return R.AnalysisBox(np.array([-2.0]), np.array([2.0]), 64)


@pytest.fixture(scope="session")
def ybox1():
    """1-D value box [-8, 8] at resolution 33."""
    return R.AnalysisBox(np.array([-8.0]), np.array([8.0]), 33)


@pytest.fixture(scope="session")
def cube_map():
    return R.SingleValued(("x1^3",), n=1, m=1)


@pytest.fixture(scope="session")
def square_map():
    return R.SingleValued(("x1^2",), n=1, m=1)


@pytest.fixture(scope="session")
def fold_map():
    return R.SingleValued(("x1^3 - x1",), n=1, m=1)


@pytest.fixture(scope="session")
def squaring_map():
    """The complex-squaring map on the plane."""
    return R.SingleValued(("x1^2 - x2^2", "2*x1*x2"), n=2, m=2)
