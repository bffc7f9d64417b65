"""Expression parsing and evaluation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regulab import ExprError, ParseError, parse


def ev(src, *points, arity=None):
    e = parse(src, arity)
    X = np.array([list(p) for p in points], dtype=float)
    return e.eval_many(X)


def test_arithmetic_precedence():
    assert ev("2 + 3 * x1 ^ 2", [2.0])[0] == 14.0
    assert ev("(2 + 3) * x1", [2.0])[0] == 10.0
    assert ev("x1 - x2 - x3", [10.0, 3.0, 2.0])[0] == 5.0
    assert ev("x1 / x2 / x3", [12.0, 3.0, 2.0])[0] == 2.0


def test_unary_minus_binds_below_power():
    assert ev("-x1^2", [3.0])[0] == -9.0
    assert ev("(-x1)^2", [3.0])[0] == 9.0


def test_power_with_negative_base():
    assert ev("x1^3", [-2.0])[0] == -8.0


def test_functions():
    assert ev("abs(x1)", [-3.5])[0] == 3.5
    assert ev("sqrt(x1)", [4.0])[0] == 2.0
    assert ev("exp(x1)", [0.0])[0] == 1.0
    assert ev("min(x1, 2) + max(x1, 0)", [-3.0])[0] == -3.0
    assert ev("min(x1, 2) + max(x1, 0)", [5.0])[0] == 7.0


def test_conditional():
    e = parse("if(x1 > 0, x1, 0 - x1)", 1)
    out = e.eval_many(np.array([[-2.0], [0.0], [3.0]]))
    assert out.tolist() == [2.0, 0.0, 3.0]


def test_conditional_nested_odd_extension():
    e = parse("if(x1 > 0, exp(0 - 1/x1), if(x1 < 0, 0 - exp(1/x1), 0))", 1)
    out = e.eval_many(np.array([[1.0], [-1.0], [0.0]]))
    assert out[0] == pytest.approx(math.exp(-1.0))
    assert out[1] == pytest.approx(-math.exp(-1.0))
    assert out[2] == 0.0


def test_domain_errors_yield_nan():
    assert np.isnan(ev("sqrt(x1)", [-1.0])[0])
    assert np.isnan(ev("1 / x1", [0.0])[0]) or np.isinf(ev("1 / x1", [0.0])[0])


def test_parse_error():
    with pytest.raises(ParseError):
        parse("x1 +", 1)
    with pytest.raises(ParseError):
        parse("foo(x1)", 1)


def test_arity_check():
    with pytest.raises(ExprError):
        parse("x2", 1)
    e = parse("x1*x3 + x2", None)
    assert e.arity == 3


def test_eval_many_is_vectorized():
    e = parse("x1^2 + x2", 2)
    X = np.array([[1.0, 2.0], [3.0, 4.0], [0.0, 0.0]])
    assert e.eval_many(X).tolist() == [3.0, 13.0, 0.0]


@given(
    st.lists(st.floats(-10, 10), min_size=1, max_size=20),
    st.floats(-5, 5),
    st.floats(-5, 5),
)
@settings(max_examples=100, deadline=None)
def test_polynomial_matches_direct_eval(xs, a, b):
    e = parse("x1^3 + x1*x2 - x2", 2)
    X = np.array([[x, a] for x in xs])
    want = [x**3 + x * a - a for x in xs]
    got = e.eval_many(X)
    assert np.allclose(got, want, rtol=1e-12, atol=1e-12)
