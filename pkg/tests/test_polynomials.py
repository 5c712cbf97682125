from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kuokit import InputError, Poly, parse_poly
from kuokit.polynomials import eval_arc_component, parse_arc_component


def test_parse_and_evaluate():
    p = parse_poly("x1^2 + x2^3", 2)
    assert p.evaluate([2.0, 3.0]) == 4.0 + 27.0
    q = parse_poly("2*x1*x2 - x2/2 + 1/4", 3)
    assert q.evaluate([1.0, 2.0, 5.0]) == 4.0 - 1.0 + 0.25


def test_parse_caret_and_double_star_agree():
    a = parse_poly("x1^3 - 2*x1^2*x2", 2)
    b = parse_poly("x1**3 - 2*x1**2*x2", 2)
    assert a == b


def test_parse_rejects_unknown_variable_and_bad_power():
    with pytest.raises(InputError):
        parse_poly("y + 1", 2)
    with pytest.raises(InputError):
        parse_poly("x3", 2)
    with pytest.raises(InputError):
        parse_poly("x1^(1/2)", 1)
    with pytest.raises(InputError):
        parse_poly("x1/x2", 2)


def test_exact_mode_keeps_fractions():
    p = parse_poly("x1^2/3 + x2", 2, exact=True)
    value = p.evaluate([Fraction(1, 2), Fraction(1, 3)])
    assert value == Fraction(1, 12) + Fraction(1, 3)
    assert isinstance(value, Fraction)


def test_arithmetic_and_derivative():
    x, y = Poly.variable(2, 0), Poly.variable(2, 1)
    p = (x + y) * (x - y)
    assert p == x * x - y * y
    assert p.diff(0) == x.scaled(2)
    assert p.diff(1) == y.scaled(-2)
    assert (x ** 3).diff(0) == (x * x).scaled(3)


def test_truncation_filters_by_total_degree():
    p = parse_poly("x1 + x1^2*x2 + x2^4", 2)
    assert p.truncated(3) == parse_poly("x1 + x1^2*x2", 2)
    assert p.truncated(3).truncated(3) == p.truncated(3)


def test_grlex_string_is_canonical():
    p = parse_poly("x2^2 + x1*x2 + x1^2 + x1", 2)
    assert p.to_string() == "x1^2 + x1*x2 + x2^2 + x1"


def test_compose_linear_rotation_preserves_values(rng):
    p = parse_poly("x1^2 - x2^3 + x1*x2", 2)
    theta = 0.7
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    q = p.compose_linear(R)
    for _ in range(16):
        y = rng.uniform(-1, 1, 2)
        assert q.evaluate(y) == pytest.approx(p.evaluate(R @ y), abs=1e-12)


def test_batch_evaluation_matches_pointwise(rng):
    p = parse_poly("x1^3*x2 - 0.5*x2^2 + x3", 3)
    pts = rng.uniform(-2, 2, (50, 3))
    batch = p.evaluate_batch(pts)
    single = np.array([p.evaluate(x) for x in pts])
    np.testing.assert_allclose(batch, single, rtol=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=-6, max_value=6), min_size=2, max_size=2),
       st.lists(st.integers(min_value=-6, max_value=6), min_size=2, max_size=2))
def test_exact_addition_is_linear_on_evaluation(coeffs_a, coeffs_b):
    a = Poly(2, {(1, 0): Fraction(coeffs_a[0]), (0, 2): Fraction(coeffs_a[1])}, exact=True)
    b = Poly(2, {(1, 0): Fraction(coeffs_b[0]), (2, 1): Fraction(coeffs_b[1])}, exact=True)
    x = [Fraction(3, 7), Fraction(-2, 5)]
    assert (a + b).evaluate(x) == a.evaluate(x) + b.evaluate(x)


def test_arc_component_parsing_and_eval():
    comp = parse_arc_component("t^2 - t^(5/2)")
    t = np.array([1.0, 0.25])
    np.testing.assert_allclose(eval_arc_component(comp, t),
                               t ** 2 - t ** 2.5, rtol=1e-14)
    assert parse_arc_component("0") == ()
    with pytest.raises(InputError):
        parse_arc_component("1 + t")  # constant term breaks gamma(0) = 0
    with pytest.raises(InputError):
        parse_arc_component("x1")
