"""Exact coefficient arithmetic: rationals, symbols, square roots."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from wavenf.algebra.coefficients import CoefficientExpr, parse_coefficient
from wavenf.errors import AlgebraError, ParseError

sym = CoefficientExpr.symbol
rational = CoefficientExpr.from_rational

fractions = st.fractions(
    min_value=-50, max_value=50, max_denominator=12
)


@given(fractions, fractions)
def test_rational_arithmetic_matches_fraction(x: Fraction, y: Fraction) -> None:
    cx, cy = rational(x), rational(y)
    assert (cx + cy).as_fraction() == x + y
    assert (cx - cy).as_fraction() == x - y
    assert (cx * cy).as_fraction() == x * y
    if y != 0:
        assert (cx / cy).as_fraction() == x / y


@given(fractions)
def test_rational_roundtrip(x: Fraction) -> None:
    expr = rational(x)
    assert expr.is_rational
    assert expr.as_fraction() == x
    assert parse_coefficient(str(x)) == expr


def test_symbolic_quotient_equality_is_semantic() -> None:
    a, b = sym("a"), sym("b")
    assert (a * a - b * b) / (a - b) == a + b
    assert (a + b) ** 2 == a * a + 2 * a * b + b * b
    assert not a == b


def test_square_roots_of_perfect_squares_reduce() -> None:
    assert CoefficientExpr.sqrt(4) == rational(Fraction(2))
    assert CoefficientExpr.sqrt(Fraction(9, 16)) == rational(Fraction(3, 4))


def test_square_root_symbols_square_back() -> None:
    s2 = CoefficientExpr.sqrt(2)
    assert s2 * s2 == rational(Fraction(2))
    a = sym("a")
    sa = CoefficientExpr.sqrt(a)
    assert sa * sa == a
    assert sa**4 == a * a


def test_distinct_square_roots_do_not_merge() -> None:
    s2, s3, s6 = (CoefficientExpr.sqrt(n) for n in (2, 3, 6))
    assert not s2 * s3 == s6


def test_evaluate_substitutes_parameters() -> None:
    a, b = sym("a"), sym("b")
    assert (a / b).evaluate({"a": 6.0, "b": 2.0}) == pytest.approx(3.0)
    got = (CoefficientExpr.sqrt(a) * CoefficientExpr.sqrt(2)).evaluate({"a": 8.0})
    assert got == pytest.approx(4.0)


def test_evaluate_requires_bindings() -> None:
    with pytest.raises(AlgebraError):
        sym("a").evaluate({})


def test_zero_denominator_raises() -> None:
    a, b = sym("a"), sym("b")
    with pytest.raises(AlgebraError):
        a / (b - b)


def test_instances_are_unhashable_by_design() -> None:
    with pytest.raises(TypeError):
        hash(sym("a"))


def test_parse_rejects_garbage() -> None:
    with pytest.raises(ParseError):
        parse_coefficient("1//4")


def test_is_zero_detects_cancellation() -> None:
    a = sym("a")
    assert (a - a).is_zero
    assert not a.is_zero
    assert (a * 0).is_zero
