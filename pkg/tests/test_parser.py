from fractions import Fraction

import pytest

from djlaplace.errors import ExprSyntaxError, UnsupportedForm
from djlaplace.parser import parse_bivariate, parse_univariate
from djlaplace.x_expr import XExpr, parse_x, power, render, unknown


@pytest.mark.parametrize(
    "text, expected",
    [
        ("3/4*x^2 - 0.5*x", "-1/2*x + 3/4*x^2"),
        ("(x + 1)^2", "1 + 2*x + x^2"),
        ("sin(x - pi)", "-sin(x)"),
        ("sin(x + pi/2)", "cos(x)"),
        ("cosh(x + 1)", "cosh(1)*cosh(x) + sinh(1)*sinh(x)"),
        ("  2 * ( sinh( x ) )  ", "2*sinh(x)"),
        ("-(-x)", "x"),
        ("pi^2*x", "pi^2*x"),
        ("sin(x/2)", "sin(1/2*x)"),
        ("1.25", "5/4"),
    ],
)
def test_valid_expressions(text, expected):
    assert render(parse_x(text)) == expected


def test_decimal_is_exact():
    ((_, atom), coef), = parse_x("0.1*x").terms
    assert coef == Fraction(1, 10)
    assert atom == power(1)


@pytest.mark.parametrize(
    "text, pos",
    [("1 +* 2", 3), ("exp(x)", 0), ("sin(x", 5), ("2 3", 2), ("", 0)],
)
def test_syntax_errors_carry_position(text, pos):
    with pytest.raises(ExprSyntaxError) as info:
        parse_x(text)
    assert info.value.pos == pos
    assert isinstance(info.value, SyntaxError)


@pytest.mark.parametrize("text", ["sin(x^2)", "x*sin(x)", "x/x", "x^-1", "sin(pi*x)", "sinh(x)*cosh(x)", "x^(1/2)"])
def test_unsupported_forms(text):
    with pytest.raises(UnsupportedForm):
        parse_x(text)


def test_variable_is_contextual():
    with pytest.raises(ExprSyntaxError):
        parse_x("sin(y)", "x")
    assert parse_x("sin(y)", "y") == XExpr.trig("sin", 1)


def test_unknown_forms():
    e = parse_univariate("g''(x) - 2*g(x)")
    assert e == XExpr.atom(unknown(2)) - XExpr.atom(unknown(0), 2)
    assert parse_univariate("g^(4)(x)") == XExpr.atom(unknown(4))
    with pytest.raises(ExprSyntaxError):
        parse_univariate("g(x)", allow_unknown=False)


def test_bivariate_with_free_constant():
    terms, free = parse_bivariate("cos(2*x)*cosh(2*y) + C0")
    assert free == {"C0": 1}
    assert len(terms) == 1


def test_bivariate_allows_one_atom_per_variable():
    terms, _ = parse_bivariate("x*y + sinh(x)*cos(y)")
    assert len(terms) == 2
    with pytest.raises(UnsupportedForm):
        parse_bivariate("sin(x)*cos(x)*cos(y)")
