from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from djlaplace.demos import DEMOS
from djlaplace.djm import (
    ComponentList,
    Operator,
    dj_iterate,
    k_term_sum,
    laplace_operator,
    linear_fast_path,
    telescoping_check,
)
from djlaplace.bvp import build_setup
from djlaplace.parser import parse_univariate
from djlaplace.x_expr import XExpr, unknown
from djlaplace.y_series import Series, combine

from strategies import exprs

# u0..u3 as printed for the four worked examples, in the expression grammar
PRINTED = {
    "ex1": [
        {0: "sinh(x)", 1: "g(x)"},
        {2: "-1/2*sinh(x)", 3: "-1/6*g''(x)"},
        {4: "1/24*sinh(x)", 5: "1/120*g^(4)(x)"},
        {6: "-1/720*sinh(x)", 7: "-1/5040*g^(6)(x)"},
    ],
    "ex2": [
        {1: "g(x)"},
        {3: "-1/6*g''(x)"},
        {5: "1/120*g^(4)(x)"},
        {7: "-1/5040*g^(6)(x)"},
    ],
    "ex3": [
        {0: "g(x)"},
        {2: "-1/2*g''(x)"},
        {4: "1/24*g^(4)(x)"},
        {6: "-1/720*g^(6)(x)"},
    ],
    "ex4": [
        {0: "g(x)", 1: "cos(x)"},
        {2: "-1/2*g''(x)", 3: "1/6*cos(x)"},
        {4: "1/24*g^(4)(x)", 5: "1/120*cos(x)"},
        {6: "-1/720*g^(6)(x)", 7: "1/5040*cos(x)"},
    ],
}


def components(name, K=None):
    demo = DEMOS[name]
    K = K or demo.K
    setup = build_setup(demo.problem().spec, K)
    return dj_iterate(setup.u0, laplace_operator(K))


@pytest.mark.parametrize("name", sorted(PRINTED))
def test_components_match_printed(name):
    comps = components(name)
    for m, printed in enumerate(PRINTED[name]):
        expected = Series(comps[m].order, {k: parse_univariate(t) for k, t in printed.items()})
        assert comps[m] == expected, f"{name} u_{m}"


def test_operator_examples():
    N = laplace_operator(10)
    u0 = Series.from_terms(10, (0, XExpr.trig("sinh", 1)), (1, XExpr.atom(unknown(0))))
    assert N(u0) == Series(10, {2: parse_univariate("-1/2*sinh(x)"), 3: parse_univariate("-1/6*g''(x)")})
    assert N(Series.zero(10)).is_zero()
    assert N(Series.from_terms(10, (1, XExpr.atom(unknown(0))))) == Series.from_terms(
        10, (3, XExpr.atom(unknown(2), Fraction(-1, 6)))
    )


def test_zero_start_stops_immediately():
    c = dj_iterate(Series.zero(8), laplace_operator(8))
    assert len(c) == 1
    assert c[0].is_zero()


def test_component_count_bound():
    for K in (4, 7, 20):
        u0 = Series.from_terms(K, (0, XExpr.trig("cos", 1)), (1, XExpr.atom(unknown(0))))
        c = dj_iterate(u0, laplace_operator(K))
        assert len(c) <= -(-K // 2) + 1


def test_each_component_raises_exponent_by_two():
    c = components("ex4")
    lows = [comp.exponents[0] for comp in c.components]
    assert all(b - a == 2 for a, b in zip(lows, lows[1:]))


def test_max_components_caps_iteration():
    c = dj_iterate(components("ex1")[0], laplace_operator(20), max_components=3)
    assert len(c) == 3
    with pytest.raises(ValueError):
        dj_iterate(Series.zero(3), laplace_operator(3), max_components=0)


def test_k_term_sums():
    c = components("ex1")
    assert k_term_sum(c, 1) == c[0]
    two = Series(
        c[0].order,
        {0: parse_univariate("sinh(x)"), 1: parse_univariate("g(x)"), 2: parse_univariate("-1/2*sinh(x)"),
         3: parse_univariate("-1/6*g''(x)")},
    )
    assert k_term_sum(c, 2) == two
    direct = c[0]
    for comp in c.components[1:]:
        direct = combine(direct, comp)
    assert k_term_sum(c, len(c)) == direct
    for k in range(2, len(c) + 1):
        assert combine(k_term_sum(c, k), k_term_sum(c, k - 1), 1, -1) == c[k - 1]
    with pytest.raises(IndexError):
        k_term_sum(c, len(c) + 1)
    with pytest.raises(IndexError):
        k_term_sum(c, 0)


@pytest.mark.parametrize("name", sorted(DEMOS))
def test_telescoping_on_examples(name):
    c = components(name)
    assert telescoping_check(c, laplace_operator(c[0].order))


def test_telescoping_detects_corruption():
    c = components("ex1")
    bad = list(c.components)
    bad[2] = combine(bad[2], Series.from_terms(bad[2].order, (4, XExpr.const(1))))
    sums = [bad[0]]
    for comp in bad[1:]:
        sums.append(combine(sums[-1], comp))
    assert not telescoping_check(ComponentList(tuple(bad), tuple(sums)), laplace_operator(20))


def test_telescoping_needs_two_components():
    with pytest.raises(ValueError):
        telescoping_check(dj_iterate(Series.zero(4), laplace_operator(4)), laplace_operator(4))


@pytest.mark.parametrize("name", sorted(DEMOS))
def test_fast_path_equivalence(name):
    c = components(name)
    fast = linear_fast_path(c[0], laplace_operator(c[0].order), len(c))
    assert tuple(fast) == c.components


@settings(max_examples=30, deadline=None)
@given(exprs(max_terms=3), exprs(max_terms=3), st.integers(2, 12))
def test_random_telescoping(a, b, K):
    u0 = Series.from_terms(K, (0, a + XExpr.atom(unknown(0))), (1, b))
    c = dj_iterate(u0, laplace_operator(K))
    if len(c) >= 2:
        assert telescoping_check(c, laplace_operator(K))


def test_general_recurrence_with_nonlinear_operator():
    # N(u) = -int int (u_xx) dy dy + (fixed source), affine: differences still telescope
    base = laplace_operator(8)
    src = Series.from_terms(8, (2, XExpr.trig("cos", 1)))
    N = Operator(lambda s: combine(base(s), src), linear=False, name="affine")
    c = dj_iterate(Series.from_terms(8, (0, XExpr.trig("sin", 1))), N)
    assert telescoping_check(c, N)
    assert c[1] == N(c[0])
