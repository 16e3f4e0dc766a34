import math
from fractions import Fraction

import pytest

from djlaplace.bvp import (
    FUNCTIONAL,
    G_IS_U,
    G_IS_UY,
    POINTWISE,
    Constraint,
    ConstraintSet,
    build_setup,
    extract_functional,
    extract_pointwise,
    identify_pointwise,
    rationalize,
    solve_functional,
)
from djlaplace.demos import DEMOS
from djlaplace.djm import dj_iterate, laplace_operator
from djlaplace.errors import (
    InconsistentMatch,
    NoPattern,
    OverdeterminedConstant,
    UnknownInTarget,
    UnsupportedConfiguration,
)
from djlaplace.problem import BC, ProblemSpec
from djlaplace.x_expr import XExpr, diff_x, eval_x, parse_x, unknown
from djlaplace.y_series import Series, dy, substitute


def spec(name):
    return DEMOS[name].problem().spec


def total(p, K=20, side=None):
    setup = build_setup(p, K, side)
    return setup, dj_iterate(setup.u0, laplace_operator(K)).total


def pointwise_set(x0, values, d0=0):
    cs = ConstraintSet(POINTWISE, "xL", x0)
    for j, v in enumerate(values):
        cs.pointwise.append(Constraint(2 * j + 1, d0 + 2 * j, 1.0, 0.0, v))
    return cs


# --- setup -------------------------------------------------------------------


def test_setup_dirichlet_example():
    setup = build_setup(spec("ex1"), 20)
    assert setup.u0 == Series.from_terms(20, (0, XExpr.trig("sinh", 1)), (1, XExpr.atom(unknown(0))))
    assert setup.mode == POINTWISE
    assert setup.matching_side == "xL"
    assert setup.unknown_meaning == G_IS_UY
    assert setup.matching_bc.data == parse_x("sinh(pi)*cos(y)", "y")


def test_setup_neumann_example():
    setup = build_setup(spec("ex3"), 32)
    assert setup.u0 == Series.from_terms(32, (0, XExpr.atom(unknown(0))))
    assert setup.mode == FUNCTIONAL
    assert setup.matching_side == "yL"
    assert setup.unknown_meaning == G_IS_U


@pytest.mark.parametrize("name", sorted(DEMOS))
def test_setup_reproduces_y0_data(name):
    p = spec(name)
    u0 = build_setup(p, 10).u0
    y0 = p.bc("y0")
    trace = u0 if y0.kind == "dirichlet" else dy(u0)
    assert trace.coefficient(0) == y0.data


def test_all_zero_problem():
    p = ProblemSpec.build("pi", "pi", **{s: ("dirichlet", "0") for s in ("x0", "xL", "y0", "yL")})
    setup = build_setup(p, 10)
    assert setup.u0 == Series.from_terms(10, (1, XExpr.atom(unknown(0))))


def test_corner_conflict_rejected():
    p = ProblemSpec.build("pi", "pi", y0=("dirichlet", "1"), yL=("dirichlet", "0"), x0=("dirichlet", "0"),
                          xL=("dirichlet", "0"))
    with pytest.raises(UnsupportedConfiguration):
        build_setup(p, 8)


def test_y0_cannot_be_matching_side():
    with pytest.raises(UnsupportedConfiguration):
        build_setup(spec("ex1"), 8, "y0")


# --- pointwise extraction -------------------------------------------------------


def test_pointwise_example1_values_vanish():
    p = spec("ex1")
    _, s = total(p)
    cs = extract_pointwise(s, "xL", p)
    assert cs.orders == list(range(0, 20, 2))
    assert all(abs(v) < 1e-10 for v in cs.values)
    assert [c.power for c in cs.checks] == list(range(0, 21, 2))


def test_pointwise_example2_values_are_cosh_pi():
    p = spec("ex2")
    _, s = total(p)
    cs = extract_pointwise(s, "xL", p)
    for v in cs.values:
        assert v == pytest.approx(math.cosh(math.pi), rel=1e-12)


def test_pointwise_known_trace_gives_no_constraints():
    p = spec("ex1")
    s = Series.from_terms(6, (0, XExpr.trig("sinh", 1)), (2, XExpr.trig("sinh", 1, Fraction(-1, 2))),
                          (4, XExpr.trig("sinh", 1, Fraction(1, 24))), (6, XExpr.trig("sinh", 1, Fraction(-1, 720))))
    cs = extract_pointwise(s, "xL", p)
    assert cs.pointwise == []


def test_pointwise_inconsistent():
    p = ProblemSpec.build("pi", "pi", y0=("dirichlet", "sinh(x)"), yL=("dirichlet", "-sinh(x)"),
                          x0=("dirichlet", "0"), xL=("dirichlet", "2*sinh(pi)*cos(y)"))
    s = dj_iterate(Series.from_terms(12, (0, XExpr.trig("sinh", 1)), (1, XExpr.atom(unknown(0)))),
                   laplace_operator(12)).total
    with pytest.raises(InconsistentMatch):
        extract_pointwise(s, "xL", p)


# --- functional extraction --------------------------------------------------------


def test_functional_example3():
    p = spec("ex3")
    _, s = total(p, 32)
    cs = extract_functional(s, p)
    assert cs.h == XExpr.trig("cos", 2, -4)
    assert cs.h_order == 2
    assert len(cs.certificate) > 10
    assert all(c["ok"] for c in cs.certificate)


def test_functional_example4():
    p = spec("ex4")
    _, s = total(p)
    cs = extract_functional(s, p)
    assert cs.h == XExpr()
    assert cs.h_order == 2


def test_functional_wrong_data_fails_certificate():
    p = ProblemSpec.build("pi", "pi", y0=("neumann", "0"), yL=("neumann", "2*cos(2*x)*sinh(pi)"),
                          x0=("neumann", "0"), xL=("neumann", "0"))
    _, s = total(p, 20)
    with pytest.raises(InconsistentMatch):
        extract_functional(s, p)


def test_functional_known_trace_needs_no_constraint():
    p = spec("ex4")
    s = Series.from_terms(6, (1, XExpr.trig("cos", 1)))
    p2 = ProblemSpec(p.Lx, p.Ly, tuple((side, bc if side != "yL" else BC("neumann", XExpr.trig("cos", 1)))
                                       for side, bc in p.bcs))
    with pytest.raises(NoPattern):
        extract_functional(s, p2)


def test_functional_rejects_unknown_in_target():
    p = spec("ex4")
    bad = ProblemSpec(p.Lx, p.Ly, tuple((s, bc if s != "yL" else BC("neumann", XExpr.atom(unknown(0))))
                                        for s, bc in p.bcs))
    _, s = total(p)
    with pytest.raises(UnknownInTarget):
        extract_functional(s, bad)


# --- identification ----------------------------------------------------------------


def test_identify_all_zero():
    cands = identify_pointwise(pointwise_set(math.pi, [0.0] * 5))
    assert cands[0].expr == XExpr()


def test_identify_cosh():
    c = math.cosh(math.pi)
    cands = identify_pointwise(pointwise_set(math.pi, [c] * 4), hints={Fraction(1)})
    assert cands[0].expr == XExpr.trig("cosh", 1)


def test_identify_cos_from_manufactured_values():
    # values g^(2j)(x0) of g = cos(2 (x - x0)) computed by symbolic differentiation
    x0 = math.pi
    g = XExpr.trig("cos", 2)  # cos(2(x - pi)) == cos(2x)
    values = [float(eval_x(diff_x(g, 2 * j) if j else g, x0)) for j in range(4)]
    assert values == pytest.approx([1, -4, 16, -64])
    cands = identify_pointwise(pointwise_set(x0, values))
    assert XExpr.trig("cos", 2) in [c.expr for c in cands]


def test_identify_polynomial():
    # g = x^3 - x: g(1) = 0, g''(1) = 6, higher derivatives vanish (d0 = 0 at x0 = 1)
    cands = identify_pointwise(pointwise_set(1.0, [0.0, 6.0, 0.0, 0.0, 0.0]))
    exprs = [c.expr for c in cands]
    assert any(diff_x(e, 2) == parse_x("6*x") for e in exprs)


def test_identify_requires_four_values():
    with pytest.raises(NoPattern):
        identify_pointwise(pointwise_set(1.0, [1.0, 1.0, 1.0]))


def test_identify_irregular_values():
    with pytest.raises(NoPattern):
        identify_pointwise(pointwise_set(1.0, [1.0, 2.0, 3.0, 5.0]))


def test_rationalize():
    assert rationalize(0.75) == Fraction(3, 4)
    assert rationalize(math.pi) is None
    assert rationalize(1e-13) == 0


# --- integration constants --------------------------------------------------------


def functional_set(h, order=2):
    cs = ConstraintSet(FUNCTIONAL, "yL")
    cs.h, cs.h_order = h, order
    return cs


def test_solve_functional_example3():
    cand = solve_functional(functional_set(XExpr.trig("cos", 2, -4)), spec("ex3"), G_IS_U)
    assert cand.expr == XExpr.trig("cos", 2)
    assert [n for n, _ in cand.free_constants] == ["C0"]


def test_solve_functional_example4():
    cand = solve_functional(functional_set(XExpr()), spec("ex4"), G_IS_U)
    assert cand.expr == XExpr()
    assert [n for n, _ in cand.free_constants] == ["C0"]
    assert cand.with_constants({"C0": 3}) == XExpr.const(3)


def test_solve_functional_pinned_constant():
    p = ProblemSpec.build("pi", "pi", y0=("neumann", "0"), yL=("neumann", "0"), x0=("dirichlet", "5"),
                          xL=("neumann", "0"))
    cand = solve_functional(functional_set(XExpr()), p, G_IS_U)
    assert cand.expr == XExpr.const(5)
    assert cand.free_constants == ()


def test_solve_functional_overdetermined():
    p = ProblemSpec.build("pi", "pi", y0=("neumann", "0"), yL=("neumann", "0"), x0=("neumann", "0"),
                          xL=("neumann", "1"))
    with pytest.raises(OverdeterminedConstant):
        solve_functional(functional_set(XExpr()), p, G_IS_U)


def test_solve_functional_underdetermined():
    with pytest.raises(NoPattern):
        solve_functional(functional_set(XExpr(), order=4), spec("ex4"), G_IS_U)


def test_identified_g_closes_matched_identities():
    p = spec("ex3")
    _, s = total(p, 32)
    cs = extract_functional(s, p)
    g = solve_functional(cs, p, G_IS_U).with_constants({"C0": 2})
    closed = substitute(s, g)
    assert not closed.has_unknown
