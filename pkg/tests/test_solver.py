import json
import math
from dataclasses import replace

import numpy as np
import pytest

from djlaplace.closed_form import ClosedForm
from djlaplace.demos import DEMOS
from djlaplace.errors import DJLaplaceError, MissingReference
from djlaplace.manufactured import boundary_conditions, manufactured_problem
from djlaplace.problem import Length, ProblemFile, ProblemSpec, SolverOptions, transpose
from djlaplace.solver import SCHEMA, SEMI_ANALYTIC, VERIFIED, convergence, solve, transpose_report
from djlaplace.y_series import eval_grid, substitute


def demo_report(name, **kw):
    d = DEMOS[name]
    return solve(d.problem(), expected=d.expected, **kw)


@pytest.mark.parametrize(
    "name, g, closed",
    [
        ("ex1", "0", "sinh(x)*cos(y)"),
        ("ex2", "cosh(x)", "cosh(x)*sin(y)"),
        ("ex3", "cos(2*x) + C0", "cos(2*x)*cosh(2*y) + C0"),
        ("ex4", "C0", "cos(x)*sinh(y) + C0"),
    ],
)
def test_demo_reports(name, g, closed):
    r = demo_report(name)
    d = r.to_dict()
    assert r.verdict == VERIFIED and r.exit_code == 0
    assert d["schema"] == SCHEMA
    assert d["g"]["expr"] == g
    assert d["solution"]["closed_form"] == closed
    assert d["expected"]["match"] is True
    assert d["expected"]["grid_sup_error"] <= 1e-8
    assert d["telescoping"] is True and d["linear_cross_check"] is True


def test_report_is_json_with_stable_key_order():
    a = json.dumps(demo_report("ex3").to_dict())
    b = json.dumps(demo_report("ex3").to_dict())
    assert a == b
    keys = list(json.loads(a))
    assert keys[:3] == ["schema", "generator", "problem"]


def test_free_constant_is_flagged():
    d = demo_report("ex4").to_dict()
    assert [c["name"] for c in d["g"]["free_constants"]] == ["C0"]
    assert d["verification"]["free_constant_values"] == [{"C0": 0}, {"C0": 7}]


def test_k_term_report():
    r = demo_report("ex1", k_terms=3)
    d = r.to_dict()
    assert d["solver"]["k_terms"] == 3
    assert r.verdict == VERIFIED
    assert "3-term" in d["message"]
    assert d["solution"]["closed_form"] is None
    assert len(d["solution"]["series"]) == 3
    with pytest.raises(DJLaplaceError):
        demo_report("ex1", k_terms=99)


@pytest.mark.parametrize("name", sorted(DEMOS))
def test_transposition_invariance(name):
    pf = DEMOS[name].problem()
    tpf = replace(pf, spec=transpose(pf.spec))
    via_transpose = solve(pf, orientation="transposed")
    direct = solve(tpf, orientation="native")
    assert transpose_report(via_transpose, tpf).to_dict() == direct.to_dict()
    assert via_transpose.closed_form == direct.closed_form.transpose()


def test_auto_orientation_falls_back_to_transposed():
    # the data y = 1 on yL cannot be split by powers of Ly = 1, so only the transposed frame matches
    u = ClosedForm.parse("y")
    spec = boundary_conditions(u, Length.parse("pi"), Length.parse("1"),
                               {"x0": "neumann", "xL": "neumann", "y0": "dirichlet", "yL": "dirichlet"})
    pf = ProblemFile(spec, SolverOptions(K=24))
    with pytest.raises(DJLaplaceError):
        solve(pf, orientation="native")
    r = solve(pf, expected=u)
    assert r.orientation == "transposed"
    assert r.verdict == VERIFIED
    assert r.closed_form == u
    assert r.to_dict()["expected"]["grid_sup_error"] <= 1e-12


def test_semi_analytic_outcome():
    # u = sinh(x) sin(y) / sinh(pi): g has an irrational coefficient outside the dictionary
    spec = ProblemSpec.build("pi", "pi", y0=("dirichlet", "0"), yL=("dirichlet", "0"),
                             x0=("dirichlet", "0"), xL=("dirichlet", "sin(y)"))
    r = solve(ProblemFile(spec, SolverOptions(K=20)))
    d = r.to_dict()
    assert r.verdict == SEMI_ANALYTIC and r.exit_code == 2
    assert d["g"] is None
    assert d["constraints"]["mode"] == "pointwise"
    assert len(d["constraints"]["values"]) >= 4
    assert d["solution"]["unknown_substituted"] is False


def test_zero_problem():
    spec = ProblemSpec.build("pi", "pi", **{s: ("dirichlet", "0") for s in ("x0", "xL", "y0", "yL")})
    r = solve(ProblemFile(spec, SolverOptions(K=12)))
    assert r.verdict == VERIFIED
    assert r.to_dict()["g"]["expr"] == "0"
    assert r.closed_form == ClosedForm()


@pytest.mark.parametrize("seed", range(6))
def test_manufactured_round_trip(seed):
    pf, u = manufactured_problem(seed)
    r = solve(pf, expected=u)
    assert r.verdict == VERIFIED
    assert r.reference_error(u) <= 1e-8


def test_convergence_tables():
    t = convergence(DEMOS["ex1"].problem(), [4, 8, 12, 16, 20])
    assert t.ok and t.bounded
    t = convergence(DEMOS["ex3"].problem(), [8, 16, 24, 32])
    assert t.ok
    assert t.rows[-2].sup_error > 1e-8 >= t.rows[-1].sup_error


def test_convergence_needs_reference(monkeypatch):
    import djlaplace.solver as solver

    real = solver.solve

    def unfolded(*a, **kw):
        r = real(*a, **kw)
        r.closed_form = None
        return r

    monkeypatch.setattr(solver, "solve", unfolded)
    pf = replace(DEMOS["ex1"].problem(), reference=None)
    with pytest.raises(MissingReference):
        convergence(pf, [20])
    assert convergence(pf, [20], expected=DEMOS["ex1"].expected).ok


def test_example2_series_value():
    r = demo_report("ex2")
    sol = substitute(r.series, r.g.with_constants())
    value = eval_grid(sol, np.array([1.0]), np.array([0.7]))
    assert float(value.ravel()[0]) == pytest.approx(math.cosh(1) * math.sin(0.7), abs=1e-10)
