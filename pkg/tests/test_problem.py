from fractions import Fraction
from pathlib import Path

import pytest

from djlaplace.demos import DEMOS
from djlaplace.errors import DJLaplaceError, ProblemFileError
from djlaplace.problem import Length, load_problem, parse_problem, render_problem, transpose

ROOT = Path(__file__).resolve().parents[1]

GOOD = """
# comment line
[domain]
Lx = pi
Ly = 1/2*pi   # trailing comment

[bc]
y0 = dirichlet: sinh(x)
yL = neumann: 0
x0 = dirichlet: 0
xL = dirichlet: sinh(pi)*cos(y)

[solver]
K = 12
tau_accept = 1e-9
"""


def test_parse_good_file():
    pf = parse_problem(GOOD, "good")
    assert pf.spec.Ly == Length(Fraction(1, 2), True)
    assert pf.spec.bc("yL").kind == "neumann"
    assert pf.solver.K == 12
    assert pf.solver.tau_accept == 1e-9
    assert pf.reference is None


def test_render_round_trip():
    pf = parse_problem(GOOD, "good")
    assert parse_problem(render_problem(pf), "good") == pf


@pytest.mark.parametrize("name", sorted(DEMOS))
def test_demo_round_trip(name):
    pf = DEMOS[name].problem()
    again = parse_problem(render_problem(pf), name)
    assert again == pf
    assert again.spec == pf.spec


@pytest.mark.parametrize("name", sorted(DEMOS))
def test_shipped_problem_files_match_demos(name):
    assert load_problem(ROOT / "problems" / f"{name}.problem") == DEMOS[name].problem()


@pytest.mark.parametrize(
    "mutate, line, fragment",
    [
        (lambda t: t.replace("yL = neumann: 0\n", ""), None, "missing side(s) yL"),
        (lambda t: t.replace("x0 = dirichlet: 0", "x0 = dirichlet: 0\nx0 = dirichlet: 1"), 11, "duplicate"),
        (lambda t: t.replace("neumann: 0", "robin: 0"), 9, "unknown condition kind"),
        (lambda t: t.replace("sinh(x)", "sinh(x"), 8, "position"),
        (lambda t: t.replace("sinh(x)", "g(x)"), 8, ""),
        (lambda t: t.replace("[solver]", "[solverz]"), 13, "unknown section"),
        (lambda t: t.replace("K = 12", "K 12"), 14, "key = value"),
        (lambda t: t.replace("Lx = pi", "Lx = -pi"), 4, "positive"),
        (lambda t: t.replace("y0 =", "z0 ="), 8, "unknown side"),
        (lambda t: t.replace("Lx = pi", "Lx = x"), 4, ""),
    ],
)
def test_errors_carry_line_numbers(mutate, line, fragment):
    with pytest.raises(ProblemFileError) as info:
        parse_problem(mutate(GOOD))
    assert info.value.line == line
    assert fragment in str(info.value)
    if line is not None:
        assert str(info.value).startswith(f"line {line}: ")


def test_reference_is_validated():
    with pytest.raises(ProblemFileError):
        parse_problem(GOOD + "\n[reference]\nu = sin(x)*sin(x)*cos(y)\n")
    pf = parse_problem(GOOD + "\n[reference]\nu = sinh(x)*cos(y)\n")
    assert pf.reference == "sinh(x)*cos(y)"


def test_transpose_is_an_involution():
    spec = parse_problem(GOOD).spec
    t = transpose(spec)
    assert t.Lx == spec.Ly and t.Ly == spec.Lx
    assert t.bc("x0") == spec.bc("y0")
    assert transpose(t) == spec


def test_length_parse():
    assert Length.parse("3/2") == Length(Fraction(3, 2), False)
    assert Length.parse("2*pi").render() == "2*pi"
    with pytest.raises(DJLaplaceError):
        Length.parse("sin(1)")
