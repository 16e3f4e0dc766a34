"""The four worked rectangle problems on ``[0, pi] x [0, pi]``."""

from __future__ import annotations

from dataclasses import dataclass

from .closed_form import ClosedForm
from .errors import UnknownDemo
from .problem import ProblemFile, ProblemSpec, SolverOptions


@dataclass(frozen=True)
class Demo:
    name: str
    title: str
    sides: dict
    K: int
    expected_u: str
    expected_g: str

    def problem(self) -> ProblemFile:
        spec = ProblemSpec.build("pi", "pi", **self.sides)
        return ProblemFile(spec, SolverOptions(K=self.K), self.expected_u, self.name)

    @property
    def expected(self) -> ClosedForm:
        return ClosedForm.parse(self.expected_u)


DEMOS = {
    "ex1": Demo(
        "ex1",
        "Dirichlet on all sides, data sinh(x) at y = 0",
        {
            "y0": ("dirichlet", "sinh(x)"),
            "yL": ("dirichlet", "-sinh(x)"),
            "x0": ("dirichlet", "0"),
            "xL": ("dirichlet", "sinh(pi)*cos(y)"),
        },
        20,
        "sinh(x)*cos(y)",
        "0",
    ),
    "ex2": Demo(
        "ex2",
        "Dirichlet on all sides, homogeneous on both y-sides",
        {
            "y0": ("dirichlet", "0"),
            "yL": ("dirichlet", "0"),
            "x0": ("dirichlet", "sin(y)"),
            "xL": ("dirichlet", "cosh(pi)*sin(y)"),
        },
        20,
        "cosh(x)*sin(y)",
        "cosh(x)",
    ),
    "ex3": Demo(
        "ex3",
        "Neumann on all sides, frequency 2",
        {
            "y0": ("neumann", "0"),
            "yL": ("neumann", "2*cos(2*x)*sinh(2*pi)"),
            "x0": ("neumann", "0"),
            "xL": ("neumann", "0"),
        },
        32,
        "cos(2*x)*cosh(2*y) + C0",
        "cos(2*x) + C0",
    ),
    "ex4": Demo(
        "ex4",
        "Neumann on all sides, data cos(x) at y = 0",
        {
            "y0": ("neumann", "cos(x)"),
            "yL": ("neumann", "cosh(pi)*cos(x)"),
            "x0": ("neumann", "0"),
            "xL": ("neumann", "0"),
        },
        20,
        "cos(x)*sinh(y) + C0",
        "C0",
    ),
}


def get_demo(name: str) -> Demo:
    try:
        return DEMOS[name]
    except KeyError:
        raise UnknownDemo(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}") from None
