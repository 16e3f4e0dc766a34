"""Rectangle boundary-value problems and the ``.problem`` text format.

A problem file is UTF-8 text with ``[section]`` headers and ``key = value``
lines; ``#`` starts a comment::

    [domain]
    Lx = pi
    Ly = pi

    [bc]
    y0 = dirichlet: sinh(x)
    yL = dirichlet: -sinh(x)
    x0 = dirichlet: 0
    xL = dirichlet: sinh(pi)*cos(y)

    [solver]
    K = 20

    [reference]
    u = sinh(x)*cos(y)

Sides ``y0``/``yL`` carry data in ``x``; sides ``x0``/``xL`` carry data in
``y``.  Neumann data is the coordinate derivative (``u_x`` on x-sides,
``u_y`` on y-sides).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .errors import DJLaplaceError, ProblemFileError
from .parser import parse_univariate
from .x_expr import ONE, PI, XExpr, parse_x, render

SIDES = ("x0", "xL", "y0", "yL")
KINDS = ("dirichlet", "neumann")
SIDE_VAR = {"x0": "y", "xL": "y", "y0": "x", "yL": "x"}
TRANSPOSED_SIDE = {"x0": "y0", "xL": "yL", "y0": "x0", "yL": "xL"}


@dataclass(frozen=True)
class Length:
    """A positive length ``q`` or ``q*pi`` with ``q`` rational."""

    q: Fraction
    has_pi: bool = False

    @property
    def value(self) -> float:
        return float(self.q) * (math.pi if self.has_pi else 1.0)

    def render(self) -> str:
        num = str(self.q.numerator) if self.q.denominator == 1 else f"{self.q.numerator}/{self.q.denominator}"
        if not self.has_pi:
            return num
        return "pi" if self.q == 1 else f"{num}*pi"

    @classmethod
    def parse(cls, text: str) -> "Length":
        e = parse_x(text)
        if len(e) != 1:
            raise DJLaplaceError(f"length {text!r} must be a rational or rational multiple of pi")
        ((const, atom), coef), = e.terms
        if not atom.is_const or not (const.is_one or const == PI):
            raise DJLaplaceError(f"length {text!r} must be a rational or rational multiple of pi")
        if coef <= 0:
            raise DJLaplaceError(f"length {text!r} must be positive")
        return cls(coef, const == PI)

    def as_xexpr(self) -> XExpr:
        return XExpr.const(self.q, PI if self.has_pi else ONE)


@dataclass(frozen=True)
class BC:
    kind: str
    data: XExpr

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DJLaplaceError(f"unknown boundary condition kind {self.kind!r}")

    @property
    def homogeneous(self) -> bool:
        return not self.data


@dataclass(frozen=True)
class ProblemSpec:
    Lx: Length
    Ly: Length
    bcs: tuple  # ((side, BC), ...) in SIDES order

    def __post_init__(self):
        sides = [s for s, _ in self.bcs]
        if sorted(sides) != sorted(SIDES) or len(sides) != 4:
            raise DJLaplaceError(f"need exactly one condition per side {SIDES}, got {sides}")
        if [s for s, _ in self.bcs] != list(SIDES):
            object.__setattr__(self, "bcs", tuple(sorted(self.bcs, key=lambda p: SIDES.index(p[0]))))

    @classmethod
    def build(cls, Lx, Ly, **sides) -> "ProblemSpec":
        """Convenience constructor: ``build("pi", "pi", y0=("dirichlet", "sinh(x)"), ...)``."""
        lx = Lx if isinstance(Lx, Length) else Length.parse(Lx)
        ly = Ly if isinstance(Ly, Length) else Length.parse(Ly)
        bcs = []
        for side in SIDES:
            kind, data = sides[side]
            if isinstance(data, str):
                data = parse_x(data, SIDE_VAR[side])
            bcs.append((side, BC(kind, data)))
        return cls(lx, ly, tuple(bcs))

    def bc(self, side: str) -> BC:
        return dict(self.bcs)[side]

    def side_position(self, side: str) -> float:
        return {"x0": 0.0, "y0": 0.0, "xL": self.Lx.value, "yL": self.Ly.value}[side]

    @property
    def pure_neumann(self) -> bool:
        return all(bc.kind == "neumann" for _, bc in self.bcs)


def transpose(p: ProblemSpec) -> ProblemSpec:
    """Swap the roles of x and y."""
    return ProblemSpec(p.Ly, p.Lx, tuple((TRANSPOSED_SIDE[s], bc) for s, bc in p.bcs))


@dataclass(frozen=True)
class SolverOptions:
    K: int = 20
    max_components: int | None = None
    tau_accept: float = 1e-8
    tau_match: float = 1e-10
    tau_zero: float = 1e-10
    tau_ratio: float = 1e-8


@dataclass(frozen=True)
class ProblemFile:
    spec: ProblemSpec
    solver: SolverOptions = field(default_factory=SolverOptions)
    reference: str | None = None
    name: str | None = None

    def with_K(self, K: int) -> "ProblemFile":
        return replace(self, solver=replace(self.solver, K=K))


_SOLVER_KEYS = {
    "K": int,
    "max_components": int,
    "tau_accept": float,
    "tau_match": float,
    "tau_zero": float,
    "tau_ratio": float,
}


def parse_problem(text: str, name: str | None = None) -> ProblemFile:
    section = None
    domain: dict = {}
    bcs: dict = {}
    solver: dict = {}
    reference = None
    seen_lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in ("domain", "bc", "solver", "reference"):
                raise ProblemFileError(f"unknown section [{section}]", lineno)
            continue
        if "=" not in line:
            raise ProblemFileError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (t.strip() for t in line.split("=", 1))
        if section is None:
            raise ProblemFileError("entry outside of any section", lineno)
        seen_key = (section, key)
        if seen_key in seen_lines:
            raise ProblemFileError(f"duplicate entry {key!r} (first on line {seen_lines[seen_key]})", lineno)
        seen_lines[seen_key] = lineno
        try:
            if section == "domain":
                if key not in ("Lx", "Ly"):
                    raise ProblemFileError(f"unknown domain key {key!r}", lineno)
                domain[key] = Length.parse(value)
            elif section == "bc":
                if key not in SIDES:
                    raise ProblemFileError(f"unknown side {key!r}; expected one of {', '.join(SIDES)}", lineno)
                if ":" not in value:
                    raise ProblemFileError("boundary entry must read 'kind: expression'", lineno)
                kind, expr = (t.strip() for t in value.split(":", 1))
                if kind not in KINDS:
                    raise ProblemFileError(f"unknown condition kind {kind!r}", lineno)
                bcs[key] = BC(kind, parse_univariate(expr, SIDE_VAR[key], allow_unknown=False))
            elif section == "solver":
                if key not in _SOLVER_KEYS:
                    raise ProblemFileError(f"unknown solver key {key!r}", lineno)
                solver[key] = _SOLVER_KEYS[key](value)
            else:
                if key != "u":
                    raise ProblemFileError(f"unknown reference key {key!r}", lineno)
                from .closed_form import ClosedForm

                ClosedForm.parse(value)
                reference = value
        except ProblemFileError:
            raise
        except (DJLaplaceError, ValueError) as exc:
            raise ProblemFileError(str(exc), lineno) from exc
    for key in ("Lx", "Ly"):
        if key not in domain:
            raise ProblemFileError(f"[domain] is missing {key}")
    missing = [s for s in SIDES if s not in bcs]
    if missing:
        raise ProblemFileError(f"[bc] is missing side(s) {', '.join(missing)}")
    spec = ProblemSpec(domain["Lx"], domain["Ly"], tuple((s, bcs[s]) for s in SIDES))
    return ProblemFile(spec, SolverOptions(**solver), reference, name)


def load_problem(path) -> ProblemFile:
    path = Path(path)
    return parse_problem(path.read_text(encoding="utf-8"), name=path.stem)


def render_problem(pf: ProblemFile) -> str:
    p = pf.spec
    lines = []
    if pf.name:
        lines.append(f"# {pf.name}")
    lines += ["[domain]", f"Lx = {p.Lx.render()}", f"Ly = {p.Ly.render()}", "", "[bc]"]
    for side, bc in p.bcs:
        lines.append(f"{side} = {bc.kind}: {render(bc.data, SIDE_VAR[side])}")
    lines += ["", "[solver]"]
    defaults = SolverOptions()
    for key in _SOLVER_KEYS:
        val = getattr(pf.solver, key)
        if key == "K" or (val is not None and val != getattr(defaults, key)):
            lines.append(f"{key} = {val!r}" if isinstance(val, float) else f"{key} = {val}")
    if pf.reference:
        lines += ["", "[reference]", f"u = {pf.reference}"]
    return "\n".join(lines) + "\n"
