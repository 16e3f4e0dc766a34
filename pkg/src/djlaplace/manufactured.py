"""Manufactured harmonic solutions and the boundary data they induce."""

from __future__ import annotations

import random
from fractions import Fraction

from .closed_form import ClosedForm
from .problem import BC, SIDES, Length, ProblemFile, ProblemSpec, SolverOptions
from .x_expr import ONE, NamedConst, XAtom, XExpr, const_factor, diff_x, trig_atom

FREQUENCIES = tuple(Fraction(n, 2) for n in range(1, 7))  # 1/2 .. 3
LENGTHS = (Length(Fraction(1)), Length(Fraction(1, 2), True), Length(Fraction(1), True))


def atom_at(atom: XAtom, pos: Length) -> tuple[Fraction, NamedConst]:
    """Exact value of a closed-form atom at a side position, as ``multiplier * const``."""
    if atom.kind == "pow":
        q = pos.q**atom.n
        return q, NamedConst(atom.n if pos.has_pi else 0, ())
    return const_factor(atom.kind, atom.freq * pos.q, pos.has_pi)


def _restrict(u: ClosedForm, side: str, kind: str, p: ProblemSpec) -> XExpr:
    """Value or coordinate derivative of ``u`` along ``side``, in the side variable."""
    along_y = side in ("x0", "xL")  # side is x = const, data is a function of y
    pos = None
    if side == "xL":
        pos = p.Lx
    elif side == "yL":
        pos = p.Ly
    acc = XExpr()
    for (c, ax, ay), v in u.terms:
        fixed, free = (ax, ay) if along_y else (ay, ax)
        fixed_terms = diff_x(XExpr.atom(fixed), 1).terms if kind == "neumann" else XExpr.atom(fixed).terms
        for (_, fatom), fcoef in fixed_terms:
            if pos is None:  # position 0
                val = _at_zero(fatom)
                const = ONE
            else:
                val, const = atom_at(fatom, pos)
            if val:
                acc = acc + XExpr({(c * const, free): v * fcoef * val})
    return acc


def _at_zero(atom: XAtom) -> Fraction:
    if atom.kind == "pow":
        return Fraction(1 if atom.n == 0 else 0)
    return Fraction(1 if atom.kind in ("cos", "cosh") else 0)


def boundary_conditions(u: ClosedForm, Lx: Length, Ly: Length, kinds: dict) -> ProblemSpec:
    """The four conditions satisfied by ``u`` with the given kind per side."""
    probe = ProblemSpec(Lx, Ly, tuple((s, BC("dirichlet", XExpr())) for s in SIDES))
    bcs = tuple((s, BC(kinds[s], _restrict(u, s, kinds[s], probe))) for s in SIDES)
    return ProblemSpec(Lx, Ly, bcs)


def random_harmonic(rng: random.Random, max_terms: int = 1) -> ClosedForm:
    """Sum of products ``T(a x) H(a y)`` or ``H(a x) T(a y)`` with rational ``a <= 3``."""
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        a = rng.choice(FREQUENCIES)
        t = rng.choice(("sin", "cos"))
        h = rng.choice(("sinh", "cosh"))
        if rng.random() < 0.5:
            kx, ky = t, h
        else:
            kx, ky = h, t
        coef = Fraction(rng.choice((1, 2, 3, -1, -2))) / rng.choice((1, 2))
        ax, ay = trig_atom(kx, a)[1], trig_atom(ky, a)[1]
        terms[(ONE, ax, ay)] = coef
    return ClosedForm(terms)


def manufactured_problem(seed: int, K: int = 40) -> tuple[ProblemFile, ClosedForm]:
    """A reproducible random problem and its exact solution."""
    rng = random.Random(seed)
    u = random_harmonic(rng)
    Lx, Ly = rng.choice(LENGTHS), rng.choice(LENGTHS)
    kinds = {s: rng.choice(("dirichlet", "neumann")) for s in SIDES}
    spec = boundary_conditions(u, Lx, Ly, kinds)
    return ProblemFile(spec, SolverOptions(K=K), u.render(), f"manufactured-{seed}"), u
