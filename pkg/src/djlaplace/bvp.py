"""Integral-equation setup and recovery of the unknown boundary trace g.

Converting ``u_xx + u_yy = 0`` into ``u = u0 - int_0^y int_0^y u_xx`` leaves
one trace at ``y = 0`` unknown: ``g = u_y(x, 0)`` when ``u(x, 0)`` is given,
``g = u(x, 0)`` when ``u_y(x, 0)`` is given.  The remaining boundary data is
then matched power by power against the DJM series to pin g down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    InconsistentMatch,
    NoPattern,
    OverdeterminedConstant,
    UnknownInTarget,
    UnsupportedConfiguration,
)
from .problem import BC, ProblemSpec
from .x_expr import (
    ONE,
    ZERO,
    XExpr,
    antideriv_x,
    diff_x,
    eval_x,
    power,
    series_in_length,
    taylor_coefficients,
    unknown,
)
from .y_series import Series, dx

POINTWISE = "pointwise"
FUNCTIONAL = "functional"
G_IS_UY = "u_y(x,0) = g(x)"
G_IS_U = "u(x,0) = g(x)"


@dataclass(frozen=True)
class SolveSetup:
    u0: Series
    matching_side: str
    matching_bc: BC
    mode: str
    unknown_meaning: str


@dataclass
class Constraint:
    """Linear equation ``coefficient * g^(order)(x0) + known = target`` at one y-power."""

    power: int
    order: int | None
    coefficient: float
    known: float
    target: float

    @property
    def value(self) -> float | None:
        if self.order is None:
            return None
        return (self.target - self.known) / self.coefficient


@dataclass
class ConstraintSet:
    mode: str
    side: str
    x0: float | None = None
    pointwise: list[Constraint] = field(default_factory=list)
    checks: list[Constraint] = field(default_factory=list)
    h: XExpr | None = None
    h_order: int | None = None
    certificate: list[dict] = field(default_factory=list)

    @property
    def values(self) -> list[float]:
        return [c.value for c in self.pointwise]

    @property
    def orders(self) -> list[int]:
        return [c.order for c in self.pointwise]


@dataclass(frozen=True)
class CandidateG:
    expr: XExpr
    free_constants: tuple = ()  # ((name, role), ...)
    provenance: str = ""

    def with_constants(self, values: dict | None = None) -> XExpr:
        """``expr`` plus ``C_i * x^i`` for every free constant."""
        out = self.expr
        for name, _ in self.free_constants:
            i = int(name[1:])
            val = Fraction((values or {}).get(name, 0))
            if val:
                out = out + XExpr.atom(power(i), val)
        return out


# --------------------------------------------------------------------------
# setup
# --------------------------------------------------------------------------


def _corner_checks(p: ProblemSpec, tol: float = 1e-9) -> None:
    corners = [("y0", "x0"), ("y0", "xL"), ("yL", "x0"), ("yL", "xL")]
    for yside, xside in corners:
        ybc, xbc = p.bc(yside), p.bc(xside)
        if ybc.kind != xbc.kind:
            continue
        xc, yc = p.side_position(xside), p.side_position(yside)
        if ybc.kind == "dirichlet":
            a, b = eval_x(ybc.data, xc), eval_x(xbc.data, yc)
        else:  # u_yx from the y-side data against u_xy from the x-side data
            a = eval_x(diff_x(ybc.data, 1), xc) if ybc.data else 0.0
            b = eval_x(diff_x(xbc.data, 1), yc) if xbc.data else 0.0
        if abs(a - b) > tol * max(1.0, abs(a), abs(b)):
            raise UnsupportedConfiguration(
                f"conditions on {yside} and {xside} disagree at their corner ({a:.12g} vs {b:.12g})"
            )


def matching_sides(p: ProblemSpec) -> list[str]:
    """Candidate matching sides in preference order.

    Inhomogeneous x-sides (far side first) use pointwise matching; the far
    y-side uses functional matching.
    """
    out = [s for s in ("xL", "x0") if not p.bc(s).homogeneous]
    out.append("yL")
    return out


def build_setup(p: ProblemSpec, order: int, matching_side: str | None = None) -> SolveSetup:
    _corner_checks(p)
    y0 = p.bc("y0")
    g = XExpr.atom(unknown(0))
    if y0.kind == "dirichlet":
        u0 = Series.from_terms(order, (0, y0.data), (1, g))
        meaning = G_IS_UY
    else:
        u0 = Series.from_terms(order, (0, g), (1, y0.data))
        meaning = G_IS_U
    side = matching_side or matching_sides(p)[0]
    if side == "y0":
        raise UnsupportedConfiguration("the y = 0 side is consumed by the initial term")
    mode = FUNCTIONAL if side == "yL" else POINTWISE
    return SolveSetup(u0, side, p.bc(side), mode, meaning)


# --------------------------------------------------------------------------
# pointwise matching on an x-side
# --------------------------------------------------------------------------


def _target_taylor(data: XExpr, order: int) -> list[float]:
    """Float y-Taylor coefficients of boundary data given in y."""
    out = [0.0] * (order + 1)
    for (const, atom), coef in data.terms:
        scale = float(coef) * const.value()
        if atom.kind == "pow":
            if atom.n <= order:
                out[atom.n] += scale
        elif atom.kind == "g":
            raise UnknownInTarget("boundary data contains the unknown trace")
        else:
            for k, t in enumerate(taylor_coefficients(atom.kind, atom.freq, order)):
                if t:
                    out[k] += scale * float(t)
    return out


def extract_pointwise(s: Series, side: str, p: ProblemSpec, tau_match: float = 1e-10) -> ConstraintSet:
    """Equate y-Taylor coefficients of the trace on ``side`` with its boundary data."""
    if side not in ("x0", "xL"):
        raise ValueError("pointwise matching needs an x-side")
    bc = p.bc(side)
    x0 = p.side_position(side)
    trace = s if bc.kind == "dirichlet" else dx(s)
    target = _target_taylor(bc.data, s.order)
    cs = ConstraintSet(POINTWISE, side, x0)
    for k in range(trace.order + 1):
        known_x, unk = trace.coefficient(k).split_unknown()
        known = float(eval_x(known_x, x0)) if known_x else 0.0
        if not unk:
            c = Constraint(k, None, 0.0, known, target[k])
            if abs(known - target[k]) > tau_match * max(1.0, abs(known), abs(target[k])):
                raise InconsistentMatch(
                    f"y^{k} on side {side}: series gives {known:.15g}, boundary data {target[k]:.15g}"
                )
            cs.checks.append(c)
            continue
        if len(unk) > 1:
            continue
        (d, coef), = unk.items()
        cs.pointwise.append(Constraint(k, d, coef.constant_value(), known, target[k]))
    return cs


# --------------------------------------------------------------------------
# functional matching on y = Ly
# --------------------------------------------------------------------------


def extract_functional(s: Series, p: ProblemSpec, side: str = "yL") -> ConstraintSet:
    """Match x-dependent coefficients of powers of Ly on the far y-side.

    Named constants in the data (``sinh(2*pi)`` with ``Ly = pi``) are read as
    functions of the side length and expanded in it.  This reading is a
    heuristic (``sin(pi/2)`` has already collapsed to 1), so a mismatch only
    means this side yields no candidate; verification is the real test.
    """
    if side != "yL":
        raise ValueError("functional matching is done on the far y-side")
    bc = p.bc(side)
    if bc.data.has_unknown:
        raise UnknownInTarget("boundary data contains the unknown trace")
    K = s.order
    if bc.kind == "dirichlet":
        trace = {k: c for k, c in s.items()}
        n_max = K
    else:
        trace = {k - 1: c.scale(k) for k, c in s.items() if k >= 1}
        n_max = K - 1
    target: dict[int, XExpr] = {}
    for (const, atom), coef in bc.data.terms:
        for n, t in enumerate(series_in_length(const, p.Ly, n_max)):
            if t:
                target[n] = target.get(n, ZERO) + XExpr({(ONE, atom): coef * t})

    cs = ConstraintSet(FUNCTIONAL, side)
    for n in range(n_max + 1):
        known, unk = trace.get(n, ZERO).split_unknown()
        rhs = target.get(n, ZERO) - known
        if not unk:
            if rhs:
                raise InconsistentMatch(f"power Ly^{n}: known part differs from the data by {rhs!r}")
            continue
        if len(unk) > 1:
            raise InconsistentMatch(f"power Ly^{n} couples several derivatives of g")
        (d, coef), = unk.items()
        if not coef.is_rational_constant:
            raise InconsistentMatch(f"power Ly^{n}: non-rational coefficient on g")
        c = coef.terms[0][1]
        hn = rhs.scale(1 / c)
        if cs.h is None:
            cs.h, cs.h_order = hn, d
            cs.certificate.append({"power": n, "order": d, "identity": "defines h", "ok": True})
            continue
        if d < cs.h_order:
            raise InconsistentMatch(f"power Ly^{n} involves a lower derivative than the defining one")
        expected = cs.h if d == cs.h_order else diff_x(cs.h, d - cs.h_order)
        ok = expected == hn
        cs.certificate.append({"power": n, "order": d, "identity": f"g^({d}) = h^({d - cs.h_order})", "ok": ok})
        if not ok:
            raise InconsistentMatch(
                f"power Ly^{n}: g^({d}) would be {hn!r} but differentiating h gives {expected!r}"
            )
    if cs.h is None:
        raise NoPattern("no power of Ly involves the unknown trace")
    return cs


# --------------------------------------------------------------------------
# identification
# --------------------------------------------------------------------------


def rationalize(v: float, rel_tol: float = 1e-9, max_den: int = 10_000) -> Fraction | None:
    if abs(v) < 1e-11:
        return Fraction(0)
    f = Fraction(v).limit_denominator(max_den)
    if abs(float(f) - v) <= rel_tol * max(1.0, abs(v)):
        return f
    return None


def _rational_sqrt(r: float, hints) -> Fraction | None:
    for a in sorted(hints):
        if a > 0 and abs(float(a * a) - r) <= 1e-7 * r:
            return Fraction(a)
    a = rationalize(math.sqrt(r), rel_tol=1e-9, max_den=1000)
    return a if a else None


def _basis_value(phi: XExpr, order: int, x: float) -> float:
    return float(eval_x(diff_x(phi, order) if order else phi, x))


def _fit(basis: list[XExpr], rows: list[tuple[float, int, float]]):
    """Least-squares coefficients with ``sum c_i phi_i^(d)(x) = v`` for each row."""
    if not rows:
        return None
    A = np.array([[_basis_value(phi, d, x) for phi in basis] for x, d, _ in rows])
    b = np.array([v for _, _, v in rows])
    scale = np.maximum(np.abs(A).max(axis=1), 1.0)
    coef, *_ = np.linalg.lstsq(A / scale[:, None], b / scale, rcond=None)
    return coef


def _combine(basis: list[XExpr], coefs) -> XExpr | None:
    out = ZERO
    big = max((abs(float(c)) for c in coefs), default=0.0)
    for phi, c in zip(basis, coefs):
        if abs(float(c)) <= 1e-10 * big:
            continue
        q = rationalize(float(c))
        if q is None:
            return None
        out = out + phi.scale(q)
    return out


def _rows(cs: ConstraintSet, limit: int = 6) -> list[tuple[float, int, float]]:
    return [(cs.x0, c.order, c.value) for c in cs.pointwise[:limit]]


def identify_pointwise(
    cs: ConstraintSet,
    hints=(),
    others: list[ConstraintSet] = (),
    tau_zero: float = 1e-10,
    tau_ratio: float = 1e-8,
) -> list[CandidateG]:
    """Suggest closed forms for g from even-step derivative values at one point.

    Rules, in order: all values zero; constant positive ratio (cosh/sinh
    family); constant negative ratio (cos/sin family); trailing zeros
    (polynomial).  Candidates are only suggestions and must be verified.
    Constraints from ``others`` (other x-sides) fix the part of g that the
    matched side cannot see.
    """
    values = cs.values
    orders = cs.orders
    if len(values) < 4:
        raise NoPattern(f"only {len(values)} constraints; at least 4 are needed")
    if any(b - a != 2 for a, b in zip(orders, orders[1:])):
        raise NoPattern("constraints are not on consecutive even derivative steps")
    x0 = cs.x0
    d0 = orders[0]
    extra_rows = [r for o in others for r in _rows(o)]
    out: list[CandidateG] = []
    scale = max(abs(v) for v in values)

    if scale <= tau_zero:
        out.append(CandidateG(ZERO, (), "all matched values vanish"))
        return out

    nz = [abs(v) > tau_zero * max(1.0, scale) for v in values]
    if not nz[-1]:
        m = max(i for i, flag in enumerate(nz) if flag) + 1
        deg = 2 * m - 1 + d0 % 2
        basis = [XExpr.atom(power(i)) for i in range(deg + 1)]
        rows = _rows(cs, limit=m + 1)
        taylor = ZERO
        ok = True
        for j in range(m):
            d = orders[j]
            # expand v_j (x - x0)^d / d! in powers of x
            for i in range(d + 1):
                c = values[j] / math.factorial(d) * math.comb(d, i) * (-x0) ** (d - i)
                q = rationalize(c)
                if q is None:
                    ok = False
                    break
                taylor = taylor + XExpr.atom(power(i), q)
        if ok:
            out.append(CandidateG(taylor, (), f"Taylor polynomial about x={x0:g}"))
        coefs = _fit(basis, rows + extra_rows)
        cand = _combine(basis, coefs) if coefs is not None else None
        if cand is not None and cand not in [c.expr for c in out]:
            out.append(CandidateG(cand, (), f"polynomial of degree <= {deg} fitted on all x-sides"))
        if not out:
            raise NoPattern("polynomial coefficients are not rational")
        return out

    if not all(nz):
        raise NoPattern("values vanish only partly")
    ratios = [b / a for a, b in zip(values, values[1:])]
    r = ratios[0]
    if max(abs(q - r) for q in ratios) > tau_ratio * abs(r):
        raise NoPattern("successive value ratios are not constant")
    a = _rational_sqrt(abs(r), hints)
    if a is None:
        raise NoPattern(f"frequency sqrt(|{r:.12g}|) is not rational")
    even, odd = ("cosh", "sinh") if r > 0 else ("cos", "sin")
    E, O = XExpr.trig(even, a), XExpr.trig(odd, a)
    v0 = values[0]
    for phi, label in ((E, even), (O, odd)):
        denom = _basis_value(phi, d0, x0)
        if abs(denom) > 1e-12:
            q = rationalize(v0 / denom)
            if q is not None:
                out.append(CandidateG(phi.scale(q), (), f"ratio {float(r):.6g}: {label}({a}x) scaled at x={x0:g}"))
    # v0 * E(a (x - x0)) written in the unshifted atoms
    ce, ox = _basis_value(E, 0, x0), _basis_value(O, 0, x0)
    sgn = -1.0 if r > 0 else 1.0
    if d0 % 2 == 0:
        shifted = [v0 * ce, sgn * v0 * ox]
    else:  # (v0/a) * O(a (x - x0))
        shifted = [-v0 / float(a) * ox, v0 / float(a) * ce]
    cand = _combine([E, O], shifted)
    if cand is not None and cand not in [c.expr for c in out]:
        out.append(CandidateG(cand, (), f"shifted {even}({a}(x - {x0:g}))"))
    coefs = _fit([E, O], _rows(cs) + extra_rows)
    cand = _combine([E, O], coefs) if coefs is not None else None
    if cand is not None and cand not in [c.expr for c in out]:
        out.append(CandidateG(cand, (), f"{even}/{odd}({a}x) combination fitted on all x-sides"))
    if not out:
        raise NoPattern("no candidate with rational coefficients")
    return out


# --------------------------------------------------------------------------
# functional solve
# --------------------------------------------------------------------------


def _x_side_equations(p: ProblemSpec, meaning: str) -> list[tuple[float, int, float]]:
    """``(x_s, derivative order, value)`` for g read off the x-sides at y = 0."""
    rows = []
    for side in ("x0", "xL"):
        bc = p.bc(side)
        data = bc.data
        if meaning == G_IS_UY:
            val = float(eval_x(diff_x(data, 1), 0.0)) if data else 0.0
        else:
            val = float(eval_x(data, 0.0)) if data else 0.0
        rows.append((p.side_position(side), 0 if bc.kind == "dirichlet" else 1, val))
    return rows


def solve_functional(
    cs: ConstraintSet, p: ProblemSpec, meaning: str, tau_match: float = 1e-10
) -> CandidateG:
    """Integrate ``g^(d) = h`` and fix the integration constants from the x-sides."""
    h, d = cs.h, cs.h_order
    if h is None or h.has_unknown:
        raise ValueError("h must be a known function")
    G = h
    for _ in range(d):
        G = antideriv_x(G)
    if d == 0:
        return CandidateG(G, (), "g read off directly")
    rows = _x_side_equations(p, meaning)
    A = np.array([[_basis_value(XExpr.atom(power(i)), e, xs) for i in range(d)] for xs, e, _ in rows])
    b = np.array([v - _basis_value(G, e, xs) for xs, e, v in rows])
    determined = [i for i in range(d) if np.any(np.abs(A[:, i]) > 1e-14)]
    free = [i for i in range(d) if i not in determined]
    if any(i != 0 for i in free):
        raise NoPattern(f"integration constant(s) {', '.join(f'C{i}' for i in free)} not fixed by the x-sides")
    expr = G
    if determined:
        sub = A[:, determined]
        if np.linalg.matrix_rank(sub) < len(determined):
            raise NoPattern("the x-side conditions do not fix every integration constant")
        coef, *_ = np.linalg.lstsq(sub, b, rcond=None)
        resid = sub @ coef - b
        if np.max(np.abs(resid)) > tau_match * max(1.0, float(np.max(np.abs(b)))):
            raise OverdeterminedConstant(f"x-side conditions disagree about the integration constants (residual {np.max(np.abs(resid)):.3g})")
        for i, c in zip(determined, coef):
            q = rationalize(float(c))
            if q is None:
                q = Fraction(float(c))
            expr = expr + XExpr.atom(power(i), q)
    roles = tuple((f"C{i}", GAUGE_ROLE) for i in free)
    return CandidateG(expr, roles, f"g^({d}) = h integrated {d} time(s)")


GAUGE_ROLE = "additive constant (pure-Neumann gauge freedom)"


def with_gauge(cand: CandidateG, p: ProblemSpec) -> CandidateG:
    """Declare ``C0`` free on pure-Neumann problems, where u is fixed only up to a constant."""
    if not p.pure_neumann or any(n == "C0" for n, _ in cand.free_constants):
        return cand
    return CandidateG(cand.expr, cand.free_constants + (("C0", GAUGE_ROLE),), cand.provenance)


def frequency_hints(p: ProblemSpec) -> set:
    hints = set()
    for _, bc in p.bcs:
        hints |= bc.data.frequencies()
    return hints
