"""End-to-end solve: setup, DJM iteration, matching, identification, verification, folding."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .bvp import (
    FUNCTIONAL,
    G_IS_U,
    G_IS_UY,
    CandidateG,
    ConstraintSet,
    build_setup,
    extract_functional,
    extract_pointwise,
    frequency_hints,
    identify_pointwise,
    matching_sides,
    solve_functional,
    with_gauge,
)
from .closed_form import ClosedForm
from .djm import ComponentList, dj_iterate, k_term_sum, laplace_operator, linear_fast_path, telescoping_check
from .errors import (
    DJLaplaceError,
    InconsistentMatch,
    MissingReference,
    NoPattern,
    OverdeterminedConstant,
    UnsupportedConfiguration,
)
from .problem import SIDE_VAR, SIDES, TRANSPOSED_SIDE, ProblemFile, ProblemSpec, transpose
from .verify import INTERIOR_POINTS, Verification, convergence_study, fold_closed_form, verify_candidate
from .x_expr import render
from .y_series import Series, eval_grid, series_to_json, substitute

SCHEMA = "djlaplace.report/1"
EXTRA_ORDER = 24  # extra y-powers used for tail bounds
ORIENTATIONS = ("auto", "native", "transposed")

VERIFIED = "verified"
SEMI_ANALYTIC = "semi-analytic"


@dataclass
class Attempt:
    side: str
    mode: str
    error: str | None = None
    candidates: list = field(default_factory=list)  # [(CandidateG, Verification)]


@dataclass
class SolutionReport:
    problem: ProblemFile
    orientation: str
    K: int
    k_terms: int | None
    verdict: str
    setup: object = None
    components: ComponentList | None = None
    constraints: ConstraintSet | None = None
    g: CandidateG | None = None
    series: Series | None = None
    closed_form: ClosedForm | None = None
    verification: Verification | None = None
    attempts: list = field(default_factory=list)
    telescoping: bool | None = None
    linear_cross_check: bool | None = None
    expected: ClosedForm | None = None
    grid: int = INTERIOR_POINTS
    message: str = ""

    @property
    def exit_code(self) -> int:
        return {VERIFIED: 0, SEMI_ANALYTIC: 2}.get(self.verdict, 1)

    @property
    def var(self) -> str:
        """Name of the series variable in the original frame."""
        return "x" if self.orientation == "transposed" else "y"

    def reference_error(self, reference: ClosedForm | None = None, constants=(0, 7)) -> float | None:
        """Sup difference between the series and a closed form on a grid with boundary."""
        ref = reference or self.expected
        if ref is None or self.series is None or self.g is None:
            return None
        p = self.problem.spec
        names = [n for n, _ in self.g.free_constants]
        if not names or any(n not in ref.free_names for n in names):
            constants = (0,)  # the reference fixes the gauge
        worst = 0.0
        for c in constants:
            values = dict.fromkeys(names, c)
            sol = substitute(self.series, self.g.with_constants(values))
            sp = transpose(p) if self.orientation == "transposed" else p
            xs = np.linspace(0.0, sp.Lx.value, self.grid)
            ys = np.linspace(0.0, sp.Ly.value, self.grid)
            vals = eval_grid(sol, xs, ys)
            X, Y = np.meshgrid(xs, ys)
            if self.orientation == "transposed":
                X, Y = Y, X
            consts = {n: c for n in ref.free_names}
            worst = max(worst, float(np.max(np.abs(vals - ref.evaluate(X, Y, consts)))))
        return worst

    def to_dict(self) -> dict:
        p = self.problem.spec
        transposed = self.orientation == "transposed"
        gvar = "y" if transposed else "x"
        d: dict = {
            "schema": SCHEMA,
            "generator": f"djlaplace {__version__}",
            "problem": {
                "name": self.problem.name,
                "Lx": p.Lx.render(),
                "Ly": p.Ly.render(),
                "bc": {s: {"kind": p.bc(s).kind, "data": render(p.bc(s).data, SIDE_VAR[s])} for s in SIDES},
            },
            "orientation": self.orientation,
            "solver": {
                "K": self.K,
                "k_terms": self.k_terms,
                "components": len(self.components) if self.components else 0,
                "tau_accept": self.problem.solver.tau_accept,
                "tau_match": self.problem.solver.tau_match,
                "grid": self.grid,
            },
            "verdict": self.verdict,
            "message": self.message,
        }
        if self.setup is not None:
            side = TRANSPOSED_SIDE[self.setup.matching_side] if transposed else self.setup.matching_side
            meaning = self.setup.unknown_meaning
            if transposed:
                meaning = {G_IS_UY: "u_x(0,y) = g(y)", G_IS_U: "u(0,y) = g(y)"}[meaning]
            d["setup"] = {
                "u0": series_to_json(self.components[0], gvar) if self.components else [],
                "matching_side": side,
                "mode": self.setup.mode,
                "unknown_meaning": meaning,
            }
        d["telescoping"] = self.telescoping
        d["linear_cross_check"] = self.linear_cross_check
        d["constraints"] = _constraints_dict(self.constraints, gvar)
        d["attempts"] = [
            {
                "side": TRANSPOSED_SIDE[a.side] if transposed else a.side,
                "mode": a.mode,
                "error": a.error,
                "candidates": [
                    {"g": render(c.expr, gvar), "provenance": c.provenance, "passed": v.passed, "max_side_error": v.max_error}
                    for c, v in a.candidates
                ],
            }
            for a in self.attempts
        ]
        if self.g is not None:
            d["g"] = {
                "expr": render_g(self.g, gvar),
                "free_constants": [{"name": n, "role": r} for n, r in self.g.free_constants],
                "provenance": self.g.provenance,
            }
        else:
            d["g"] = None
        concrete = self.series is not None and self.g is not None
        series = substitute(self.series, self.g.with_constants()) if concrete else self.series
        d["solution"] = {
            "variable": self.var,
            "unknown_substituted": concrete,
            "series": series_to_json(series, gvar) if series is not None else [],
            "closed_form": self.closed_form.render() if self.closed_form is not None else None,
        }
        d["verification"] = _verification_dict(self.verification, transposed)
        if self.expected is not None:
            err = self.reference_error()
            d["expected"] = {
                "closed_form": self.expected.render(),
                "match": self.closed_form == self.expected if self.closed_form is not None else False,
                "grid_sup_error": err,
            }
        elif self.problem.reference:
            ref = ClosedForm.parse(self.problem.reference)
            d["reference"] = {
                "closed_form": ref.render(),
                "match": self.closed_form == ref if self.closed_form is not None else False,
                "grid_sup_error": self.reference_error(ref),
            }
        return d


def render_g(cand: CandidateG, var: str = "x") -> str:
    """``g`` with its free constants, e.g. ``cos(2*x) + C0``."""
    pieces = [] if not cand.expr else [render(cand.expr, var)]
    for name, _ in cand.free_constants:
        i = int(name[1:])
        pieces.append(name if i == 0 else f"{name}*{var}" if i == 1 else f"{name}*{var}^{i}")
    return " + ".join(pieces) or "0"


def _constraints_dict(cs: ConstraintSet | None, var: str):
    if cs is None:
        return None
    if cs.mode == FUNCTIONAL:
        return {
            "mode": cs.mode,
            "h": render(cs.h, var) if cs.h is not None else None,
            "h_order": cs.h_order,
            "certificate": cs.certificate,
        }
    return {
        "mode": cs.mode,
        "at": cs.x0,
        "values": [{"power": c.power, "order": c.order, "value": c.value + 0.0} for c in cs.pointwise],
        "checked_powers": [c.power for c in cs.checks],
    }


def _verification_dict(v: Verification | None, transposed: bool):
    if v is None:
        return None
    d = v.as_dict()
    if transposed:
        d["sides"] = {TRANSPOSED_SIDE[s]: d["sides"][s] for s in ("y0", "yL", "x0", "xL")}
        d["sides"] = {s: d["sides"][s] for s in SIDES}
        d["notes"] = [_swap_side_names(n) for n in d["notes"]]
    return d


def _swap_side_names(text: str) -> str:
    marker = {s: f"\0{i}\0" for i, s in enumerate(SIDES)}
    for s, m in marker.items():
        text = text.replace(f"side {s}", f"side {m}")
    for s, m in marker.items():
        text = text.replace(m, TRANSPOSED_SIDE[s])
    return text


# --------------------------------------------------------------------------


def _expand(p: ProblemSpec, order: int, side: str, max_components: int | None):
    setup = build_setup(p, order, side)
    comps = dj_iterate(setup.u0, laplace_operator(order), max_components)
    return setup, comps


def _other_x_constraints(total: Series, p: ProblemSpec, side: str, tau_match: float) -> list:
    out = []
    for other in ("x0", "xL"):
        if other == side:
            continue
        try:
            out.append(extract_pointwise(total, other, p, tau_match))
        except DJLaplaceError:
            pass
    return out


def solve_native(
    pf: ProblemFile,
    K: int | None = None,
    k_terms: int | None = None,
    grid: int = INTERIOR_POINTS,
    tau_accept: float | None = None,
    orientation: str = "native",
) -> SolutionReport:
    """Solve ``pf`` in its own frame (the unknown trace sits on y = 0)."""
    opts = pf.solver
    K = opts.K if K is None else K
    tau = opts.tau_accept if tau_accept is None else tau_accept
    pf = replace(pf, solver=replace(opts, K=K, tau_accept=tau))
    p = pf.spec
    if K < 2:
        raise DJLaplaceError("K must be at least 2")
    report = SolutionReport(pf, orientation, K, k_terms, SEMI_ANALYTIC, grid=grid)
    first_semi: SolutionReport | None = None
    first_error: DJLaplaceError | None = None

    for side in matching_sides(p):
        setup, comps = _expand(p, K, side, opts.max_components)
        _, ext = _expand(p, K + EXTRA_ORDER, side, None)
        total = comps.total
        if k_terms is not None and not 1 <= k_terms <= len(comps):
            raise DJLaplaceError(f"--k-terms {k_terms} outside 1..{len(comps)} (number of components at K={K})")
        series = k_term_sum(comps, k_terms) if k_terms else total
        attempt = Attempt(side, setup.mode)
        report.attempts.append(attempt)
        try:
            if setup.mode == FUNCTIONAL:
                cs = extract_functional(total, p, side)
                candidates = [solve_functional(cs, p, setup.unknown_meaning, opts.tau_match)]
            else:
                cs = extract_pointwise(total, side, p, opts.tau_match)
                others = _other_x_constraints(total, p, side, opts.tau_match)
                candidates = identify_pointwise(cs, frequency_hints(p), others, opts.tau_zero, opts.tau_ratio)
                candidates = [with_gauge(c, p) for c in candidates]
        except (NoPattern, InconsistentMatch, OverdeterminedConstant, UnsupportedConfiguration) as exc:
            attempt.error = f"{type(exc).__name__}: {exc}"
            if isinstance(exc, NoPattern) and first_semi is None:
                first_semi = _semi(report, setup, comps, series, locals().get("cs"))
            elif first_error is None and not isinstance(exc, NoPattern):
                first_error = exc
            continue
        required = 2 * (k_terms - 1) if k_terms else None
        for cand in candidates:
            v = verify_candidate(cand, p, series, ext.total, tau, interior_points=grid, required_below=required)
            attempt.candidates.append((cand, v))
            if v.passed:
                return _accepted(report, setup, comps, series, cs, cand, v)
        if first_semi is None:
            first_semi = _semi(report, setup, comps, series, cs)
            first_semi.verification = attempt.candidates[0][1] if attempt.candidates else None
            first_semi.message = "every candidate for g failed verification"
    if first_semi is not None:
        return first_semi
    raise first_error or NoPattern("no matching side produced constraints")


def _checks(report: SolutionReport, comps: ComponentList):
    op = laplace_operator(report.K)
    report.telescoping = telescoping_check(comps, op) if len(comps) >= 2 else None
    fast = linear_fast_path(comps[0], op, len(comps))
    report.linear_cross_check = all(a == b for a, b in zip(fast, comps.components))


def _semi(report, setup, comps, series, cs) -> SolutionReport:
    report.verdict = SEMI_ANALYTIC
    report.setup, report.components, report.series, report.constraints = setup, comps, series, cs
    report.message = report.message or "g could not be identified; the series keeps g symbolic"
    _checks(report, comps)
    return report


def _accepted(report, setup, comps, series, cs, cand, v) -> SolutionReport:
    report.verdict = VERIFIED
    report.setup, report.components, report.constraints = setup, comps, cs
    report.g, report.verification = cand, v
    report.series = series
    sol = substitute(series, cand.with_constants())
    folded = fold_closed_form(sol)
    if folded is not None and cand.free_constants:
        for name, _ in cand.free_constants:
            if name == "C0":
                folded = folded.with_free("C0")
    report.closed_form = folded
    if report.k_terms:
        report.message = f"{report.k_terms}-term approximation; errors verified against its tail bound"
    else:
        report.message = "" if folded is not None else "no closed form recognized; the series is the result"
    _checks(report, comps)
    return report


def transpose_report(r: SolutionReport, problem: ProblemFile) -> SolutionReport:
    """Relabel a report computed on the transposed problem in the frame of ``problem``."""
    out = replace(r, problem=problem, orientation="transposed" if r.orientation == "native" else "native")
    if r.closed_form is not None:
        out.closed_form = r.closed_form.transpose()
    if r.expected is not None:
        out.expected = r.expected.transpose()
    return out


def solve(
    pf: ProblemFile,
    K: int | None = None,
    k_terms: int | None = None,
    orientation: str = "auto",
    grid: int = INTERIOR_POINTS,
    tau_accept: float | None = None,
    expected: ClosedForm | None = None,
) -> SolutionReport:
    """Solve a problem file.

    ``orientation="auto"`` solves with g on ``y = 0`` first and falls back to
    the transposed problem (g on ``x = 0``) when that does not verify.
    """
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}")
    kw = dict(K=K, k_terms=k_terms, grid=grid, tau_accept=tau_accept)

    def native():
        r = solve_native(pf, **kw)
        r.expected = expected
        return r

    def transposed():
        tpf = replace(pf, spec=transpose(pf.spec))
        r = solve_native(tpf, **kw)
        r.expected = expected.transpose() if expected is not None else None
        return transpose_report(r, pf)

    if orientation == "native":
        return native()
    if orientation == "transposed":
        return transposed()
    try:
        first = native()
    except DJLaplaceError:
        first = None
    if first is not None and first.verdict == VERIFIED:
        return first
    try:
        second = transposed()
    except DJLaplaceError:
        if first is None:
            raise
        return first
    if second.verdict == VERIFIED or first is None:
        return second
    return first


def convergence(
    pf: ProblemFile,
    K_list,
    expected: ClosedForm | None = None,
    orientation: str = "auto",
    grid_points: int = 21,
    tau_accept: float | None = None,
):
    """Convergence table of the order-K truncations against a reference solution.

    g is identified once at the largest order (identification needs at least
    four matched powers, which small K cannot provide) and the truncations
    are then compared with the reference: the file's ``[reference]``, else
    ``expected``, else the folded closed form.
    """
    K_list = sorted(set(int(k) for k in K_list))
    if not K_list or K_list[0] < 0:
        raise DJLaplaceError("K-list must contain non-negative integers")
    tau = pf.solver.tau_accept if tau_accept is None else tau_accept
    K_id = max(K_list[-1], pf.solver.K)
    r = solve(pf, K=K_id, orientation=orientation, expected=expected)
    if r.verdict != VERIFIED:
        raise NoPattern(f"g could not be identified at K={K_id}; no convergence study without it")
    if pf.reference:
        ref = ClosedForm.parse(pf.reference)
    elif expected is not None:
        ref = expected
    elif r.closed_form is not None:
        ref = r.closed_form
    else:
        raise MissingReference("no [reference] in the problem file and the solution did not fold")
    spec = pf.spec
    if r.orientation == "transposed":
        spec, ref = transpose(spec), ref.transpose()
    setup = build_setup(spec, K_list[-1] + EXTRA_ORDER, r.setup.matching_side)
    full = dj_iterate(setup.u0, laplace_operator(K_list[-1] + EXTRA_ORDER)).total
    full = substitute(full, r.g.with_constants())
    return convergence_study(full, spec, K_list, ref, {n: 0 for n in ref.free_names}, grid_points, tau)
