"""Residuals, boundary errors, tail bounds, closed-form folding and convergence studies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .closed_form import ClosedForm
from .errors import UnknownPresent
from .problem import SIDES, ProblemSpec
from .x_expr import diff_x, eval_x, power, sup_bound, trig_atom
from .y_series import Series, combine, d2x, dx, dy, eval_grid, substitute

SIDE_POINTS = 33
INTERIOR_POINTS = 21


# --------------------------------------------------------------------------
# residuals
# --------------------------------------------------------------------------


def residual_symbolic(s: Series) -> Series:
    """``u_xx + u_yy`` as a series (order drops by two)."""
    if s.has_unknown:
        raise UnknownPresent("residual needs a concrete g")
    return combine(d2x(s), dy(dy(s)), 1, 1)


def lowest_exponent(s: Series) -> int | None:
    exps = s.exponents
    return exps[0] if exps else None


def residual_fd(u, xs, ys, h: float, dtype=np.longdouble) -> float:
    """Sup-norm of the 5-point Laplacian of ``u(x, y)`` over the tensor grid.

    ``u`` must accept broadcastable arrays.  Evaluation runs in extended
    precision when the platform provides it, which keeps rounding well below
    the O(h^2) truncation error at h ~ 1e-3.
    """
    X, Y = np.meshgrid(np.asarray(xs, dtype=dtype), np.asarray(ys, dtype=dtype))
    h_ = dtype(h)
    lap = (u(X + h_, Y) + u(X - h_, Y) + u(X, Y + h_) + u(X, Y - h_) - 4 * u(X, Y)) / (h_ * h_)
    return float(np.max(np.abs(lap)))


# --------------------------------------------------------------------------
# closed-form folding
# --------------------------------------------------------------------------


def _rational_sqrt(q: Fraction) -> Fraction | None:
    if q <= 0:
        return None
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


def _fold_part(seq: dict[int, Fraction], parity: int, order: int):
    """Fold one parity class of a coefficient sequence.

    Returns a list of ``(coef, y-atom)`` or ``None``.
    """
    if not seq:
        return []
    lead = parity
    if lead in seq and lead + 2 <= order and (lead + 2) in seq:
        c_lead, c_next = seq[lead], seq[lead + 2]
        rho = c_next / c_lead * (lead + 1) * (lead + 2)
        a = _rational_sqrt(abs(rho))
        if a is not None:
            if parity == 0:
                kind = "cosh" if rho > 0 else "cos"
                amp = c_lead
            else:
                kind = "sinh" if rho > 0 else "sin"
                amp = c_lead / a
            sgn = 1 if rho > 0 else -1
            matches = True
            term = Fraction(1)  # a^k / k!
            for k in range(order + 1):
                if k:
                    term = term * a / k
                if k % 2 != parity:
                    continue
                expected = amp * term * sgn ** ((k - parity) // 2)
                if seq.get(k, Fraction(0)) != expected:
                    matches = False
                    break
            if matches:
                return [(amp, trig_atom(kind, a)[1])]
    # a polynomial is accepted only when it has visibly terminated
    if max(seq) <= order - 2 or order < 2:
        return [(c, power(k)) for k, c in sorted(seq.items())]
    return None


def fold_closed_form(s: Series) -> ClosedForm | None:
    """Recognize each x-atom's y-coefficients as cos/cosh/sin/sinh(a y) or a polynomial.

    Only harmonic results are returned; a partial sum that happens to be a
    polynomial is not a closed form of the solution.
    """
    if s.has_unknown:
        raise UnknownPresent("cannot fold a series that still contains g")
    by_key: dict = {}
    for k, c in s.items():
        for key, coef in c.terms:
            by_key.setdefault(key, {})[k] = coef
    terms: dict = {}
    for (const, xatom), seq in by_key.items():
        for parity in (0, 1):
            part = {k: v for k, v in seq.items() if k % 2 == parity}
            folded = _fold_part(part, parity, s.order)
            if folded is None:
                return None
            for coef, yatom in folded:
                key = (const, xatom, yatom)
                terms[key] = terms.get(key, Fraction(0)) + coef
    folded = ClosedForm(terms)
    return folded if folded.harmonic else None


# --------------------------------------------------------------------------
# tail bounds and boundary errors
# --------------------------------------------------------------------------


def _geometric_remainder(terms: dict[int, float]) -> float:
    """Estimate of the terms beyond the last available exponent."""
    nz = [(k, t) for k, t in sorted(terms.items()) if t > 0]
    if len(nz) < 2:
        return 0.0
    (kb, tb), (ka, ta) = nz[-2], nz[-1]
    rho = (ta / tb) ** (1.0 / (ka - kb))
    if rho >= 1.0:
        return math.inf
    return ta * rho / (1.0 - rho)


def tail_terms(tail: Series, p: ProblemSpec, side: str | None = None) -> dict[int, float]:
    """Per-exponent sup bounds of the omitted part, as seen on ``side`` (or globally)."""
    lx, ly = p.Lx.value, p.Ly.value
    out = {}
    if side is None:
        for k, c in tail.items():
            out[k] = sup_bound(c, lx) * ly**k
        return out
    kind = p.bc(side).kind
    for k, c in tail.items():
        if side in ("y0",):
            if kind == "dirichlet":
                t = sup_bound(c, lx) if k == 0 else 0.0
            else:
                t = sup_bound(c, lx) if k == 1 else 0.0
        elif side == "yL":
            t = sup_bound(c, lx) * ly**k if kind == "dirichlet" else k * sup_bound(c, lx) * ly ** max(k - 1, 0)
        else:
            cc = c if kind == "dirichlet" else diff_x(c, 1)
            t = sup_bound(cc, lx) * ly**k
        out[k] = t
    return out


def tail_bound(tail: Series, p: ProblemSpec, side: str | None = None, extended: bool = True) -> float:
    """Bound on the omitted part: all available omitted terms plus a geometric remainder."""
    terms = tail_terms(tail, p, side)
    total = sum(terms.values())
    if extended and terms:
        total += _geometric_remainder(terms)
    return total


def two_term_estimate(full: Series, K: int, p: ProblemSpec) -> float:
    """``sup|c_{K+1}| Ly^{K+1} + sup|c_{K+2}| Ly^{K+2}``."""
    lx, ly = p.Lx.value, p.Ly.value
    return sum(sup_bound(full.coefficient(k), lx) * ly**k for k in (K + 1, K + 2))


def side_samples(p: ProblemSpec, side: str, n: int = SIDE_POINTS):
    """Points ``(x, y)`` and the side parameter along one side."""
    if side in ("y0", "yL"):
        t = np.linspace(0.0, p.Lx.value, n)
        y = np.full_like(t, p.side_position(side))
        return t, y, t
    t = np.linspace(0.0, p.Ly.value, n)
    x = np.full_like(t, p.side_position(side))
    return x, t, t


def side_trace(s: Series, p: ProblemSpec, side: str, n: int = SIDE_POINTS) -> np.ndarray:
    """Computed boundary quantity (value or coordinate derivative) along ``side``."""
    from .y_series import eval_series

    kind = p.bc(side).kind
    x, y, _ = side_samples(p, side, n)
    if kind == "dirichlet":
        return eval_series(s, x, y)
    if side in ("x0", "xL"):
        return eval_series(dx(s), x, y)
    return eval_series(dy(s), x, y)


def bc_errors(s: Series, p: ProblemSpec, n: int = SIDE_POINTS) -> dict[str, float]:
    out = {}
    for side in SIDES:
        _, _, t = side_samples(p, side, n)
        data = eval_x(p.bc(side).data, t)
        out[side] = float(np.max(np.abs(side_trace(s, p, side, n) - data)))
    return out


# --------------------------------------------------------------------------
# candidate verification
# --------------------------------------------------------------------------


@dataclass
class Verification:
    passed: bool
    side_errors: dict
    side_bounds: dict
    residual_sup: float
    residual_bound: float
    residual_exact_below: int | None
    residual_required_below: int
    tolerance: float
    constant_values: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def max_error(self) -> float:
        return max(self.side_errors.values()) if self.side_errors else 0.0

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "sides": {
                s: {"sup_error": self.side_errors[s], "tail_bound": self.side_bounds[s]} for s in SIDES
            },
            "residual": {
                "sup": self.residual_sup,
                "tail_bound": self.residual_bound,
                "exact_zero_below_exponent": self.residual_exact_below,
                "required_below_exponent": self.residual_required_below,
            },
            "free_constant_values": self.constant_values,
            "notes": self.notes,
        }


def _interior_grid(p: ProblemSpec, n: int):
    xs = np.linspace(0.0, p.Lx.value, n + 2)[1:-1]
    ys = np.linspace(0.0, p.Ly.value, n + 2)[1:-1]
    return xs, ys


def verify_solution(
    sol: Series,
    full: Series,
    p: ProblemSpec,
    required_below: int,
    tau_accept: float = 1e-8,
    side_points: int = SIDE_POINTS,
    interior_points: int = INTERIOR_POINTS,
) -> Verification:
    """Check an unknown-free solution against all four conditions and the PDE.

    ``full`` is a longer expansion of the same solution; ``full - sol`` is the
    omitted part used for the tail bounds.
    """
    tail = combine(full, Series(full.order, dict(sol.items())), 1, -1)
    errors = bc_errors(sol, p, side_points)
    bounds = {side: tail_bound(tail, p, side) for side in SIDES}
    res = residual_symbolic(sol)
    xs, ys = _interior_grid(p, interior_points)
    res_sup = float(np.max(np.abs(eval_grid(res, xs, ys)))) if not res.is_zero() else 0.0
    res_bound = sum(sup_bound(c, p.Lx.value) * p.Ly.value**k for k, c in res.items())
    low = lowest_exponent(res)
    exact_ok = low is None or low >= required_below
    passed = exact_ok and all(errors[s] <= tau_accept + bounds[s] for s in SIDES)
    passed = passed and res_sup <= tau_accept + res_bound
    notes = [] if exact_ok else [f"PDE residual has a nonzero y^{low} coefficient"]
    notes += [f"side {s}: error {errors[s]:.3g} exceeds {tau_accept:.1g} + tail {bounds[s]:.3g}"
              for s in SIDES if errors[s] > tau_accept + bounds[s]]
    return Verification(passed, errors, bounds, res_sup, res_bound, low, required_below, tau_accept, notes=notes)


def verify_candidate(
    candidate,
    p: ProblemSpec,
    series: Series,
    full: Series,
    tau_accept: float = 1e-8,
    side_points: int = SIDE_POINTS,
    interior_points: int = INTERIOR_POINTS,
    constant_trials=(0, 7),
    required_below: int | None = None,
) -> Verification:
    """Substitute a candidate g and verify; free constants are tried at two values.

    ``series`` is the expansion with g left symbolic and ``full`` a longer
    one.  The PDE residual must vanish exactly below ``required_below``
    (default: every exponent up to K-2).  Errors must not depend on the free
    constants.
    """
    if required_below is None:
        required_below = series.order - 1
    names = [n for n, _ in candidate.free_constants]
    trials = [dict.fromkeys(names, c) for c in constant_trials] if names else [{}]
    results = []
    for values in trials:
        g = candidate.with_constants(values)
        sol = substitute(series, g)
        ext = substitute(full, g)
        results.append(verify_solution(sol, ext, p, required_below, tau_accept, side_points, interior_points))
    out = results[0]
    if len(results) > 1:
        out.constant_values = [dict(v) for v in trials]
        for other in results[1:]:
            out.passed = out.passed and other.passed
            for s in SIDES:
                if abs(other.side_errors[s] - out.side_errors[s]) > 1e-9 * max(1.0, out.side_errors[s]):
                    out.passed = False
                    out.notes.append(f"side {s}: error depends on the free constants")
                out.side_errors[s] = max(out.side_errors[s], other.side_errors[s])
            out.notes.extend(n for n in other.notes if n not in out.notes)
    return out


# --------------------------------------------------------------------------
# convergence study
# --------------------------------------------------------------------------


@dataclass
class ConvergenceRow:
    K: int
    sup_error: float
    tail_bound: float
    two_term_estimate: float


@dataclass
class ConvergenceTable:
    rows: list
    tau_accept: float

    @property
    def monotone(self) -> bool:
        errs = [r.sup_error for r in self.rows]
        return all(b <= a * (1 + 1e-12) + 1e-15 for a, b in zip(errs, errs[1:]))

    @property
    def bounded(self) -> bool:
        return all(r.sup_error <= r.tail_bound * (1 + 1e-9) + 1e-12 for r in self.rows)

    @property
    def final_ok(self) -> bool:
        return bool(self.rows) and self.rows[-1].sup_error <= self.tau_accept

    @property
    def ok(self) -> bool:
        return self.monotone and self.final_ok

    def to_csv(self) -> str:
        import csv
        import io

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["K", "sup_error", "tail_bound"])
        for r in self.rows:
            w.writerow([r.K, f"{r.sup_error:.6e}", f"{r.tail_bound:.6e}"])
        return buf.getvalue()


def convergence_study(
    full: Series,
    p: ProblemSpec,
    K_list,
    reference,
    constants: dict | None = None,
    grid_points: int = 21,
    tau_accept: float = 1e-8,
) -> ConvergenceTable:
    """Sup error of the order-K truncation against ``reference`` on a uniform grid.

    ``full`` is an unknown-free expansion of order above ``max(K_list)``;
    ``reference`` is a :class:`ClosedForm` or a Series.
    """
    xs = np.linspace(0.0, p.Lx.value, grid_points)
    ys = np.linspace(0.0, p.Ly.value, grid_points)
    if isinstance(reference, ClosedForm):
        X, Y = np.meshgrid(xs, ys)
        ref = reference.evaluate(X, Y, constants)
    else:
        ref = eval_grid(reference, xs, ys)
    rows = []
    for K in sorted(K_list):
        sol = full.truncate(K)
        err = float(np.max(np.abs(eval_grid(sol, xs, ys) - ref)))
        tail = Series(full.order, {k: c for k, c in full.items() if k > K})
        rows.append(ConvergenceRow(K, err, tail_bound(tail, p), two_term_estimate(full, K, p)))
    return ConvergenceTable(rows, tau_accept)
