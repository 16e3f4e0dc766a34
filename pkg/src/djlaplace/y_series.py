"""Truncated power series in y whose coefficients are :class:`XExpr`."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

import numpy as np

from .x_expr import ZERO, XExpr, as_fraction, diff_x, eval_x, render, substitute_unknown, sup_bound


class Series:
    """``sum_{k=0}^{order} y**k * coefficient(k)``; exponents above ``order`` are dropped."""

    __slots__ = ("order", "_coeffs")

    def __init__(self, order: int, coeffs: Mapping[int, XExpr] | None = None):
        if order < 0:
            raise ValueError("truncation order must be non-negative")
        self.order = order
        self._coeffs = {
            k: c for k, c in sorted((coeffs or {}).items()) if c and 0 <= k <= order
        }

    @classmethod
    def zero(cls, order: int) -> "Series":
        return cls(order)

    @classmethod
    def from_terms(cls, order: int, *terms: tuple[int, XExpr]) -> "Series":
        acc: dict[int, XExpr] = {}
        for k, c in terms:
            acc[k] = acc.get(k, ZERO) + c
        return cls(order, acc)

    def coefficient(self, k: int) -> XExpr:
        return self._coeffs.get(k, ZERO)

    def items(self):
        return self._coeffs.items()

    @property
    def exponents(self) -> list[int]:
        return list(self._coeffs)

    def is_zero(self) -> bool:
        return not self._coeffs

    @property
    def has_unknown(self) -> bool:
        return any(c.has_unknown for c in self._coeffs.values())

    def truncate(self, order: int) -> "Series":
        return Series(min(order, self.order), self._coeffs)

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self.order == other.order and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self.order, tuple(self._coeffs.items())))

    def __add__(self, other: "Series") -> "Series":
        return combine(self, other, 1, 1)

    def __sub__(self, other: "Series") -> "Series":
        return combine(self, other, 1, -1)

    def __neg__(self) -> "Series":
        return self.scale(-1)

    def scale(self, c) -> "Series":
        return Series(self.order, {k: v.scale(c) for k, v in self._coeffs.items()})

    def map(self, fn) -> "Series":
        return Series(self.order, {k: fn(v) for k, v in self._coeffs.items()})

    def __repr__(self):
        return f"Series(order={self.order}, {render_series(self)!r})"


def combine(a: Series, b: Series, ca=1, cb=1) -> Series:
    """``ca*a + cb*b`` truncated to the smaller order."""
    ca, cb = as_fraction(ca), as_fraction(cb)
    order = min(a.order, b.order)
    out: dict[int, XExpr] = {}
    for s, c in ((a, ca), (b, cb)):
        if not c:
            continue
        for k, v in s.items():
            if k <= order:
                out[k] = out.get(k, ZERO) + v.scale(c)
    return Series(order, out)


def integrate_yy(s: Series) -> Series:
    """Twice-iterated integral from 0 to y: ``y^k X -> y^(k+2) X / ((k+1)(k+2))``."""
    return Series(
        s.order,
        {k + 2: v.scale(Fraction(1, (k + 1) * (k + 2))) for k, v in s.items() if k + 2 <= s.order},
    )


def d2x(s: Series) -> Series:
    return s.map(lambda c: diff_x(c, 2))


def dx(s: Series) -> Series:
    return s.map(lambda c: diff_x(c, 1))


def dy(s: Series) -> Series:
    """y-derivative; the truncation order drops by one (floored at zero)."""
    return Series(max(s.order - 1, 0), {k - 1: v.scale(k) for k, v in s.items() if k >= 1})


def substitute(s: Series, g: XExpr) -> Series:
    """Replace the unknown trace g (and its derivatives) by ``g``."""
    return s.map(lambda c: substitute_unknown(c, g))


def coefficient_matrix(s: Series, x: np.ndarray) -> np.ndarray:
    """Rows ``k = 0..order`` holding ``coefficient(k)`` evaluated on ``x``."""
    x = np.asarray(x, dtype=float)
    mat = np.zeros((s.order + 1,) + x.shape)
    for k, c in s.items():
        mat[k] = eval_x(c, x)
    return mat


def eval_series(s: Series, x, y):
    """Value at ``(x, y)``; arrays broadcast together.

    Powers of y are accumulated in order of increasing k.
    """
    x_arr, y_arr = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    total = np.zeros(x_arr.shape)
    ypow = np.ones(y_arr.shape)
    for k in range(s.order + 1):
        c = s.coefficient(k)
        if c:
            total = total + ypow * eval_x(c, x_arr)
        ypow = ypow * y_arr
    if total.ndim == 0:
        return float(total)
    return total


def eval_grid(s: Series, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Values on the tensor grid, shape ``(len(ys), len(xs))``."""
    mat = coefficient_matrix(s, xs)
    out = np.zeros((len(ys), len(xs)))
    ypow = np.ones(len(ys))
    for k in range(s.order + 1):
        if s.coefficient(k):
            out += np.outer(ypow, mat[k])
        ypow = ypow * ys
    return out


def sup_bounds(s: Series, lx: float) -> dict[int, float]:
    """Per-exponent bound on ``sup_x |coefficient(k)|`` over ``[0, lx]``."""
    return {k: sup_bound(c, lx) for k, c in s.items()}


def render_series(s: Series, var: str = "x") -> str:
    if s.is_zero():
        return "0"
    parts = []
    for k, c in s.items():
        yk = "" if k == 0 else ("y" if k == 1 else f"y^{k}")
        body = render(c, var)
        if not yk:
            parts.append(f"({body})")
        else:
            parts.append(f"({body})*{yk}")
    return " + ".join(parts)


def series_to_json(s: Series, var: str = "x") -> list[dict]:
    return [{"k": k, "coefficient": render(c, var)} for k, c in s.items()]


def series_from_json(order: int, rows: list[dict], var: str = "x") -> Series:
    from .x_expr import parse_x

    return Series(order, {int(r["k"]): parse_x(r["coefficient"], var) for r in rows})
