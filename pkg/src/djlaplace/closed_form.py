"""Separable closed forms ``sum c * K * X(x) * Y(y) + C0``."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .x_expr import (
    CONST_ATOM,
    ONE,
    XAtom,
    XExpr,
    diff_x,
    eval_atom,
    taylor_coefficients,
)
from .y_series import Series


def _sort_key(item):
    (c, ax, ay), _ = item
    return (ax.sort_key(), ay.sort_key(), c.sort_key())


class ClosedForm:
    __slots__ = ("terms", "free")

    def __init__(self, terms: dict | None = None, free: dict | None = None):
        acc: dict = {}
        for k, v in (terms or {}).items():
            if v:
                acc[k] = acc.get(k, Fraction(0)) + v
        self.terms = tuple(sorted(((k, v) for k, v in acc.items() if v), key=_sort_key))
        self.free = tuple(sorted((k, Fraction(v)) for k, v in (free or {}).items() if v))

    @classmethod
    def parse(cls, text: str) -> "ClosedForm":
        from .parser import parse_bivariate

        terms, free = parse_bivariate(text)
        return cls(terms, free)

    def __eq__(self, other):
        if not isinstance(other, ClosedForm):
            return NotImplemented
        return self.terms == other.terms and self.free == other.free

    def __hash__(self):
        return hash((self.terms, self.free))

    def __repr__(self):
        return f"ClosedForm({self.render()!r})"

    @property
    def free_names(self) -> list[str]:
        return [name for name, _ in self.free]

    def with_free(self, name: str = "C0") -> "ClosedForm":
        free = dict(self.free)
        free.setdefault(name, Fraction(1))
        return ClosedForm(dict(self.terms), free)

    def render(self) -> str:
        pieces = []
        for (c, ax, ay), v in self.terms:
            factors = [] if c.is_one else [c.render()]
            factors += [a.render(var) for a, var in ((ax, "x"), (ay, "y")) if not a.is_const]
            pieces.append((v, factors))
        for name, v in self.free:
            pieces.append((v, [name]))
        if not pieces:
            return "0"
        out = []
        for i, (v, factors) in enumerate(pieces):
            mag = abs(v)
            if mag != 1 or not factors:
                factors = [_fmt(mag)] + factors
            body = "*".join(factors)
            if i == 0:
                out.append(f"-{body}" if v < 0 else body)
            else:
                out.append(f" - {body}" if v < 0 else f" + {body}")
        return "".join(out)

    def evaluate(self, x, y, constants: dict | None = None, dtype=float):
        """Values on broadcast arrays; ``dtype=np.longdouble`` for extended precision."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=dtype), np.asarray(y, dtype=dtype))
        out = np.zeros(x.shape, dtype=dtype)
        for (c, ax, ay), v in self.terms:
            out = out + dtype(float(v) * c.value()) * eval_atom(ax, x) * eval_atom(ay, y)
        for name, v in self.free:
            out = out + dtype(float(v) * float((constants or {}).get(name, 0)))
        return out

    def transpose(self) -> "ClosedForm":
        return ClosedForm({(c, ay, ax): v for (c, ax, ay), v in self.terms}, dict(self.free))

    def laplacian(self) -> dict:
        """Symbolic ``u_xx + u_yy`` as a term map (empty iff harmonic)."""
        acc: dict = {}
        for (c, ax, ay), v in self.terms:
            for (_, dax), dv in diff_x(XExpr.atom(ax), 2).terms:
                acc[(c, dax, ay)] = acc.get((c, dax, ay), Fraction(0)) + v * dv
            for (_, day), dv in diff_x(XExpr.atom(ay), 2).terms:
                acc[(c, ax, day)] = acc.get((c, ax, day), Fraction(0)) + v * dv
        return {k: v for k, v in acc.items() if v}

    @property
    def harmonic(self) -> bool:
        return not self.laplacian()

    def to_series(self, order: int, constants: dict | None = None) -> Series:
        """Taylor re-expansion in y up to ``order``."""
        acc: dict[int, list] = {}
        for (c, ax, ay), v in self.terms:
            for k, t in enumerate(_y_taylor(ay, order)):
                if t:
                    acc.setdefault(k, []).append(((c, ax), v * t))
        for name, v in self.free:
            val = Fraction((constants or {}).get(name, 0))
            if val:
                acc.setdefault(0, []).append(((ONE, CONST_ATOM), v * val))
        return Series(order, {k: XExpr(items) for k, items in acc.items()})


def _y_taylor(atom: XAtom, order: int) -> list[Fraction]:
    if atom.kind == "pow":
        out = [Fraction(0)] * (order + 1)
        if atom.n <= order:
            out[atom.n] = Fraction(1)
        return out
    if atom.kind == "g":
        raise ValueError("closed forms cannot contain the unknown trace")
    return taylor_coefficients(atom.kind, atom.freq, order)


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
