"""Exact linear combinations of one-variable atoms.

An :class:`XExpr` is a finite sum ``coef * const * atom`` where ``coef`` is a
:class:`~fractions.Fraction`, ``const`` a :class:`NamedConst` (a product of
powers of pi and transcendental constants such as ``sinh(pi)``) and ``atom``
one of ``x^n, sin(ax), cos(ax), sinh(ax), cosh(ax)`` or ``g^(d)(x)``, the d-th
derivative of the unknown boundary trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import UnknownPresent

_KIND_RANK = {"pow": 0, "cos": 1, "sin": 2, "cosh": 3, "sinh": 4, "g": 5}
_TRIG = ("sin", "cos", "sinh", "cosh")
_ODD = ("sin", "sinh")
_NP_FUNCS = {"sin": np.sin, "cos": np.cos, "sinh": np.sinh, "cosh": np.cosh}
_MATH_FUNCS = {"sin": math.sin, "cos": math.cos, "sinh": math.sinh, "cosh": math.cosh}

# exact sin/cos at k*pi/2, indexed by k mod 4
_SIN_QUARTER = (0, 1, 0, -1)
_COS_QUARTER = (1, 0, -1, 0)


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("refusing implicit float -> Fraction conversion")
    return Fraction(value)


# --------------------------------------------------------------------------
# named constants
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NamedConst:
    """``pi**pi_power * prod(f(q [* pi]))`` held symbolically.

    ``factors`` is a sorted tuple of ``(fname, q, has_pi)`` with ``q > 0``.
    Repeated factors are allowed (``cosh(pi)**2`` has two entries).
    """

    pi_power: int = 0
    factors: tuple = ()

    @property
    def is_one(self) -> bool:
        return self.pi_power == 0 and not self.factors

    def __mul__(self, other: "NamedConst") -> "NamedConst":
        if self.is_one:
            return other
        if other.is_one:
            return self
        return NamedConst(
            self.pi_power + other.pi_power,
            tuple(sorted(self.factors + other.factors, key=_factor_key)),
        )

    def value(self) -> float:
        out = math.pi**self.pi_power
        for fname, q, has_pi in self.factors:
            arg = float(q) * (math.pi if has_pi else 1.0)
            out *= _MATH_FUNCS[fname](arg)
        return out

    def sort_key(self):
        return (self.pi_power, tuple(_factor_key(f) for f in self.factors))

    def render(self) -> str:
        parts = []
        if self.pi_power == 1:
            parts.append("pi")
        elif self.pi_power:
            parts.append(f"pi^{self.pi_power}")
        for fname, q, has_pi in self.factors:
            parts.append(f"{fname}({_render_scaled(q, 'pi' if has_pi else '')})")
        return "*".join(parts)


ONE = NamedConst()
PI = NamedConst(1, ())


def _factor_key(f):
    return (f[0], f[2], f[1])


def const_factor(fname: str, q, has_pi: bool = False) -> tuple[Fraction, NamedConst]:
    """Canonical ``(multiplier, const)`` with ``f(q [*pi]) == multiplier * const``.

    Parity moves the sign of ``q`` into the multiplier and sin/cos at
    multiples of pi/2 collapse to exact values.
    """
    q = as_fraction(q)
    sign = Fraction(1)
    if q < 0:
        q = -q
        if fname in _ODD:
            sign = -sign
    if q == 0:
        return (Fraction(0) if fname in _ODD else sign), ONE
    if has_pi and fname in ("sin", "cos") and (2 * q).denominator == 1:
        k = int(2 * q) % 4
        table = _SIN_QUARTER if fname == "sin" else _COS_QUARTER
        return sign * table[k], ONE
    return sign, NamedConst(0, ((fname, q, has_pi),))


def series_in_length(c: NamedConst, length, n_max: int) -> list[Fraction]:
    """Coefficients of ``c`` as a power series in a domain length ``L``.

    Every factor argument is rewritten as a rational multiple of ``L`` (which
    is how ``sinh(2*pi)`` is read as ``sinh(2L)`` when ``L = pi``).  Returns
    ``n_max + 1`` coefficients.  Raises :class:`UnsupportedForm` when a factor
    cannot be expressed through ``L``.
    """
    from .errors import UnsupportedForm

    out = [Fraction(0)] * (n_max + 1)
    out[0] = Fraction(1)
    if c.pi_power:
        if not length.has_pi or c.pi_power < 0:
            raise UnsupportedForm(f"cannot expand {c.render()} in powers of the side length")
        p = c.pi_power
        scale = Fraction(1) / length.q**p
        shifted = [Fraction(0)] * (n_max + 1)
        for n in range(n_max + 1 - p):
            shifted[n + p] = out[n] * scale
        out = shifted
    for fname, q, has_pi in c.factors:
        if has_pi != length.has_pi:
            raise UnsupportedForm(f"cannot expand {fname}({q}) in powers of the side length")
        a = q / length.q
        out = _truncated_product(out, taylor_coefficients(fname, a, n_max))
    return out


def _truncated_product(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    n = len(a)
    out = [Fraction(0)] * n
    for i, ai in enumerate(a):
        if ai:
            for j in range(n - i):
                if b[j]:
                    out[i + j] += ai * b[j]
    return out


def taylor_coefficients(fname: str, a, n_max: int) -> list[Fraction]:
    """Maclaurin coefficients of ``f(a t)`` for f in sin/cos/sinh/cosh."""
    a = as_fraction(a)
    out = []
    term = Fraction(1)  # a^n / n!
    for n in range(n_max + 1):
        if n:
            term = term * a / n
        if fname in ("cos", "cosh"):
            if n % 2:
                out.append(Fraction(0))
            else:
                sgn = (-1) ** (n // 2) if fname == "cos" else 1
                out.append(sgn * term)
        else:
            if n % 2 == 0:
                out.append(Fraction(0))
            else:
                sgn = (-1) ** (n // 2) if fname == "sin" else 1
                out.append(sgn * term)
    return out


# --------------------------------------------------------------------------
# atoms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class XAtom:
    kind: str
    n: int = 0
    freq: Fraction = Fraction(0)

    def sort_key(self):
        return (_KIND_RANK[self.kind], self.n, self.freq)

    @property
    def is_unknown(self) -> bool:
        return self.kind == "g"

    @property
    def is_const(self) -> bool:
        return self.kind == "pow" and self.n == 0

    def render(self, var: str = "x") -> str:
        if self.kind == "pow":
            if self.n == 0:
                return "1"
            return var if self.n == 1 else f"{var}^{self.n}"
        if self.kind == "g":
            if self.n <= 2:
                return "g" + "'" * self.n + f"({var})"
            return f"g^({self.n})({var})"
        return f"{self.kind}({_render_scaled(self.freq, var)})"


def power(n: int) -> XAtom:
    return XAtom("pow", n)


def unknown(d: int = 0) -> XAtom:
    return XAtom("g", d)


CONST_ATOM = power(0)


def trig_atom(kind: str, a) -> tuple[Fraction, XAtom]:
    """Canonical ``(sign, atom)`` for ``kind(a*x)``; a zero frequency folds to a constant."""
    a = as_fraction(a)
    if a == 0:
        return (Fraction(0) if kind in _ODD else Fraction(1)), CONST_ATOM
    if a < 0:
        return (Fraction(-1) if kind in _ODD else Fraction(1)), XAtom(kind, 0, -a)
    return Fraction(1), XAtom(kind, 0, a)


def _render_scaled(q: Fraction, var: str) -> str:
    if not var:
        return _render_fraction(q)
    if q == 1:
        return var
    return f"{_render_fraction(q)}*{var}"


def _render_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# --------------------------------------------------------------------------
# expressions
# --------------------------------------------------------------------------


def _term_key(item):
    (const, atom), _ = item
    return (atom.sort_key(), const.sort_key())


class XExpr:
    """Immutable normalized linear combination of atoms."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping | Iterable = ()):
        acc: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for key, coef in items:
            coef = as_fraction(coef)
            if coef:
                acc[key] = acc.get(key, Fraction(0)) + coef
        self._terms = tuple(sorted(((k, c) for k, c in acc.items() if c), key=_term_key))
        self._hash = None

    # construction helpers
    @classmethod
    def const(cls, value, const: NamedConst = ONE) -> "XExpr":
        return cls({(const, CONST_ATOM): value})

    @classmethod
    def atom(cls, atom: XAtom, coef=1, const: NamedConst = ONE) -> "XExpr":
        return cls({(const, atom): coef})

    @classmethod
    def trig(cls, kind: str, a, coef=1) -> "XExpr":
        sign, atom = trig_atom(kind, a)
        return cls({(ONE, atom): sign * as_fraction(coef)})

    @property
    def terms(self) -> tuple:
        """Sorted ``((const, atom), coef)`` pairs."""
        return self._terms

    def as_dict(self) -> dict:
        return dict(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, XExpr):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    def __repr__(self):
        return f"XExpr({render(self)!r})"

    def __add__(self, other: "XExpr") -> "XExpr":
        return XExpr(list(self._terms) + list(other._terms))

    def __sub__(self, other: "XExpr") -> "XExpr":
        return self + other.scale(-1)

    def __neg__(self) -> "XExpr":
        return self.scale(-1)

    def scale(self, c, const: NamedConst = ONE) -> "XExpr":
        c = as_fraction(c)
        if not c:
            return ZERO
        if const.is_one:
            return XExpr([(k, v * c) for k, v in self._terms])
        return XExpr([((k[0] * const, k[1]), v * c) for k, v in self._terms])

    @property
    def has_unknown(self) -> bool:
        return any(atom.is_unknown for (_, atom), _ in self._terms)

    def unknown_orders(self) -> list[int]:
        return sorted({atom.n for (_, atom), _ in self._terms if atom.is_unknown})

    def split_unknown(self) -> tuple["XExpr", dict]:
        """Separate into the known part and ``{d: coefficient}`` on each ``g^(d)``.

        Coefficients are XExprs of constant atoms (they may carry named constants).
        """
        known, unk = [], {}
        for (const, atom), coef in self._terms:
            if atom.is_unknown:
                unk.setdefault(atom.n, []).append(((const, CONST_ATOM), coef))
            else:
                known.append(((const, atom), coef))
        return XExpr(known), {d: XExpr(v) for d, v in unk.items()}

    def constant_value(self) -> float:
        """Float value of an expression built only from constant atoms."""
        total = 0.0
        for (const, atom), coef in self._terms:
            if not atom.is_const:
                raise ValueError(f"{render(self)} is not constant")
            total += float(coef) * const.value()
        return total

    @property
    def is_rational_constant(self) -> bool:
        return all(c.is_one and a.is_const for (c, a), _ in self._terms)

    def consts(self) -> set:
        return {c for (c, _), _ in self._terms}

    def frequencies(self) -> set:
        return {a.freq for (_, a), _ in self._terms if a.kind in _TRIG}


ZERO = XExpr()


def normalize(e: XExpr | Iterable) -> XExpr:
    """Canonical form; idempotent.  XExprs are normalized at construction."""
    if isinstance(e, XExpr):
        return XExpr(e.terms)
    return XExpr(e)


# --------------------------------------------------------------------------
# calculus
# --------------------------------------------------------------------------


def _diff_atom(atom: XAtom) -> list[tuple[Fraction, XAtom]]:
    k, a = atom.kind, atom.freq
    if k == "pow":
        return [] if atom.n == 0 else [(Fraction(atom.n), power(atom.n - 1))]
    if k == "g":
        return [(Fraction(1), unknown(atom.n + 1))]
    if k == "sin":
        return [(a, XAtom("cos", 0, a))]
    if k == "cos":
        return [(-a, XAtom("sin", 0, a))]
    if k == "sinh":
        return [(a, XAtom("cosh", 0, a))]
    return [(a, XAtom("sinh", 0, a))]


def diff_x(e: XExpr, order: int = 1) -> XExpr:
    if order < 1:
        raise ValueError("order must be >= 1")
    terms = e.terms
    for _ in range(order):
        out = []
        for (const, atom), coef in terms:
            for c, new_atom in _diff_atom(atom):
                out.append(((const, new_atom), coef * c))
        terms = XExpr(out).terms
    return XExpr(terms)


def antideriv_x(e: XExpr) -> XExpr:
    """Term-wise antiderivative with zero integration constant."""
    out = []
    for (const, atom), coef in e.terms:
        k, a = atom.kind, atom.freq
        if k == "g":
            raise UnknownPresent("cannot integrate an unknown-trace derivative")
        if k == "pow":
            out.append(((const, power(atom.n + 1)), coef / (atom.n + 1)))
        elif k == "sin":
            out.append(((const, XAtom("cos", 0, a)), -coef / a))
        elif k == "cos":
            out.append(((const, XAtom("sin", 0, a)), coef / a))
        elif k == "sinh":
            out.append(((const, XAtom("cosh", 0, a)), coef / a))
        else:
            out.append(((const, XAtom("sinh", 0, a)), coef / a))
    return XExpr(out)


def eval_atom(atom: XAtom, x):
    if atom.kind == "g":
        raise UnknownPresent("cannot evaluate the unknown trace g")
    if atom.kind == "pow":
        return x**atom.n
    if isinstance(x, np.ndarray):
        return _NP_FUNCS[atom.kind](float(atom.freq) * x)
    return _MATH_FUNCS[atom.kind](float(atom.freq) * x)


def eval_x(e: XExpr, x):
    """Floating-point value of ``e`` at ``x`` (scalar or ndarray)."""
    if isinstance(x, np.ndarray):
        total = np.zeros(x.shape, dtype=float)
    else:
        x = float(x)
        total = 0.0
    for (const, atom), coef in e.terms:
        total = total + (float(coef) * const.value()) * eval_atom(atom, x)
    return total


def substitute_unknown(e: XExpr, g: XExpr) -> XExpr:
    """Replace every ``g^(d)`` by the d-th derivative of ``g``."""
    if not e.has_unknown:
        return e
    if g.has_unknown:
        raise ValueError("replacement for g must be unknown-free")
    known, unk = e.split_unknown()
    out = known
    derivs = {0: g}
    for d in sorted(unk):
        if d not in derivs:
            derivs[d] = diff_x(g, d) if d else g
        gd = derivs[d]
        for (const, _), coef in unk[d].terms:
            out = out + gd.scale(coef, const)
    return out


def sup_bound(e: XExpr, length: float) -> float:
    """Triangle-inequality bound on ``sup |e(x)|`` over ``[0, length]``."""
    total = 0.0
    for (const, atom), coef in e.terms:
        c = abs(float(coef) * const.value())
        k = atom.kind
        if k == "g":
            raise UnknownPresent("cannot bound the unknown trace g")
        if k == "pow":
            s = length**atom.n
        elif k in ("sin", "cos"):
            s = 1.0
        else:
            s = _MATH_FUNCS[k](float(atom.freq) * length)
        total += c * s
    return total


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------


def render_term(coef: Fraction, const: NamedConst, atom: XAtom, var: str = "x", first: bool = True) -> str:
    neg = coef < 0
    mag = -coef if neg else coef
    factors = []
    if mag != 1 or (const.is_one and atom.is_const):
        factors.append(_render_fraction(mag))
    if not const.is_one:
        factors.append(const.render())
    if not atom.is_const:
        factors.append(atom.render(var))
    body = "*".join(factors)
    if first:
        return f"-{body}" if neg else body
    return f" - {body}" if neg else f" + {body}"


def render(e: XExpr, var: str = "x") -> str:
    if not e:
        return "0"
    return "".join(
        render_term(coef, const, atom, var, i == 0)
        for i, ((const, atom), coef) in enumerate(e.terms)
    )


def parse_x(text: str, var: str = "x") -> XExpr:
    from .parser import parse_univariate

    return parse_univariate(text, var)
