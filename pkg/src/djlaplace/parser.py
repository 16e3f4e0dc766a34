"""Recursive-descent parser for the boundary-data expression grammar.

Grammar (whitespace insignificant)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := primary ('^' unary)?
    primary := NUMBER | 'pi' | VAR | FUNC '(' expr ')' | '(' expr ')'
             | 'g' ("'"* | '^(' INT ')') '(' VAR ')'      (univariate only)
             | 'C' INT                                    (closed forms only)

Function arguments must be affine, ``c*var + b``, with ``c`` rational and
``b`` a rational or a rational multiple of pi; shifts are expanded with the
addition formulas.  Products of non-constant atoms are rejected except
monomials ``var^n`` (and, in closed forms, one x-atom times one y-atom).
"""

from __future__ import annotations

import re
from decimal import Decimal
from fractions import Fraction

from .errors import ExprSyntaxError, UnsupportedForm
from .x_expr import (
    CONST_ATOM,
    ONE,
    PI,
    XAtom,
    XExpr,
    const_factor,
    power,
    trig_atom,
    unknown,
)

FUNCS = ("sin", "cos", "sinh", "cosh")
_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()']))"
)
_MAX_POWER = 64


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            stripped = len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[pos + stripped]!r}", text, pos + stripped)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Poly:
    """Sparse map ``(const, atoms-per-var, free-name) -> Fraction``."""

    __slots__ = ("terms", "nvars")

    def __init__(self, nvars: int, terms=None):
        self.nvars = nvars
        self.terms: dict = {}
        for key, c in (terms or {}).items() if isinstance(terms, dict) else (terms or ()):
            if c:
                self.terms[key] = self.terms.get(key, Fraction(0)) + c
        self.terms = {k: v for k, v in self.terms.items() if v}

    @classmethod
    def scalar(cls, nvars, value, const=ONE):
        return cls(nvars, {(const, (CONST_ATOM,) * nvars, None): Fraction(value)})

    @classmethod
    def atom(cls, nvars, index, atom, coef=Fraction(1), const=ONE):
        atoms = [CONST_ATOM] * nvars
        atoms[index] = atom
        return cls(nvars, {(const, tuple(atoms), None): coef})

    def add(self, other, sign=1):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + sign * v
        return _Poly(self.nvars, out)

    def mul(self, other, pos, text):
        out = {}
        for (c1, a1, f1), v1 in self.terms.items():
            for (c2, a2, f2), v2 in other.terms.items():
                if f1 is not None or f2 is not None:
                    plain = (c2, a2) if f1 is not None else (c1, a1)
                    if f1 is not None and f2 is not None or not plain[0].is_one or any(not a.is_const for a in plain[1]):
                        raise UnsupportedForm(f"free constants may only be scaled by numbers (position {pos})")
                    free = f1 if f1 is not None else f2
                else:
                    free = None
                atoms = tuple(_mul_atom(x, y, pos) for x, y in zip(a1, a2))
                key = (c1 * c2, atoms, free)
                out[key] = out.get(key, Fraction(0)) + v1 * v2
        return _Poly(self.nvars, out)

    def rational_value(self):
        """The value if this is a plain rational number, else ``None``."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1:
            ((c, atoms, free), v), = self.terms.items()
            if c.is_one and free is None and all(a.is_const for a in atoms):
                return v
        return None


def _mul_atom(a: XAtom, b: XAtom, pos) -> XAtom:
    if a.is_const:
        return b
    if b.is_const:
        return a
    if a.kind == "pow" and b.kind == "pow":
        return power(a.n + b.n)
    raise UnsupportedForm(f"product of atoms {a.render()} and {b.render()} is outside the dictionary (position {pos})")


class _Parser:
    def __init__(self, text: str, variables: tuple[str, ...], allow_unknown: bool, allow_free: bool):
        self.text = text
        self.vars = variables
        self.n = len(variables)
        self.allow_unknown = allow_unknown
        self.allow_free = allow_free
        self.toks = _tokenize(text)
        self.i = 0

    # token helpers
    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ExprSyntaxError(f"expected {value!r}, found {what}", self.text, tok[2])
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ExprSyntaxError(msg, self.text, tok[2])

    # grammar
    def parse(self) -> _Poly:
        if self.peek()[0] == "end":
            raise self.error("empty expression")
        out = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return out

    def expr(self):
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.term()
            left = left.add(right, 1 if op == "+" else -1)
        return left

    def term(self):
        left = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            tok = self.take()
            right = self.unary()
            if tok[1] == "*":
                left = left.mul(right, tok[2], self.text)
            else:
                d = right.rational_value()
                if d is None:
                    raise UnsupportedForm(f"division only by rational numbers (position {tok[2]})")
                if d == 0:
                    raise self.error("division by zero", tok)
                left = left.mul(_Poly.scalar(self.n, 1 / d), tok[2], self.text)
        return left

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("+", "-"):
            self.take()
            val = self.unary()
            return val if tok[1] == "+" else _Poly(self.n).add(val, -1)
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            tok = self.take()
            exponent = self.unary().rational_value()
            if exponent is None or exponent.denominator != 1 or exponent < 0:
                raise UnsupportedForm(f"exponent must be a non-negative integer (position {tok[2]})")
            if exponent > _MAX_POWER:
                raise UnsupportedForm(f"exponent {exponent} too large (position {tok[2]})")
            out = _Poly.scalar(self.n, 1)
            for _ in range(int(exponent)):
                out = out.mul(base, tok[2], self.text)
            return out
        return base

    def primary(self):
        tok = self.take()
        kind, val, pos = tok
        if kind == "num":
            return _Poly.scalar(self.n, Fraction(Decimal(val)))
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "name":
            if val == "pi":
                return _Poly.scalar(self.n, 1, PI)
            if val in self.vars:
                return _Poly.atom(self.n, self.vars.index(val), power(1))
            if val in FUNCS:
                self.expect("(")
                arg_start = self.peek()
                arg = self.expr()
                self.expect(")")
                return self.apply(val, arg, arg_start)
            if val == "g" and self.allow_unknown:
                return self.unknown_atom(tok)
            if self.allow_free and re.fullmatch(r"C\d+", val):
                return _Poly(self.n, {(ONE, (CONST_ATOM,) * self.n, val): Fraction(1)})
            raise ExprSyntaxError(f"unknown name {val!r}", self.text, pos)
        what = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {what}", self.text, pos)

    def unknown_atom(self, tok):
        order = 0
        while self.peek()[1] == "'":
            self.take()
            order += 1
        if self.peek()[1] == "^":
            self.take()
            self.expect("(")
            num = self.take()
            if num[0] != "num" or not num[1].isdigit():
                raise self.error("expected derivative order", num)
            order += int(num[1])
            self.expect(")")
        self.expect("(")
        v = self.take()
        if v[1] != self.vars[0]:
            raise self.error(f"g takes the variable {self.vars[0]!r}", v)
        self.expect(")")
        return _Poly.atom(self.n, 0, unknown(order))

    def apply(self, fname, arg: _Poly, arg_tok):
        pos = arg_tok[2]
        freq_index, freq = None, Fraction(0)
        shift_rat, shift_pi = Fraction(0), Fraction(0)
        for (c, atoms, free), v in arg.terms.items():
            nonconst = [i for i, a in enumerate(atoms) if not a.is_const]
            if free is not None:
                raise UnsupportedForm(f"free constant inside {fname}() (position {pos})")
            if not nonconst:
                if c.is_one:
                    shift_rat += v
                elif c == PI:
                    shift_pi += v
                else:
                    raise UnsupportedForm(f"argument of {fname} must be rational or a rational multiple of pi (position {pos})")
                continue
            (i,) = nonconst if len(nonconst) == 1 else (None,)
            if i is None or atoms[i] != power(1):
                raise UnsupportedForm(f"non-linear argument in {fname}() (position {pos})")
            if not c.is_one:
                raise UnsupportedForm(f"frequency in {fname}() must be rational (position {pos})")
            if freq_index is not None and freq_index != i:
                raise UnsupportedForm(f"argument of {fname} mixes variables (position {pos})")
            freq_index, freq = i, freq + v
        if shift_rat and shift_pi:
            raise UnsupportedForm(f"argument shift of {fname} must be rational or a rational multiple of pi (position {pos})")
        shift, shift_has_pi = (shift_pi, True) if shift_pi else (shift_rat, False)

        if freq_index is None or freq == 0:
            m, c = const_factor(fname, shift, shift_has_pi)
            return _Poly.scalar(self.n, m, c)

        # addition formulas: f(a v + b) = f(a v) P(b) + f'(a v) Q(b)
        partner = {"sin": "cos", "cos": "sin", "sinh": "cosh", "cosh": "sinh"}[fname]
        out = _Poly(self.n)
        pieces = [(fname, {"sin": "cos", "cos": "cos", "sinh": "cosh", "cosh": "cosh"}[fname], 1),
                  (partner, {"sin": "sin", "cos": "sin", "sinh": "sinh", "cosh": "sinh"}[fname],
                   -1 if fname == "cos" else 1)]
        for atom_kind, const_kind, sgn in pieces:
            if shift == 0 and atom_kind != fname:
                continue
            cm, cc = (Fraction(1), ONE) if shift == 0 else const_factor(const_kind, shift, shift_has_pi)
            am, atom = trig_atom(atom_kind, freq)
            coef = sgn * cm * am
            if coef:
                out = out.add(_Poly.atom(self.n, freq_index, atom, coef, cc))
        return out


def _to_xexpr(poly: _Poly) -> XExpr:
    return XExpr({(c, atoms[0]): v for (c, atoms, _), v in poly.terms.items()})


def parse_univariate(text: str, var: str = "x", allow_unknown: bool = True) -> XExpr:
    """Parse ``text`` in the single free variable ``var``; result is normalized."""
    poly = _Parser(text, (var,), allow_unknown, False).parse()
    return _to_xexpr(poly)


def parse_bivariate(text: str):
    """Parse a closed form in ``x`` and ``y``.

    Returns ``(terms, free)`` where ``terms`` maps ``(const, xatom, yatom)`` to
    a Fraction and ``free`` maps free-constant names (``C0``) to coefficients.
    """
    poly = _Parser(text, ("x", "y"), False, True).parse()
    terms, free = {}, {}
    for (c, (ax, ay), name), v in poly.terms.items():
        if name is not None:
            free[name] = free.get(name, Fraction(0)) + v
        else:
            terms[(c, ax, ay)] = terms.get((c, ax, ay), Fraction(0)) + v
    return {k: v for k, v in terms.items() if v}, {k: v for k, v in free.items() if v}
