"""Exact multivariate polynomials over the rationals.

Polynomials are immutable: a tuple of variable names plus a mapping from
exponent tuples to nonzero coefficients.  Coefficients are ``Fraction`` in
the exact kind and ``float`` in the numeric mirror used around the solver.

    >>> x, y = variables("x, y")
    >>> print((x + y) ** 2)
    x^2 + 2*x*y + y^2
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Mapping, Sequence

Monomial = tuple[int, ...]

ORDERS = ("grevlex", "grlex", "lex")


def grevlex_key(m: Monomial):
    return (sum(m), tuple(-e for e in reversed(m)))


def grlex_key(m: Monomial):
    return (sum(m), m)


def lex_key(m: Monomial):
    return m


_ORDER_KEYS: dict[str, Callable] = {
    "grevlex": grevlex_key,
    "grlex": grlex_key,
    "lex": lex_key,
}


def order_key(order: str) -> Callable:
    """Sort key for ``order``; larger key means larger monomial."""
    try:
        return _ORDER_KEYS[order]
    except KeyError:
        raise ValueError(f"unknown monomial order {order!r}") from None


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(i + j for i, j in zip(a, b))


def mono_divides(a: Monomial, b: Monomial) -> bool:
    """True if ``a`` divides ``b``."""
    return all(i <= j for i, j in zip(a, b))


def mono_div(a: Monomial, b: Monomial) -> Monomial:
    return tuple(i - j for i, j in zip(a, b))


def mono_lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(i, j) for i, j in zip(a, b))


def monomials_up_to(nvars: int, maxdeg: int, order: str = "grevlex") -> list[Monomial]:
    """All monomials of total degree <= ``maxdeg``, ascending in ``order``."""
    out = [m for d in range(maxdeg + 1) for m in monomials_of_degree(nvars, d)]
    return sorted(out, key=order_key(order))


def monomials_of_degree(nvars: int, deg: int) -> list[Monomial]:
    if nvars == 0:
        return [()] if deg == 0 else []
    out = []
    for c in itertools.combinations_with_replacement(range(nvars), deg):
        e = [0] * nvars
        for i in c:
            e[i] += 1
        out.append(tuple(e))
    return out


def _coerce(c):
    if isinstance(c, float):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"unsupported coefficient {c!r}")


class Polynomial:
    """Sparse polynomial in a fixed list of variables.

    Arithmetic between polynomials requires identical variable tuples; use
    :meth:`in_vars` to move a polynomial into a larger ring.
    """

    __slots__ = ("vars", "_terms", "_hash")

    def __init__(self, vars: Sequence[str], terms: Mapping[Monomial, object] | None = None):
        self.vars = tuple(vars)
        n = len(self.vars)
        clean: dict[Monomial, object] = {}
        for m, c in (terms or {}).items():
            m = tuple(m)
            if len(m) != n:
                raise ValueError(f"monomial {m} does not match {n} variables")
            c = _coerce(c)
            if c != 0:
                clean[m] = c
        self._terms = clean
        self._hash = None

    # construction helpers
    @classmethod
    def constant(cls, vars: Sequence[str], c) -> "Polynomial":
        return cls(vars, {(0,) * len(vars): c})

    @classmethod
    def monomial(cls, vars: Sequence[str], m: Monomial, c=1) -> "Polynomial":
        return cls(vars, {m: c})

    @classmethod
    def var(cls, vars: Sequence[str], name: str) -> "Polynomial":
        i = list(vars).index(name)
        m = [0] * len(vars)
        m[i] = 1
        return cls(vars, {tuple(m): 1})

    @property
    def terms(self) -> dict[Monomial, object]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, m: Monomial):
        return self._terms.get(tuple(m), 0)

    def monomials(self, order: str = "grevlex") -> list[Monomial]:
        """Support, descending in ``order``."""
        return sorted(self._terms, key=order_key(order), reverse=True)

    def is_zero(self) -> bool:
        return not self._terms

    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self._terms.values())

    def __len__(self):
        return len(self._terms)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(m) for m in self._terms), default=-1)

    def degree_in(self, var: str) -> int:
        i = self.vars.index(var)
        return max((m[i] for m in self._terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(m) for m in self._terms}) <= 1

    def leading_monomial(self, order: str = "grevlex") -> Monomial:
        if not self._terms:
            raise ValueError("zero polynomial has no leading monomial")
        return max(self._terms, key=order_key(order))

    def leading_coefficient(self, order: str = "grevlex"):
        return self._terms[self.leading_monomial(order)]

    def variables_used(self) -> set[str]:
        used = set()
        for m in self._terms:
            used.update(v for v, e in zip(self.vars, m) if e)
        return used

    # arithmetic
    def _check(self, other: "Polynomial"):
        if other.vars != self.vars:
            raise ValueError(f"ring mismatch: {self.vars} vs {other.vars}")

    def _lift(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return Polynomial.constant(self.vars, other)

    def __add__(self, other):
        other = self._lift(other)
        t = dict(self._terms)
        for m, c in other._terms.items():
            t[m] = t.get(m, 0) + c
        return Polynomial(self.vars, t)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.vars, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = _coerce(other)
            return Polynomial(self.vars, {m: a * c for m, a in self._terms.items()})
        self._check(other)
        t: dict[Monomial, object] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = mono_mul(m1, m2)
                t[m] = t.get(m, 0) + c1 * c2
        return Polynomial(self.vars, t)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Polynomial):
            if other.degree() > 0:
                raise ValueError("division by a non-constant polynomial")
            other = other.coefficient((0,) * len(self.vars))
        if other == 0:
            raise ZeroDivisionError("polynomial division by zero")
        c = 1 / other if isinstance(other, float) else Fraction(1) / _coerce(other)
        return self * c

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        out = Polynomial.constant(self.vars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.vars == other.vars and self._terms == other._terms
        if isinstance(other, (int, Rational, float)):
            return self == Polynomial.constant(self.vars, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self._terms.items())))
        return self._hash

    # evaluation and substitution
    def __call__(self, *point):
        return self.evaluate(point)

    def evaluate(self, point: Sequence | Mapping[str, object]):
        if isinstance(point, Mapping):
            point = [point[v] for v in self.vars]
        if len(point) != len(self.vars):
            raise ValueError("point dimension does not match the ring")
        total = 0
        for m, c in self._terms.items():
            term = c
            for a, e in zip(point, m):
                if e:
                    term = term * a**e
            total = total + term
        return total

    def substitute(self, assignment: Mapping[str, object], vars: Sequence[str] | None = None) -> "Polynomial":
        """Replace every variable of ``self`` by a polynomial (or scalar) in ``vars``.

        ``vars`` defaults to the ring of the first polynomial value in the
        assignment, else to this polynomial's ring.
        """
        missing = self.variables_used() - set(assignment)
        if missing:
            raise KeyError(f"unassigned variable(s): {', '.join(sorted(missing))}")
        if vars is None:
            polys = [v for v in assignment.values() if isinstance(v, Polynomial)]
            vars = polys[0].vars if polys else self.vars
        vars = tuple(vars)
        images = []
        for v in self.vars:
            a = assignment.get(v, 0)
            images.append(a.in_vars(vars) if isinstance(a, Polynomial) else Polynomial.constant(vars, a))
        out = Polynomial(vars)
        powers: dict[tuple[int, int], Polynomial] = {}
        for m, c in self._terms.items():
            term = Polynomial.constant(vars, c)
            for i, e in enumerate(m):
                if e:
                    if (i, e) not in powers:
                        powers[i, e] = images[i] ** e
                    term = term * powers[i, e]
            out = out + term
        return out

    def in_vars(self, vars: Sequence[str]) -> "Polynomial":
        """Same polynomial viewed in another variable list."""
        vars = tuple(vars)
        if vars == self.vars:
            return self
        idx = {v: i for i, v in enumerate(vars)}
        t = {}
        for m, c in self._terms.items():
            e = [0] * len(vars)
            for v, k in zip(self.vars, m):
                if k:
                    if v not in idx:
                        raise ValueError(f"variable {v} not in target ring")
                    e[idx[v]] = k
            t[tuple(e)] = c
        return Polynomial(vars, t)

    # numeric mirror
    def to_float(self) -> "Polynomial":
        return Polynomial(self.vars, {m: float(c) for m, c in self._terms.items()})

    def to_exact(self) -> "Polynomial":
        return Polynomial(self.vars, {m: Fraction(c) for m, c in self._terms.items()})

    def max_abs_coefficient(self) -> float:
        return max((abs(float(c)) for c in self._terms.values()), default=0.0)

    # printing
    def __str__(self):
        return format_polynomial(self)

    def __repr__(self):
        return f"Polynomial({self.vars!r}, {format_polynomial(self)!r})"


def format_monomial(vars: Sequence[str], m: Monomial) -> str:
    parts = []
    for v, e in zip(vars, m):
        if e == 1:
            parts.append(v)
        elif e > 1:
            parts.append(f"{v}^{e}")
    return "*".join(parts)


def _format_coeff(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return repr(c)


def format_polynomial(p: Polynomial, order: str = "grevlex") -> str:
    """Canonical text: terms in decreasing monomial order, reparseable."""
    if p.is_zero():
        return "0"
    out = []
    for m in p.monomials(order):
        c = p.coefficient(m)
        neg = c < 0
        a = -c if neg else c
        mono = format_monomial(p.vars, m)
        if not mono:
            body = _format_coeff(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_format_coeff(a)}*{mono}"
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append(("- " if neg else "+ ") + body)
    return " ".join(out)


def variables(names: str | Iterable[str]) -> tuple[Polynomial, ...]:
    """Generators of the ring on ``names`` (comma/space separated or a list)."""
    if isinstance(names, str):
        names = [s for s in re.split(r"[,\s]+", names) if s]
    names = tuple(names)
    return tuple(Polynomial.var(names, v) for v in names)


# parsing

class PolynomialSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise PolynomialSyntaxError(f"unexpected character {text[pos:].lstrip()[0]!r}",
                                        len(text) - len(text[pos:].lstrip()))
        start = m.start(m.lastindex)
        kind = ("num", "name", "op")[m.lastindex - 1]
        val = m.group(m.lastindex)
        if val == "**":
            val = "^"
        tokens.append((kind, val, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    # expr := term (('+'|'-') term)* ; term := unary (('*'|'/') unary)*
    # unary := ('+'|'-') unary | power ; power := atom ('^' int)?
    def __init__(self, text: str, vars: tuple[str, ...]):
        self.toks = _tokenize(text)
        self.i = 0
        self.vars = vars

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def parse(self) -> Polynomial:
        p = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise PolynomialSyntaxError(f"unexpected {val!r}", pos)
        return p

    def expr(self):
        p = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self):
        p = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op, pos = self.take()[1:]
            q = self.unary()
            if op == "*":
                p = p * q
            else:
                if q.degree() > 0:
                    raise PolynomialSyntaxError("division by a non-constant", pos)
                if q.is_zero():
                    raise PolynomialSyntaxError("division by zero", pos)
                p = p / q
        return p

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in ("+", "-"):
            self.take()
            p = self.unary()
            return -p if val == "-" else p
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "num" or "." in val:
                raise PolynomialSyntaxError("exponent must be a nonnegative integer", pos)
            base = base ** int(val)
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Polynomial.constant(self.vars, Fraction(val))
        if kind == "name":
            if val not in self.vars:
                raise PolynomialSyntaxError(f"unknown variable {val!r}", pos)
            return Polynomial.var(self.vars, val)
        if val == "(":
            p = self.expr()
            k, v, pos2 = self.take()
            if v != ")":
                raise PolynomialSyntaxError("expected ')'", pos2)
            return p
        raise PolynomialSyntaxError(f"unexpected {val or 'end of input'!r}", pos)


def parse_polynomial(text: str, vars: str | Sequence[str]) -> Polynomial:
    """Parse ``text`` into an exact polynomial over ``vars``.

    Accepts integer and decimal literals, ``+ - * / ^`` (``**`` too) and
    parentheses; ``/`` only by constants.
    """
    if isinstance(vars, str):
        vars = [s for s in re.split(r"[,\s]+", vars) if s]
    return _Parser(text, tuple(vars)).parse()


# sums of squares

@dataclass(frozen=True)
class SOSPoly:
    """``sum(w * g**2 for w, g in zip(weights, generators))`` with positive weights."""

    weights: tuple[Fraction, ...]
    generators: tuple[Polynomial, ...]

    def __init__(self, weights: Iterable = (), generators: Iterable[Polynomial] = ()):
        weights = tuple(Fraction(w) for w in weights)
        generators = tuple(generators)
        if len(weights) != len(generators):
            raise ValueError("weights and generators differ in length")
        if any(w <= 0 for w in weights):
            raise ValueError("SOS weights must be positive")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "generators", generators)

    def __len__(self):
        return len(self.weights)

    def expand(self, vars: Sequence[str] | None = None) -> Polynomial:
        return expand_sos(self, vars)

    def __str__(self):
        w = ", ".join(_format_coeff(c) for c in self.weights)
        g = ", ".join(str(p) for p in self.generators)
        return f"coeffs: {{{w}}}\ngens: {{{g}}}"


def expand_sos(s: SOSPoly, vars: Sequence[str] | None = None) -> Polynomial:
    """Exact expansion of ``s``; ``vars`` fixes the ring for an empty ``s``."""
    if vars is None:
        vars = s.generators[0].vars if s.generators else ()
    out = Polynomial(vars)
    for w, g in zip(s.weights, s.generators):
        out = out + (g * g) * w
    return out


def product(polys: Iterable[Polynomial], vars: Sequence[str]) -> Polynomial:
    out = Polynomial.constant(vars, 1)
    for p in polys:
        out = out * p
    return out


def binomial_count(nvars: int, d: int) -> int:
    """Number of monomials of degree <= d in ``nvars`` variables."""
    return math.comb(nvars + d, d)
