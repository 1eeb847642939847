"""Buchberger's algorithm and normal forms over the rationals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .poly import (
    Monomial,
    Polynomial,
    mono_div,
    mono_divides,
    mono_lcm,
    mono_mul,
    monomials_up_to,
    order_key,
)


@dataclass(frozen=True)
class GroebnerBasis:
    generators: tuple[Polynomial, ...]
    vars: tuple[str, ...]
    order: str = "grevlex"
    reduced: bool = True

    def leading_monomials(self) -> list[Monomial]:
        return [g.leading_monomial(self.order) for g in self.generators]

    def is_unit(self) -> bool:
        return any(g.degree() == 0 for g in self.generators)

    def reduce(self, f: Polynomial) -> Polynomial:
        return normal_form(f, self)

    def contains(self, f: Polynomial) -> bool:
        return normal_form(f, self).is_zero()

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)


def _monic(f: Polynomial, order: str) -> Polynomial:
    return f * (Fraction(1) / f.leading_coefficient(order))


def _reduce(f: Polynomial, basis: Sequence[Polynomial], order: str) -> Polynomial:
    """Full multivariate division remainder of ``f`` by ``basis``."""
    if not basis:
        return f
    key = order_key(order)
    leads = [(g.leading_monomial(order), g.leading_coefficient(order), g) for g in basis]
    rest = dict(f.items())
    remainder: dict[Monomial, Fraction] = {}
    while rest:
        m = max(rest, key=key)
        c = rest[m]
        for lm, lc, g in leads:
            if mono_divides(lm, m):
                q = mono_div(m, lm)
                factor = c / lc
                for gm, gc in g.items():
                    t = mono_mul(gm, q)
                    v = rest.get(t, 0) - factor * gc
                    if v == 0:
                        rest.pop(t, None)
                    else:
                        rest[t] = v
                break
        else:
            remainder[m] = c
            del rest[m]
    return Polynomial(f.vars, remainder)


def s_polynomial(f: Polynomial, g: Polynomial, order: str = "grevlex") -> Polynomial:
    lf, lg = f.leading_monomial(order), g.leading_monomial(order)
    lcm = mono_lcm(lf, lg)
    a = Polynomial.monomial(f.vars, mono_div(lcm, lf), Fraction(1) / f.leading_coefficient(order))
    b = Polynomial.monomial(g.vars, mono_div(lcm, lg), Fraction(1) / g.leading_coefficient(order))
    return a * f - b * g


def _interreduce(basis: list[Polynomial], order: str) -> list[Polynomial]:
    # drop generators whose leading monomial is divisible by another's
    basis = sorted(basis, key=lambda g: order_key(order)(g.leading_monomial(order)))
    minimal: list[Polynomial] = []
    for g in basis:
        lm = g.leading_monomial(order)
        if not any(mono_divides(h.leading_monomial(order), lm) for h in minimal):
            minimal.append(g)
    out = []
    for i, g in enumerate(minimal):
        others = minimal[:i] + minimal[i + 1:]
        out.append(_monic(_reduce(g, others, order), order))
    return sorted(out, key=lambda g: order_key(order)(g.leading_monomial(order)))


def buchberger(gens: Sequence[Polynomial], order: str = "grevlex") -> GroebnerBasis:
    """Reduced Groebner basis of the ideal generated by ``gens``.

    Pairs are processed smallest lcm degree first; pairs with coprime
    leading monomials are skipped.
    """
    gens = [g.to_exact() for g in gens]
    if not gens:
        raise ValueError("buchberger needs at least one generator")
    vars = gens[0].vars
    for g in gens:
        if g.vars != vars:
            raise ValueError("generators live in different rings")
    key = order_key(order)
    G = [_monic(g, order) for g in gens if not g.is_zero()]
    if not G:
        return GroebnerBasis((), vars, order, True)
    if any(g.degree() == 0 for g in G):
        return GroebnerBasis((Polynomial.constant(vars, 1),), vars, order, True)

    pairs = {(i, j) for j in range(len(G)) for i in range(j)}
    while pairs:
        def pair_rank(p):
            lcm = mono_lcm(G[p[0]].leading_monomial(order), G[p[1]].leading_monomial(order))
            return (sum(lcm), key(lcm), p[1], p[0])

        i, j = min(pairs, key=pair_rank)
        pairs.discard((i, j))
        li, lj = G[i].leading_monomial(order), G[j].leading_monomial(order)
        if mono_lcm(li, lj) == mono_mul(li, lj):
            continue
        r = _reduce(s_polynomial(G[i], G[j], order), G, order)
        if r.is_zero():
            continue
        if r.degree() == 0:
            return GroebnerBasis((Polynomial.constant(vars, 1),), vars, order, True)
        G.append(_monic(r, order))
        k = len(G) - 1
        pairs.update((a, k) for a in range(k))
    return GroebnerBasis(tuple(_interreduce(G, order)), vars, order, True)


def normal_form(f: Polynomial, gb: GroebnerBasis) -> Polynomial:
    """Remainder of ``f`` modulo ``gb``; zero iff ``f`` lies in the ideal."""
    return _reduce(f.to_exact().in_vars(gb.vars), gb.generators, gb.order)


def standard_monomials(gb: GroebnerBasis, maxdeg: int) -> list[Monomial]:
    """Monomials of degree <= maxdeg outside the initial ideal, ascending."""
    if maxdeg < 0:
        raise ValueError("maxdeg must be nonnegative")
    leads = gb.leading_monomials()
    return [m for m in monomials_up_to(len(gb.vars), maxdeg, gb.order)
            if not any(mono_divides(lm, m) for lm in leads)]


def is_groebner(gens: Sequence[Polynomial], order: str = "grevlex") -> bool:
    """Buchberger criterion: every S-polynomial reduces to zero."""
    gens = [g for g in gens if not g.is_zero()]
    for j in range(len(gens)):
        for i in range(j):
            if not _reduce(s_polynomial(gens[i], gens[j], order), gens, order).is_zero():
                return False
    return True
