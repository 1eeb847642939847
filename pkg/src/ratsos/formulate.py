"""Gram matrix formulations of SOS problems.

A problem asks for psd Gram matrices and free scalars such that

    v' Q v  ==  f(x; t) + sum_i l_i(x) h_i(x)        (modulo an optional ideal)

where ``t`` are parameters entering ``f`` affinely and each multiplier
``l_i`` is either a free polynomial or itself SOS (``w' P w``).  The
coefficient matching is kept as an exact sparse linear system so the
rounding step can project onto it without floating point error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from .groebner import GroebnerBasis, normal_form, standard_monomials
from .poly import (
    Monomial,
    Polynomial,
    mono_mul,
    monomials_of_degree,
    monomials_up_to,
    order_key,
)
from .sdp import SDPInstance, SDPSolution, Status


class FormulationError(ValueError):
    pass


# basis selection

def newton_polytope_contains(points: Sequence[Monomial], target: Sequence[float]) -> bool:
    """Whether ``target`` is a convex combination of ``points`` (LP test)."""
    pts = np.asarray(points, dtype=float)
    target = np.asarray(target, dtype=float)
    if len(pts) == 0:
        return False
    if (pts == target).all(axis=1).any():
        return True
    n = len(pts)
    A_eq = np.vstack([pts.T, np.ones((1, n))])
    b_eq = np.append(target, 1.0)
    res = linprog(np.zeros(n), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return res.status == 0


def newton_basis(support: Sequence[Monomial], d: int, nvars: int, order: str = "grevlex") -> list[Monomial]:
    """Monomials m of degree <= d with 2m in the convex hull of ``support``."""
    support = list(set(support))
    if not support:
        return []
    pts = np.asarray(support)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    degs = pts.sum(axis=1)
    out = []
    for m in monomials_up_to(nvars, d, order):
        twice = np.asarray(m) * 2
        if (twice < lo).any() or (twice > hi).any():
            continue
        if not degs.min() <= twice.sum() <= degs.max():
            continue
        if newton_polytope_contains(support, twice):
            out.append(m)
    return out


def _check_two_d(two_d: int):
    if two_d is None or two_d < 0 or two_d % 2:
        raise FormulationError(f"degree bound must be a nonnegative even integer, got {two_d}")


def monomial_basis(f: Polynomial, two_d: int | None = None, ideal: GroebnerBasis | None = None,
                   prune: bool = True, extra_support: Sequence[Monomial] = ()) -> list[Monomial]:
    """Monomial vector for a Gram representation of ``f``.

    Without an ideal the degree-<=d monomials are pruned to the half Newton
    polytope of the support of ``f`` (and ``extra_support``, e.g. products
    with multipliers).  With an ideal, all standard monomials of degree <= d.
    """
    if ideal is not None:
        _check_two_d(two_d)
        return standard_monomials(ideal, two_d // 2)
    if two_d is None:
        two_d = max(f.degree(), 0)
    _check_two_d(two_d)
    if f.degree() > two_d:
        raise FormulationError(f"degree bound {two_d} is below deg f = {f.degree()}")
    n = len(f.vars)
    if not prune:
        return monomials_up_to(n, two_d // 2)
    support = [m for m, _ in f.items()] + list(extra_support)
    return newton_basis(support, two_d // 2, n)


# problem data

@dataclass
class Multiplier:
    """A term ``l * h`` added to the target; ``l`` free or SOS over ``basis``."""

    h: Polynomial
    basis: list[Monomial]
    sos: bool = False

    def support(self) -> list[Monomial]:
        if self.sos:
            prods = {mono_mul(a, b) for a in self.basis for b in self.basis}
        else:
            prods = set(self.basis)
        return list({mono_mul(p, m) for p in prods for m, _ in self.h.items()})


@dataclass
class GramProblem:
    vars: tuple[str, ...]
    target: Polynomial                     # f0, parameter-free part
    param_parts: list[Polynomial]          # f_k with f = f0 + sum t_k f_k
    params: list[str]
    basis: list[Monomial]
    ideal: GroebnerBasis | None = None
    multipliers: list[Multiplier] = field(default_factory=list)
    param_objective: dict[str, Fraction] = field(default_factory=dict)
    trace_objective: bool = False
    normalize_block: int | None = None     # Gram block whose trace is fixed to 1
    # exact linear system, filled by build_gram_problem
    unknowns: list[tuple] = field(default_factory=list)
    rows: list[tuple] = field(default_factory=list)
    coeffs: list[dict[int, Fraction]] = field(default_factory=list)
    param_coeffs: list[dict[int, Fraction]] = field(default_factory=list)
    rhs: list[Fraction] = field(default_factory=list)

    @property
    def gram_sizes(self) -> list[int]:
        return [len(self.basis)] + [len(m.basis) for m in self.multipliers if m.sos]

    @property
    def gram_bases(self) -> list[list[Monomial]]:
        return [self.basis] + [m.basis for m in self.multipliers if m.sos]

    @property
    def free_slots(self) -> list[int]:
        return [i for i, m in enumerate(self.multipliers) if not m.sos]

    def unknown_index(self) -> dict[tuple, int]:
        return {u: i for i, u in enumerate(self.unknowns)}

    def reduce(self, p: Polynomial) -> Polynomial:
        return normal_form(p, self.ideal) if self.ideal is not None else p

    def encode(self, grams: Sequence, free: Sequence) -> list:
        """Unknown vector from Gram blocks and free scalars."""
        out = []
        for u in self.unknowns:
            if u[0] == "gram":
                out.append(grams[u[1]][u[2]][u[3]])
            else:
                out.append(free[u[1]])
        return out

    def decode(self, z: Sequence) -> tuple[list[list[list]], list]:
        """Gram blocks (nested lists) and free scalars from an unknown vector."""
        grams = [[[0] * s for _ in range(s)] for s in self.gram_sizes]
        free = [0] * sum(1 for u in self.unknowns if u[0] == "free")
        for u, val in zip(self.unknowns, z):
            if u[0] == "gram":
                _, b, i, j = u
                grams[b][i][j] = grams[b][j][i] = val
            else:
                free[u[1]] = val
        return grams, free

    def free_layout(self) -> list[tuple[int, Monomial]]:
        """(multiplier slot, monomial) for each free scalar, in order."""
        out = []
        for slot in self.free_slots:
            for m in self.multipliers[slot].basis:
                out.append((slot, m))
        return out


def split_parameters(f: Polynomial, params: Sequence[str]) -> tuple[Polynomial, list[Polynomial], tuple[str, ...]]:
    """Write ``f`` (over x-vars + params) as f0 + sum t_k f_k over the x-vars."""
    params = list(params)
    for t in params:
        if t not in f.vars:
            raise FormulationError(f"parameter {t!r} is not a variable of the polynomial")
    xvars = tuple(v for v in f.vars if v not in params)
    pidx = [f.vars.index(t) for t in params]
    xidx = [f.vars.index(v) for v in xvars]
    f0: dict[Monomial, Fraction] = {}
    parts: list[dict[Monomial, Fraction]] = [{} for _ in params]
    for m, c in f.items():
        pdeg = [m[i] for i in pidx]
        xm = tuple(m[i] for i in xidx)
        if sum(pdeg) == 0:
            f0[xm] = c
        elif sum(pdeg) == 1:
            k = pdeg.index(1)
            parts[k][xm] = c
        else:
            raise FormulationError("polynomial is not affine in the parameters")
    return Polynomial(xvars, f0), [Polynomial(xvars, p) for p in parts], xvars


def build_gram_problem(f: Polynomial, basis: Sequence[Monomial] | None = None, *,
                       ideal: GroebnerBasis | None = None,
                       params: Sequence[str] = (),
                       objective: Mapping[str, object] | None = None,
                       multipliers: Sequence[Multiplier] = (),
                       trace_objective: bool = False,
                       normalize_block: int | None = None,
                       two_d: int | None = None) -> tuple[GramProblem, SDPInstance]:
    """Coefficient matching system and its SDP encoding.

    ``f`` lives over the x-variables plus ``params``.  ``objective`` maps
    parameter names to coefficients of a linear functional to minimize.
    """
    f0, parts, xvars = split_parameters(f, params)
    multipliers = [Multiplier(m.h.in_vars(xvars), list(m.basis), m.sos) for m in multipliers]
    if basis is None:
        support = [m for p in [f0] + parts for m, _ in p.items()]
        extra = [m for mult in multipliers for m in mult.support()]
        probe = Polynomial(xvars, {m: 1 for m in support})
        basis = monomial_basis(probe, two_d, ideal, extra_support=extra)
    basis = list(basis)
    objective = {k: Fraction(v) for k, v in (objective or {}).items()}
    for k in objective:
        if k not in params:
            raise FormulationError(f"objective mentions unknown parameter {k!r}")
    prob = GramProblem(xvars, f0, parts, list(params), basis, ideal, multipliers,
                       objective, trace_objective, normalize_block)
    _fill_system(prob)
    return prob, to_sdp(prob)


def _fill_system(prob: GramProblem):
    vars = prob.vars
    cache: dict[Monomial, Polynomial] = {}

    def reduced(m: Monomial, h: Polynomial | None = None) -> Polynomial:
        if h is None:
            if m not in cache:
                cache[m] = prob.reduce(Polynomial.monomial(vars, m))
            return cache[m]
        return prob.reduce(Polynomial.monomial(vars, m) * h)

    unknowns: list[tuple] = []
    rows: dict[Monomial, dict[int, Fraction]] = {}

    def add(u_idx: int, p: Polynomial, scale):
        for m, c in p.items():
            row = rows.setdefault(m, {})
            row[u_idx] = row.get(u_idx, 0) + scale * c

    for b, blk in enumerate(prob.gram_bases):
        h = None
        if b > 0:
            h = [m for m in prob.multipliers if m.sos][b - 1].h
        for i in range(len(blk)):
            for j in range(i, len(blk)):
                unknowns.append(("gram", b, i, j))
                prod = mono_mul(blk[i], blk[j])
                p = reduced(prod) if h is None else reduced(prod, h)
                w = 1 if i == j else 2
                add(len(unknowns) - 1, p, w if b == 0 else -w)
    k = 0
    for slot in prob.free_slots:
        mult = prob.multipliers[slot]
        for m in mult.basis:
            unknowns.append(("free", k))
            add(len(unknowns) - 1, reduced(m, mult.h), -1)
            k += 1

    f0 = prob.reduce(prob.target)
    parts = [prob.reduce(p) for p in prob.param_parts]
    pc: dict[Monomial, dict[int, Fraction]] = {}
    for t, p in enumerate(parts):
        for m, c in p.items():
            pc.setdefault(m, {})[t] = -c
    keys = set(rows) | set(pc) | {m for m, _ in f0.items()}
    ordered = sorted(keys, key=order_key("grevlex"))
    out_rows, coeffs, pcoeffs, rhs = [], [], [], []
    for m in ordered:
        row = {u: c for u, c in rows.get(m, {}).items() if c != 0}
        prow = pc.get(m, {})
        val = f0.coefficient(m)
        if not row and not prow:
            if val != 0:
                names = ", ".join(prob.vars)
                raise FormulationError(
                    f"monomial not representable: {Polynomial.monomial(prob.vars, m)} "
                    f"(ring {names}) cannot be matched by the Gram basis")
            continue
        out_rows.append(("mono", m))
        coeffs.append(row)
        pcoeffs.append(prow)
        rhs.append(Fraction(val))
    if prob.normalize_block is not None:
        b = prob.normalize_block
        idx = {u: i for i, u in enumerate(unknowns)}
        out_rows.append(("trace", b))
        coeffs.append({idx["gram", b, i, i]: Fraction(1) for i in range(prob.gram_sizes[b])})
        pcoeffs.append({})
        rhs.append(Fraction(1))
    prob.unknowns, prob.rows, prob.coeffs, prob.param_coeffs, prob.rhs = (
        unknowns, out_rows, coeffs, pcoeffs, rhs)


def to_sdp(prob: GramProblem) -> SDPInstance:
    """Encode the exact system as a float SDP.

    Gram blocks come first; free scalars (multiplier coefficients, then
    parameters) are split as x = x+ - x- into one trailing diagonal block.
    """
    sizes = [s for s in prob.gram_sizes]
    nfree = sum(1 for u in prob.unknowns if u[0] == "free")
    nscalar = nfree + len(prob.params)
    blocks = [s for s in sizes if s > 0]
    gram_block = {}
    for b, s in enumerate(sizes):
        if s > 0:
            gram_block[b] = len(gram_block)
    if nscalar:
        blocks.append(-2 * nscalar)
    m = len(prob.rows)
    if not blocks:
        blocks = [-1]  # placeholder so an empty basis still yields an instance
    inst = SDPInstance.empty(blocks, m)
    for r, (row, prow) in enumerate(zip(prob.coeffs, prob.param_coeffs)):
        for u, c in row.items():
            kind = prob.unknowns[u]
            c = float(c)
            if kind[0] == "gram":
                _, b, i, j = kind
                A = inst.A[gram_block[b]]
                if i == j:
                    A[r, i, i] += c
                else:
                    A[r, i, j] += c / 2
                    A[r, j, i] += c / 2
            else:
                k = kind[1]
                inst.A[-1][r, 2 * k] += c
                inst.A[-1][r, 2 * k + 1] -= c
        for t, c in prow.items():
            k = nfree + t
            inst.A[-1][r, 2 * k] += float(c)
            inst.A[-1][r, 2 * k + 1] -= float(c)
    inst.b[:] = [float(v) for v in prob.rhs]
    if prob.trace_objective and sizes[0] > 0:
        inst.C[0][:] = np.eye(sizes[0])
    for t, name in enumerate(prob.params):
        c = float(prob.param_objective.get(name, 0))
        k = nfree + t
        inst.C[-1][2 * k] = c
        inst.C[-1][2 * k + 1] = -c
    return inst


# decoding

@dataclass
class SDPResult:
    """Outcome of an SOS computation.

    ``gram`` and the parameter values are exact ``Fraction`` objects when
    ``rounded`` is true and floats otherwise.
    """

    status: Status
    problem: GramProblem | None = None
    solution: SDPSolution | None = None
    gram: object = None
    monomials: list[Monomial] = field(default_factory=list)
    parameters: dict[str, object] = field(default_factory=dict)
    multipliers: list[Polynomial] = field(default_factory=list)
    multiplier_grams: list = field(default_factory=list)
    moment_matrix: np.ndarray | None = None
    rounded: bool = False
    certificate: object = None        # RationalGram when rounded
    free_values: list = field(default_factory=list)
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status is Status.FEASIBLE

    @property
    def vars(self) -> tuple[str, ...]:
        return self.problem.vars if self.problem else ()

    def sos_poly(self):
        """Exact SOS decomposition of the Gram matrix (requires rounding)."""
        from .certify import extract_sos
        if not self.rounded:
            raise ValueError(f"no exact certificate available ({self.message or self.status})")
        return extract_sos(self.certificate)

    def multiplier_sos(self, i: int = 0):
        from .certify import extract_sos
        if not self.rounded:
            raise ValueError("no exact certificate available")
        return extract_sos(self.certificate, block=i + 1)

    def monomial_vector(self) -> list[Polynomial]:
        return [Polynomial.monomial(self.vars, m) for m in self.monomials]


def _float_solution_parts(prob: GramProblem, inst: SDPInstance, sol: SDPSolution):
    sizes = prob.gram_sizes
    grams, k = [], 0
    for s in sizes:
        if s > 0:
            grams.append(np.array(sol.X[k]))
            k += 1
        else:
            grams.append(np.zeros((0, 0)))
    nfree = sum(1 for u in prob.unknowns if u[0] == "free")
    if nfree + len(prob.params):
        lp = sol.X[-1]
        scal = lp[0::2] - lp[1::2]
    else:
        scal = np.zeros(0)
    return grams, list(scal[:nfree]), list(scal[nfree:])


def multiplier_polynomials(prob: GramProblem, grams, free) -> list[Polynomial]:
    """Multiplier polynomials l_i from Gram blocks / free scalars."""
    out = []
    layout = prob.free_layout()
    sos_b = 1
    for slot, mult in enumerate(prob.multipliers):
        terms: dict[Monomial, object] = {}
        if mult.sos:
            G = grams[sos_b]
            sos_b += 1
            for i, a in enumerate(mult.basis):
                for j, b in enumerate(mult.basis):
                    m = mono_mul(a, b)
                    terms[m] = terms.get(m, 0) + G[i][j]
        else:
            for (s, m), val in zip(layout, free):
                if s == slot:
                    terms[m] = terms.get(m, 0) + val
        out.append(Polynomial(prob.vars, terms))
    return out


def decode_gram(prob: GramProblem, inst: SDPInstance, sol: SDPSolution) -> SDPResult:
    """Float-level result from a solver solution; status passes through."""
    if not sol.feasible:
        return SDPResult(sol.status, prob, sol, monomials=list(prob.basis),
                         message=sol.message)
    grams, free, params = _float_solution_parts(prob, inst, sol)
    moment = None
    if prob.gram_sizes[0] > 0 and inst.m:
        moment = -inst.adjoint(sol.y)[0]
    res = SDPResult(
        status=sol.status,
        problem=prob,
        solution=sol,
        gram=grams[0],
        monomials=list(prob.basis),
        parameters={t: float(v) for t, v in zip(prob.params, params)},
        multipliers=multiplier_polynomials(prob, grams, free),
        multiplier_grams=grams[1:],
        moment_matrix=moment,
        free_values=free,
    )
    return res


def monomials_for_degree(nvars: int, deg: int, homogeneous: bool) -> list[Monomial]:
    if homogeneous:
        return sorted(monomials_of_degree(nvars, deg), key=order_key("grevlex"))
    return monomials_up_to(nvars, deg)
