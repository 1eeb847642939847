"""Exact rational certificates from floating point Gram matrices.

The float solution is rounded to rationals and orthogonally projected
(exactly) onto the affine space of Gram matrices matching the target; the
result is accepted once an exact LDL^T shows it is positive semidefinite.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .formulate import GramProblem, SDPResult, multiplier_polynomials
from .groebner import GroebnerBasis, normal_form
from .poly import Monomial, Polynomial, SOSPoly, expand_sos

log = logging.getLogger(__name__)

MAX_PRECISION = 40


# exact LDL^T

@dataclass
class LDLT:
    """P'QP = L D L' with ``perm`` describing P; ``witness`` set iff Q is not psd."""

    perm: list[int]
    L: list[list[Fraction]]
    D: list[Fraction]
    witness: list[Fraction] | None = None

    @property
    def psd(self) -> bool:
        return self.witness is None


def exact_ldlt(Q: Sequence[Sequence]) -> LDLT:
    """Symmetric LDL^T with pivoting on the largest remaining diagonal entry.

    On failure returns a rational vector w with w'Qw < 0.
    """
    n = len(Q)
    A = [[Fraction(v) for v in row] for row in Q]
    for i in range(n):
        if len(A[i]) != n:
            raise ValueError("matrix is not square")
        for j in range(i):
            if A[i][j] != A[j][i]:
                raise ValueError("matrix is not symmetric")
    perm = list(range(n))
    L = [[Fraction(0)] * n for _ in range(n)]
    D = [Fraction(0)] * n

    def swap(k, p):
        A[k], A[p] = A[p], A[k]
        for row in A:
            row[k], row[p] = row[p], row[k]
        perm[k], perm[p] = perm[p], perm[k]
        L[k], L[p] = L[p], L[k]

    for k in range(n):
        p = max(range(k, n), key=lambda i: (A[i][i], -i))
        if p != k:
            swap(k, p)
        d = A[k][k]
        if d < 0:
            s = {k: Fraction(1)}
            return LDLT(perm, L, D, _lift_witness(L, perm, k, s, n))
        if d == 0:
            nz = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if nz is not None:
                a = A[nz][k]
                s = {k: Fraction(1), nz: Fraction(-1 if a > 0 else 1)}
                return LDLT(perm, L, D, _lift_witness(L, perm, k, s, n))
            L[k][k] = Fraction(1)
            continue
        D[k] = d
        L[k][k] = Fraction(1)
        pivot_row = A[k]
        for i in range(k + 1, n):
            lik = A[i][k] / d
            L[i][k] = lik
            if lik:
                Ai = A[i]
                for j in range(k + 1, i + 1):
                    Ai[j] -= lik * pivot_row[j]
                    if j != i:
                        A[j][i] = Ai[j]
    return LDLT(perm, L, D)


def _lift_witness(L, perm, k, s: dict[int, Fraction], n: int) -> list[Fraction]:
    # w' = (u, s) with L11' u = -L21' s gives w'(P'QP)w' = s' S s
    wp = [Fraction(0)] * n
    for i, v in s.items():
        wp[i] = v
    for j in range(k - 1, -1, -1):
        acc = Fraction(0)
        for i in range(j + 1, n):
            if wp[i] and L[i][j]:
                acc += L[i][j] * wp[i]
        wp[j] = -acc
    w = [Fraction(0)] * n
    for i in range(n):
        w[perm[i]] = wp[i]
    return w


def quadratic_form(Q, w) -> Fraction:
    n = len(Q)
    return sum((Fraction(Q[i][j]) * w[i] * w[j] for i in range(n) for j in range(n)), Fraction(0))


# rounding and projection

def round_dyadic(x: float, k: int) -> Fraction:
    return Fraction(math.floor(x * 2**k + 0.5), 2**k)


def round_best(x: float, k: int) -> Fraction:
    """Closest rational with denominator at most 2^k."""
    return Fraction(x).limit_denominator(2**k)


ROUNDERS = {"dyadic": round_dyadic, "best": round_best}


@dataclass
class RationalGram:
    problem: GramProblem
    grams: list[list[list[Fraction]]]
    free: list[Fraction]
    parameters: dict[str, Fraction]
    precision: int
    rounding: str
    residual_ok: bool = True
    factorizations: list[LDLT] = field(default_factory=list)

    @property
    def Q(self):
        return self.grams[0]

    @property
    def basis(self) -> list[Monomial]:
        return self.problem.basis

    def multipliers(self) -> list[Polynomial]:
        return multiplier_polynomials(self.problem, self.grams, self.free)


class RoundingError(RuntimeError):
    pass


def _solve_psd_system(K: dict[int, dict[int, Fraction]], r: dict[int, Fraction]):
    """Solve K lam = r for symmetric psd K (possibly singular); None if inconsistent."""
    K = {i: dict(row) for i, row in K.items()}
    r = dict(r)
    order = []
    active = set(K) | set(r)
    pivots = {}
    while active:
        i = next((i for i in sorted(active) if K.get(i, {}).get(i, 0) != 0), None)
        if i is None:
            break
        active.discard(i)
        row = K[i]
        piv = row[i]
        pivots[i] = (piv, {j: v for j, v in row.items() if j != i and j in active}, r.get(i, 0))
        order.append(i)
        for j, kji in list(row.items()):
            if j not in active or kji == 0:
                continue
            f = kji / piv
            rowj = K.setdefault(j, {})
            for l, kil in pivots[i][1].items():
                v = rowj.get(l, 0) - f * kil
                if v:
                    rowj[l] = v
                else:
                    rowj.pop(l, None)
            rowj.pop(i, None)
            rj = r.get(j, 0) - f * pivots[i][2]
            if rj:
                r[j] = rj
            else:
                r.pop(j, None)
    for i in active:
        if r.get(i, 0) != 0:
            return None
    lam: dict[int, Fraction] = {}
    for i in reversed(order):
        piv, row, ri = pivots[i]
        acc = ri - sum((v * lam.get(j, 0) for j, v in row.items()), Fraction(0))
        lam[i] = acc / piv
    return lam


def project_affine(prob: GramProblem, z0: list[Fraction], params: Sequence[Fraction]) -> list[Fraction] | None:
    """Exact orthogonal projection of ``z0`` onto the constraint space.

    Gram unknowns use the Frobenius inner product (off-diagonal entries
    count twice); parameters are held at ``params``.
    """
    w = [Fraction(1) if u[0] != "gram" or u[2] == u[3] else Fraction(2) for u in prob.unknowns]
    rhs = []
    for row, prow, b in zip(prob.coeffs, prob.param_coeffs, prob.rhs):
        rhs.append(b - sum((c * params[t] for t, c in prow.items()), Fraction(0)))
    res = {}
    cols: dict[int, list[tuple[int, Fraction]]] = {}
    for r, (row, b) in enumerate(zip(prob.coeffs, rhs)):
        v = b - sum((c * z0[u] for u, c in row.items()), Fraction(0))
        if v:
            res[r] = v
        for u, c in row.items():
            cols.setdefault(u, []).append((r, c))
    for r, row in enumerate(prob.coeffs):
        if not row and rhs[r] != 0:
            return None
    if not res:
        return list(z0)
    K: dict[int, dict[int, Fraction]] = {}
    for u, entries in cols.items():
        for r, a in entries:
            Kr = K.setdefault(r, {})
            for s, c in entries:
                Kr[s] = Kr.get(s, 0) + a * c / w[u]
    lam = _solve_psd_system(K, res)
    if lam is None:
        return None
    z = list(z0)
    for u, entries in cols.items():
        delta = sum((c * lam.get(r, 0) for r, c in entries), Fraction(0))
        if delta:
            z[u] = z[u] + delta / w[u]
    return z


def constraints_hold(prob: GramProblem, z: Sequence[Fraction], params: Sequence[Fraction]) -> bool:
    for row, prow, b in zip(prob.coeffs, prob.param_coeffs, prob.rhs):
        lhs = sum((c * z[u] for u, c in row.items()), Fraction(0))
        lhs += sum((c * params[t] for t, c in prow.items()), Fraction(0))
        if lhs != b:
            return False
    return True


def _try_precision(prob: GramProblem, zf, pf, k: int, how: str) -> RationalGram | None:
    rnd = ROUNDERS[how]
    params = [rnd(v, k) for v in pf]
    z0 = [rnd(v, k) for v in zf]
    z = project_affine(prob, z0, params)
    if z is None:
        return None
    grams, free = prob.decode(z)
    facts = []
    for G in grams:
        f = exact_ldlt(G)
        if not f.psd:
            return None
        facts.append(f)
    ok = constraints_hold(prob, z, params)
    if not ok:
        raise AssertionError("projection left a nonzero residual")
    return RationalGram(prob, grams, free, dict(zip(prob.params, params)), k, how, ok, facts)


def rationalize(prob: GramProblem, result: SDPResult, round_tol: int = 3,
                max_precision: int = MAX_PRECISION) -> RationalGram:
    """Exact psd Gram matrices near the float solution in ``result``.

    Precisions 2^-k are tried for k = round_tol, round_tol + 1, ... up to
    ``max_precision``; at each k the plain dyadic grid is tried first, then
    the closest rationals with denominator <= 2^k.  Parameters are rounded
    the same way and held fixed during projection.
    """
    if not result.ok:
        raise RoundingError(f"cannot round a {result.status} result")
    grams_f = [result.gram] + list(result.multiplier_grams)
    zf = [float(v) for v in prob.encode(grams_f, result.free_values)]
    pf = [float(result.parameters[t]) for t in prob.params]
    for k in range(max(round_tol, 0), max(round_tol, max_precision) + 1):
        tried = set()
        for how in ("dyadic", "best"):
            key = (tuple(ROUNDERS[how](v, k) for v in zf), tuple(ROUNDERS[how](v, k) for v in pf))
            if key in tried:
                continue
            tried.add(key)
            rg = _try_precision(prob, zf, pf, k, how)
            if rg is not None:
                log.debug("rounding certified at precision 2^-%d (%s)", k, how)
                return rg
    raise RoundingError("rounding did not certify")


# decompositions and checks

def extract_sos(rg: RationalGram, block: int = 0) -> SOSPoly:
    """Weights and generators from the LDL^T of a certified Gram block."""
    basis = rg.problem.gram_bases[block]
    vars = rg.problem.vars
    fact = rg.factorizations[block] if rg.factorizations else exact_ldlt(rg.grams[block])
    return sos_from_ldlt(fact, basis, vars)


def sos_from_ldlt(fact: LDLT, basis: Sequence[Monomial], vars: Sequence[str]) -> SOSPoly:
    if not fact.psd:
        raise ValueError("matrix is not positive semidefinite")
    weights, gens = [], []
    n = len(basis)
    for k in range(n):
        if fact.D[k] == 0:
            continue
        terms: dict[Monomial, Fraction] = {}
        for i in range(k, n):
            if fact.L[i][k]:
                m = basis[fact.perm[i]]
                terms[m] = terms.get(m, 0) + fact.L[i][k]
        weights.append(fact.D[k])
        gens.append(Polynomial(vars, terms))
    return SOSPoly(weights, gens)


def gram_to_sos(Q, basis: Sequence[Monomial], vars: Sequence[str]) -> SOSPoly:
    return sos_from_ldlt(exact_ldlt(Q), basis, vars)


def verify_certificate(s: SOSPoly, target: Polynomial, ideal: GroebnerBasis | None = None,
                       multipliers: Iterable[tuple[Polynomial, Polynomial]] = ()) -> bool:
    """Exact check of  expand(s) == target + sum l*h  (modulo ``ideal``)."""
    vars = target.vars
    target = target.to_exact()
    if not target.is_exact():
        return False
    try:
        diff = expand_sos(s, vars).in_vars(vars) - target
        for l, h in multipliers:
            diff = diff - l.in_vars(vars) * h.in_vars(vars)
    except ValueError:
        return False
    if ideal is not None:
        diff = normal_form(diff, ideal)
    return diff.is_zero()
