"""User-level SOS computations.

Every function runs the same pipeline: choose a monomial basis, build the
Gram formulation, solve the SDP in floating point, then round to an exact
certificate.  A result with ``rounded=True`` carries exact data that
passes :func:`ratsos.certify.verify_certificate`.
"""

from __future__ import annotations

import logging
import math
from typing import Mapping, Sequence

import numpy as np

from .certify import RoundingError, rationalize
from .formulate import (
    FormulationError,
    GramProblem,
    Multiplier,
    SDPResult,
    build_gram_problem,
    decode_gram,
    monomials_for_degree,
)
from .groebner import GroebnerBasis, buchberger
from .poly import Polynomial, SOSPoly, expand_sos, monomials_up_to, product
from .sdp import SDPInstance, Status, solve

log = logging.getLogger(__name__)

DEFAULT_ROUND_TOL = 3


def _as_ideal(ideal, vars) -> GroebnerBasis | None:
    if ideal is None or isinstance(ideal, GroebnerBasis):
        return ideal
    return buchberger([g.in_vars(vars) for g in ideal])


def _run(prob: GramProblem, inst: SDPInstance, round_tol, solver: str, solver_path) -> SDPResult:
    sol = solve(inst, solver, solver_path)
    log.info("Status: %s", sol.status)
    res = decode_gram(prob, inst, sol)
    if not res.ok or round_tol is None or round_tol == math.inf:
        return res
    try:
        rg = rationalize(prob, res, int(round_tol))
    except RoundingError as exc:
        res.message = str(exc)
        return res
    res.certificate = rg
    res.rounded = True
    res.gram = rg.Q
    res.multiplier_grams = rg.grams[1:]
    res.parameters = dict(rg.parameters)
    res.multipliers = rg.multipliers()
    res.free_values = rg.free
    return res


def solve_sos(f: Polynomial, two_d: int | None = None, *, ideal=None,
              params: Sequence[str] = (), objective: Mapping[str, object] | None = None,
              trace_obj: bool = False, round_tol=DEFAULT_ROUND_TOL,
              solver: str = "builtin", solver_path=None, prune: bool = True) -> SDPResult:
    """Search for a Gram matrix of ``f`` (optionally modulo ``ideal``).

    ``params`` name variables of ``f`` that enter affinely and are solved
    for; ``objective`` is a linear functional in them to minimize.  A
    degree bound ``two_d`` is required when ``ideal`` is given.
    """
    xvars = tuple(v for v in f.vars if v not in params)
    gb = _as_ideal(ideal, xvars)
    if gb is not None and two_d is None:
        raise FormulationError("a degree bound is required in a quotient ring")
    try:
        basis = None
        if not prune and gb is None:
            d = (two_d if two_d is not None else f.degree() + f.degree() % 2) // 2
            basis = monomials_up_to(len(xvars), d)
        prob, inst = build_gram_problem(f, basis, ideal=gb, params=params, objective=objective,
                                        trace_objective=trace_obj, two_d=two_d)
    except FormulationError as exc:
        if "not representable" in str(exc):
            return SDPResult(Status.INFEASIBLE, message=str(exc))
        raise
    return _run(prob, inst, round_tol, solver, solver_path)


def sos_in_ideal(ideal, two_d: int, *, round_tol=DEFAULT_ROUND_TOL, solver: str = "builtin",
                 solver_path=None) -> tuple[SDPResult, list[Polynomial] | None]:
    """A nonzero SOS polynomial of degree <= two_d in an ideal.

    With a :class:`GroebnerBasis` the search is for 0 as a nontrivial SOS in
    the quotient ring and the multiplier list is ``None``.  With a list of
    generators ``h`` it looks for multipliers ``l`` with ``sum l*h`` SOS.
    Nontriviality is imposed by fixing the Gram trace to 1.
    """
    if two_d is None or two_d < 2 or two_d % 2:
        raise FormulationError("degree bound must be an even integer >= 2")
    if isinstance(ideal, GroebnerBasis):
        zero = Polynomial(ideal.vars)
        from .groebner import standard_monomials
        basis = standard_monomials(ideal, two_d // 2)
        prob, inst = build_gram_problem(zero, basis, ideal=ideal, normalize_block=0)
        return _run(prob, inst, round_tol, solver, solver_path), None
    gens = list(ideal)
    vars = gens[0].vars
    mults = []
    for h in gens:
        deg = two_d - h.degree()
        if deg >= 0:
            mults.append(Multiplier(h.in_vars(vars), monomials_up_to(len(vars), deg)))
    if not mults:
        raise FormulationError("every generator exceeds the degree bound")
    prob, inst = build_gram_problem(Polynomial(vars), None, multipliers=mults,
                                    normalize_block=0, two_d=two_d)
    res = _run(prob, inst, round_tol, solver, solver_path)
    if not res.ok:
        return res, None
    full = []
    it = iter(res.multipliers)
    for h in gens:
        full.append(next(it) if two_d - h.degree() >= 0 else Polynomial(vars))
    return res, full


class DecompositionError(RuntimeError):
    def __init__(self, message: str, stage: int):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


def sosdec_ternary(f: Polynomial, *, round_tol=DEFAULT_ROUND_TOL, solver: str = "builtin",
                   solver_path=None, max_stages: int = 10) -> tuple[list[SOSPoly], list[SOSPoly]]:
    """Write a nonnegative ternary form as a quotient of SOS forms.

    Returns ``(nums, dens)`` with ``f * prod(dens) == prod(nums)``.  Each
    stage looks for an SOS form ``m`` of degree ``deg g - 4`` (at least 2)
    with ``g*m`` SOS; since ``m`` is found together with its own Gram
    matrix, its certificate closes the chain.
    """
    if len(f.vars) != 3:
        raise ValueError("sosdec_ternary needs a polynomial in exactly 3 variables")
    if not f.is_homogeneous() or f.degree() % 2:
        raise ValueError("sosdec_ternary needs a form of even degree")
    opts = dict(round_tol=round_tol, solver=solver, solver_path=solver_path)
    chain: list[SOSPoly] = []
    g = f
    for stage in range(max_stages):
        res = solve_sos(g, **opts)
        if res.rounded:
            chain.append(res.sos_poly())
            break
        deg_m = max(g.degree() - 4, 2)
        w = monomials_for_degree(3, deg_m // 2, homogeneous=True)
        mult = Multiplier(g, w, sos=True)
        prob, inst = build_gram_problem(Polynomial(g.vars), None, multipliers=[mult],
                                        normalize_block=1, two_d=g.degree() + deg_m)
        res = _run(prob, inst, round_tol, solver, solver_path)
        if not res.rounded:
            why = res.message or str(res.status)
            raise DecompositionError(f"no certified SOS multiplier ({why})", stage)
        chain.append(res.sos_poly())
        chain.append(res.multiplier_sos(0))
        break
    else:
        raise DecompositionError("stage limit reached", max_stages)
    return chain[0::2], chain[1::2]


def check_ternary(f: Polynomial, nums: Sequence[SOSPoly], dens: Sequence[SOSPoly]) -> bool:
    """Exact identity f * prod(dens) == prod(nums)."""
    vars = f.vars
    lhs = f * product((expand_sos(s, vars) for s in dens), vars)
    rhs = product((expand_sos(s, vars) for s in nums), vars)
    return lhs == rhs


def _fresh_name(base: str, taken: Sequence[str]) -> str:
    name = base
    while name in taken:
        name = "_" + name
    return name


def lower_bound(f: Polynomial, two_d: int | None = None, *, ideal=None,
                equations: Sequence[Polynomial] | None = None,
                round_tol=DEFAULT_ROUND_TOL, solver: str = "builtin", solver_path=None):
    """Largest t with f - t SOS (modulo ``ideal`` or with multipliers of ``equations``).

    Returns ``(t, result, multipliers)``; ``t`` is a ``Fraction`` when the
    certificate was rounded, a float otherwise, and ``None`` if no bound
    exists at this degree.  ``multipliers`` is ``None`` unless
    ``equations`` were given, in which case ``f - t + sum(l*h)`` is SOS.
    """
    t = _fresh_name("t", f.vars)
    vars = f.vars + (t,)
    F = f.in_vars(vars) - Polynomial.var(vars, t)
    if equations is not None:
        if ideal is not None:
            raise ValueError("give either an ideal or a list of equations, not both")
        if two_d is None:
            raise FormulationError("a degree bound is required with equations")
        mults = [Multiplier(h.in_vars(f.vars), monomials_up_to(len(f.vars), two_d - h.degree()))
                 for h in equations if two_d - h.degree() >= 0]
        try:
            prob, inst = build_gram_problem(F, None, params=[t], objective={t: -1},
                                            multipliers=mults, two_d=two_d)
        except FormulationError as exc:
            return None, SDPResult(Status.INFEASIBLE, message=str(exc)), None
        res = _run(prob, inst, round_tol, solver, solver_path)
        bound = res.parameters.get(t) if res.ok else None
        if not res.ok:
            return None, res, None
        full, it = [], iter(res.multipliers)
        for h in equations:
            full.append(next(it) if two_d - h.degree() >= 0 else Polynomial(f.vars))
        return bound, res, full
    res = solve_sos(F, two_d, ideal=ideal, params=[t], objective={t: -1}, round_tol=round_tol,
                    solver=solver, solver_path=solver_path)
    if not res.ok:
        return None, res, None
    return res.parameters[t], res, None


class RecoveryError(RuntimeError):
    pass


def recover_solution(res: SDPResult, rank_tol: float = 1e-6) -> dict[str, float]:
    """Minimizer read off a rank one moment matrix."""
    M = res.moment_matrix
    if M is None:
        raise RecoveryError("result has no moment matrix")
    basis = list(res.monomials)
    n = len(res.vars)
    const = (0,) * n
    if const not in basis:
        raise RecoveryError("basis lacks the constant monomial")
    idx = []
    for i in range(n):
        e = tuple(int(j == i) for j in range(n))
        if e not in basis:
            raise RecoveryError(f"basis lacks the monomial {res.vars[i]}")
        idx.append(basis.index(e))
    c = basis.index(const)
    M = np.asarray(M, dtype=float)
    if M[c, c] <= 0:
        raise RecoveryError("moment matrix has a nonpositive constant entry")
    M = M / M[c, c]
    ev = np.sort(np.linalg.eigvalsh(0.5 * (M + M.T)))[::-1]
    if len(ev) > 1 and ev[1] > rank_tol * ev[0]:
        raise RecoveryError(f"not rank one (eigenvalue ratio {ev[1] / ev[0]:.2e})")
    return {res.vars[i]: float(M[c, j]) for i, j in enumerate(idx)}
