"""Dense primal-dual interior point solver.

Infeasible path-following with the HKM search direction and Mehrotra's
predictor-corrector.  Deterministic; intended for the small dense
problems produced by Gram matrix formulations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .instance import SDPInstance, SDPSolution, Status, kkt_residuals

log = logging.getLogger(__name__)


@dataclass
class SolverOptions:
    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iter: int = 100
    step_fraction: float = 0.98
    infeasible_bound: float = 1e8
    verbose: bool = False


def _sym(M):
    return 0.5 * (M + M.T)


def _max_step(x, dx):
    """Largest alpha with x + alpha*dx psd (inf if unbounded)."""
    if x.ndim == 1:
        neg = dx < 0
        if not neg.any():
            return np.inf
        return float(np.min(-x[neg] / dx[neg]))
    L = np.linalg.cholesky(x)
    Li = scipy.linalg.solve_triangular(L, np.eye(len(x)), lower=True)
    lam = np.linalg.eigvalsh(_sym(Li @ dx @ Li.T)).min()
    return np.inf if lam >= 0 else float(-1.0 / lam)


class _Schur:
    """Schur complement and direction assembly for fixed X, Z."""

    refine = 2

    def __init__(self, p: SDPInstance, X, Z):
        self.p = p
        self.X = X
        self.Z = Z
        self.Zinv = [1.0 / z if z.ndim == 1 else np.linalg.inv(z) for z in Z]
        m = p.m
        M = np.zeros((m, m))
        for a, x, zi in zip(p.A, X, self.Zinv):
            if not m:
                continue
            if x.ndim == 1:
                M += (a * (x * zi)) @ a.T
            else:
                G = x @ a @ zi
                M += np.einsum("iab,jba->ij", a, G, optimize=True)
        self.M = _sym(M)
        try:
            self.factor = scipy.linalg.cho_factor(self.M)
            self.exact = True
        except (np.linalg.LinAlgError, ValueError):
            self.factor = None
            self.exact = False

    def solve(self, r):
        if not r.size:
            return r
        if self.factor is not None:
            return scipy.linalg.cho_solve(self.factor, r)
        return scipy.linalg.lstsq(self.M, r)[0]

    def _primal_step(self, base, dy):
        AtDy = self.p.adjoint(dy)
        dX = []
        for t, x, zi, a in zip(base, self.X, self.Zinv, AtDy):
            if x.ndim == 1:
                dX.append(t + x * a * zi)
            else:
                dX.append(t + _sym(x @ a @ zi))
        return dX

    def direction(self, rp, Rd, sigma_mu, corr=None):
        p = self.p
        base = []
        for k, (x, zi, rd) in enumerate(zip(self.X, self.Zinv, Rd)):
            if x.ndim == 1:
                t = sigma_mu * zi - x - x * rd * zi
                if corr is not None:
                    t = t - corr[k] * zi
            else:
                t = sigma_mu * zi - x - _sym(x @ rd @ zi)
                if corr is not None:
                    t = t - _sym(corr[k] @ zi)
            base.append(t)
        dy = self.solve(rp - p.apply(base))
        dX = self._primal_step(base, dy)
        # refine against the true operator; M alone loses accuracy near the boundary
        for _ in range(self.refine):
            res = rp - p.apply(dX)
            if not res.size or np.abs(res).max() <= 1e-15 * max(1.0, np.abs(rp).max()):
                break
            dy = dy + self.solve(res)
            dX = self._primal_step(base, dy)
        dZ = [rd - a for rd, a in zip(Rd, p.adjoint(dy))]
        return dX, dy, dZ


def _inner(U, V):
    return float(sum(np.sum(u * v) for u, v in zip(U, V)))


def _identity(p: SDPInstance, tau: float):
    return [tau * (np.eye(s) if s > 0 else np.ones(-s)) for s in p.block_sizes]


def _split_pairs(p: SDPInstance):
    """Index pairs (i, i+1) in diagonal blocks whose data are exact negatives.

    Such pairs encode a free variable as a difference of two nonnegative
    ones; both halves drift upward together and are re-centred each step.
    """
    pairs = []
    for k, s in enumerate(p.block_sizes):
        if s >= 0:
            continue
        a, c = p.A[k], p.C[k]
        idx = [i for i in range(0, -s - 1)
               if np.array_equal(a[:, i], -a[:, i + 1]) and c[i] == -c[i + 1] and a[:, i].any()]
        used, chosen = set(), []
        for i in idx:
            if i not in used and i + 1 not in used:
                chosen.append(i)
                used.update((i, i + 1))
        if chosen:
            pairs.append((k, np.array(chosen)))
    return pairs


def solve_builtin(p: SDPInstance, opts: SolverOptions | None = None, **kw) -> SDPSolution:
    """Solve ``p`` with the built-in interior point method."""
    opts = opts or SolverOptions(**kw)
    n = p.n
    if n == 0:
        raise ValueError("instance has no blocks")
    tau = max(10.0, np.sqrt(n) * p.scale_entries())
    X = _identity(p, tau)
    Z = _identity(p, tau)
    y = np.zeros(p.m)
    bnorm = max(1.0, float(np.abs(p.b).max(initial=0.0)))
    pairs = _split_pairs(p)

    def pack(status, it, msg):
        return SDPSolution(status, X, y, Z, p.objective(X), float(p.b @ y), it, msg)

    for it in range(1, opts.max_iter + 1):
        rp = p.b - p.apply(X)
        AtY = p.adjoint(y)
        Rd = [c - z - a for c, z, a in zip(p.C, Z, AtY)]
        mu = _inner(X, Z) / n
        pinf = float(np.abs(rp).max(initial=0.0))
        dinf = max(float(np.abs(r).max(initial=0.0)) for r in Rd)
        pobj, dobj = p.objective(X), float(p.b @ y)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj))
        if opts.verbose:
            log.info("it %3d  pobj %+.8e  dobj %+.8e  pinf %.1e  dinf %.1e  mu %.1e",
                     it, pobj, dobj, pinf, dinf, mu)
        if pinf <= opts.feas_tol and dinf <= opts.feas_tol and gap <= opts.gap_tol:
            sol = pack(Status.FEASIBLE, it - 1, "converged")
            return _polish_status(p, sol, opts)
        if dobj > opts.infeasible_bound * bnorm and dinf <= opts.feas_tol * dobj:
            return pack(Status.INFEASIBLE, it - 1, "dual objective diverged")

        try:
            S = _Schur(p, X, Z)
            dXa, dya, dZa = S.direction(rp, Rd, 0.0)
            ap = min(1.0, opts.step_fraction * min(_max_step(x, d) for x, d in zip(X, dXa)))
            ad = min(1.0, opts.step_fraction * min(_max_step(z, d) for z, d in zip(Z, dZa)))
            mu_aff = _inner([x + ap * d for x, d in zip(X, dXa)],
                            [z + ad * d for z, d in zip(Z, dZa)]) / n
            sigma = min(1.0, (max(mu_aff, 0.0) / mu) ** 3)
            corr = [dx * dz if dx.ndim == 1 else dx @ dz for dx, dz in zip(dXa, dZa)]
            dX, dy, dZ = S.direction(rp, Rd, sigma * mu, corr)
            ap = min(1.0, opts.step_fraction * min(_max_step(x, d) for x, d in zip(X, dX)))
            ad = min(1.0, opts.step_fraction * min(_max_step(z, d) for z, d in zip(Z, dZ)))
        except np.linalg.LinAlgError as exc:
            return pack(Status.UNKNOWN, it - 1, f"numerical failure: {exc}")
        if not (np.isfinite(ap) and np.isfinite(ad)) or max(ap, ad) < 1e-12:
            return pack(Status.UNKNOWN, it - 1, "step length collapsed")
        X = [x + ap * d for x, d in zip(X, dX)]
        X = [_sym(x) if x.ndim == 2 else x for x in X]
        for k, i in pairs:
            # shifting both halves leaves A(X) and C.X unchanged
            shift = 0.8 * np.minimum(X[k][i], X[k][i + 1])
            X[k][i] -= shift
            X[k][i + 1] -= shift
        y = y + ad * dy
        Z = [z + ad * d for z, d in zip(Z, dZ)]
        Z = [_sym(z) if z.ndim == 2 else z for z in Z]
    return pack(Status.UNKNOWN, opts.max_iter, "iteration limit reached")


def _polish_status(p, sol, opts):
    r = kkt_residuals(p, sol)
    tol = opts.feas_tol
    if r["primal"] > tol or r["dual"] > tol or r["min_eig_X"] < -tol or r["min_eig_Z"] < -tol:
        sol.status = Status.UNKNOWN
        sol.message = f"KKT check failed: {r}"
    return sol
