"""Block-diagonal SDP data and solutions.

Primal:  minimize C.X  s.t.  A_i.X = b_i,  X psd
Dual:    maximize b'y  s.t.  Z = C - sum_i y_i A_i psd

A block of positive size n is a dense symmetric n x n matrix; a block of
negative size -n is diagonal and stored as a length-n vector.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class Status(enum.Enum):
    FEASIBLE = "SDP solved, primal-dual feasible"
    INFEASIBLE = "infeasible"
    UNKNOWN = "unknown"

    def __str__(self):
        return self.value


@dataclass
class SDPInstance:
    """``A[k]`` holds every constraint's slice of block k, shape (m, n, n) or (m, n)."""

    block_sizes: list[int]
    C: list[np.ndarray]
    A: list[np.ndarray]
    b: np.ndarray

    def __post_init__(self):
        self.block_sizes = [int(s) for s in self.block_sizes]
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        m = self.b.size
        if not (len(self.C) == len(self.A) == len(self.block_sizes)):
            raise ValueError("C, A and block_sizes disagree on the number of blocks")
        C, A = [], []
        for k, s in enumerate(self.block_sizes):
            if s == 0:
                raise ValueError("block sizes must be nonzero")
            n = abs(s)
            shape = (n, n) if s > 0 else (n,)
            c = np.asarray(self.C[k], dtype=float)
            a = np.asarray(self.A[k], dtype=float)
            if a.size == 0 and m == 0:
                a = np.zeros((0,) + shape)
            if c.shape != shape or a.shape != (m,) + shape:
                raise ValueError(f"block {k}: expected C{shape} and A{(m,) + shape}, "
                                 f"got {c.shape} and {a.shape}")
            if s > 0:
                if not np.allclose(c, c.T) or not np.allclose(a, a.transpose(0, 2, 1)):
                    raise ValueError(f"block {k} is not symmetric")
            C.append(c)
            A.append(a)
        self.C, self.A = C, A

    @property
    def m(self) -> int:
        return self.b.size

    @property
    def n(self) -> int:
        """Total dimension (sum of block orders)."""
        return sum(abs(s) for s in self.block_sizes)

    @classmethod
    def empty(cls, block_sizes, m):
        C = [np.zeros((s, s)) if s > 0 else np.zeros(-s) for s in block_sizes]
        A = [np.zeros((m, s, s)) if s > 0 else np.zeros((m, -s)) for s in block_sizes]
        return cls(list(block_sizes), C, A, np.zeros(m))

    def apply(self, X: list[np.ndarray]) -> np.ndarray:
        """The vector (A_i . X)_i."""
        out = np.zeros(self.m)
        for s, a, x in zip(self.block_sizes, self.A, X):
            out += np.tensordot(a, x, axes=x.ndim) if self.m else 0.0
        return out

    def adjoint(self, y: np.ndarray) -> list[np.ndarray]:
        """sum_i y_i A_i, blockwise."""
        return [np.tensordot(y, a, axes=1) for a in self.A]

    def objective(self, X: list[np.ndarray]) -> float:
        return float(sum(np.sum(c * x) for c, x in zip(self.C, X)))

    def scale_entries(self) -> float:
        vals = [np.abs(self.b).max(initial=0.0)]
        vals += [np.abs(c).max(initial=0.0) for c in self.C]
        vals += [np.abs(a).max(initial=0.0) for a in self.A]
        return float(max(vals))


def min_eig(block: np.ndarray) -> float:
    if block.ndim == 1:
        return float(block.min(initial=np.inf))
    if block.size == 0:
        return np.inf
    return float(np.linalg.eigvalsh(block).min())


@dataclass
class SDPSolution:
    status: Status
    X: list[np.ndarray] = field(default_factory=list)
    y: np.ndarray = field(default_factory=lambda: np.zeros(0))
    Z: list[np.ndarray] = field(default_factory=list)
    primal_obj: float = float("nan")
    dual_obj: float = float("nan")
    iterations: int = 0
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE


def kkt_residuals(p: SDPInstance, sol: SDPSolution) -> dict[str, float]:
    """Residuals named after the feasibility invariants of a solution."""
    rp = p.apply(sol.X) - p.b
    AtY = p.adjoint(sol.y)
    rd = max((float(np.abs(c - z - a).max(initial=0.0)) for c, z, a in zip(p.C, sol.Z, AtY)),
             default=0.0)
    pobj = p.objective(sol.X)
    dobj = float(p.b @ sol.y)
    return {
        "primal": float(np.abs(rp).max(initial=0.0)),
        "dual": rd,
        "min_eig_X": min((min_eig(x) for x in sol.X), default=np.inf),
        "min_eig_Z": min((min_eig(z) for z in sol.Z), default=np.inf),
        "gap": abs(pobj - dobj) / (1.0 + abs(pobj)),
    }
