"""Semidefinite programming: data model, built-in solver, SDPA files, external solvers."""

from .builtin import SolverOptions, solve_builtin
from .external import solve_external
from .instance import SDPInstance, SDPSolution, Status, kkt_residuals
from .sdpa import parse_sdpa_sparse, parse_solution, write_sdpa_sparse


def solve(p: SDPInstance, solver: str = "builtin", solver_path=None, **opts) -> SDPSolution:
    """Dispatch to the built-in solver or an external executable."""
    if solver == "builtin":
        return solve_builtin(p, **opts)
    if solver == "external":
        return solve_external(p, solver_path)
    raise ValueError(f"unknown solver {solver!r}")


__all__ = [
    "SDPInstance", "SDPSolution", "SolverOptions", "Status", "kkt_residuals",
    "parse_sdpa_sparse", "parse_solution", "solve", "solve_builtin", "solve_external",
    "write_sdpa_sparse",
]
