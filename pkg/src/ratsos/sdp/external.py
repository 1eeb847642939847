"""Run an external SDPA-format solver (CSDP command line convention)."""

from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
from pathlib import Path

from .instance import SDPInstance, SDPSolution, Status, kkt_residuals
from .sdpa import parse_solution, write_sdpa_sparse

ENV_VAR = "SOS_SOLVER_PATH"

# CSDP exit codes: 0 solved, 1 primal infeasible, 2 dual infeasible,
# 3 solved to reduced accuracy, 4+ failures
_EXIT_STATUS = {0: Status.FEASIBLE, 1: Status.INFEASIBLE, 3: Status.FEASIBLE}


def default_solver_path() -> str | None:
    return os.environ.get(ENV_VAR) or shutil.which("csdp")


def solve_external(p: SDPInstance, solver_path: str | os.PathLike | None = None,
                   workdir: str | os.PathLike | None = None, timeout: float | None = 600,
                   check_tol: float = 1e-6) -> SDPSolution:
    """Write ``p`` to a fresh temp dir, run ``solver in.dat-s out.sol``, read back.

    Every failure mode maps to ``Status.UNKNOWN`` with a diagnostic message;
    the temporary directory is always removed.
    """
    solver_path = solver_path or default_solver_path()
    if not solver_path:
        return SDPSolution(Status.UNKNOWN, message=f"no solver executable (set {ENV_VAR})")
    with tempfile.TemporaryDirectory(prefix="ratsos-", dir=workdir) as tmp:
        src = Path(tmp) / "problem.dat-s"
        out = Path(tmp) / "problem.sol"
        src.write_bytes(write_sdpa_sparse(p))
        try:
            proc = subprocess.run([str(solver_path), str(src), str(out)], capture_output=True,
                                  timeout=timeout, cwd=tmp)
        except (OSError, subprocess.SubprocessError) as exc:
            return SDPSolution(Status.UNKNOWN, message=f"could not run solver: {exc}")
        status = _EXIT_STATUS.get(proc.returncode, Status.UNKNOWN)
        if status is Status.INFEASIBLE:
            return SDPSolution(Status.INFEASIBLE, message="solver reports primal infeasible")
        if status is Status.UNKNOWN:
            tail = proc.stdout.decode(errors="replace")[-500:]
            return SDPSolution(Status.UNKNOWN, message=f"solver exit code {proc.returncode}: {tail}")
        try:
            y, Z, X = parse_solution(out.read_bytes(), p)
        except (OSError, ValueError) as exc:
            return SDPSolution(Status.UNKNOWN, message=f"unparseable solver output: {exc}")
    sol = SDPSolution(Status.FEASIBLE, X, y, Z, p.objective(X), float(p.b @ y), 0, "external")
    r = kkt_residuals(p, sol)
    if max(r["primal"], r["dual"], -r["min_eig_X"], -r["min_eig_Z"]) > check_tol:
        sol.status = Status.UNKNOWN
        sol.message = f"external solution fails KKT check: {r}"
    return sol
