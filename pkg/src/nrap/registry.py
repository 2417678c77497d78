"""Name-based solver dispatch shared by the CLI and the bench harness."""

from __future__ import annotations

from .breakpoint import solve_breakpoint
from .newton import NzConfig, solve_nz
from .oracle import OracleConfig, bisection_solve
from .problem import ProblemInstance, Solution
from .relaxation import RELAXATION_VARIANTS, solve_relaxation

__all__ = ["ALGORITHMS", "solve_named"]

ALGORITHMS = ("mb2", "mb3", "mb5", *RELAXATION_VARIANTS, "nz", "oracle")


def solve_named(inst: ProblemInstance, alg: str, nz_config: NzConfig | None = None) -> Solution:
    alg = alg.lower()
    if alg in ("mb2", "mb3", "mb5"):
        return solve_breakpoint(inst, alg)
    if alg in RELAXATION_VARIANTS:
        return solve_relaxation(inst, alg)
    if alg == "nz":
        sol, _ = solve_nz(inst, nz_config or NzConfig())
        return sol
    if alg == "oracle":
        return bisection_solve(inst, OracleConfig())
    raise ValueError(f"unknown algorithm {alg!r}; choose from {', '.join(ALGORITHMS)}")
