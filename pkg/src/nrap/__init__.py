"""nrap: continuous separable resource allocation under one linear
constraint and box bounds.

Exact solvers (median breakpoint search mb2/mb3/mb5 and the relaxation
family pir2/dir*/der*/dbr*), an approximate quasi-Newton dual search
(nz), a bisection oracle, a seeded instance generator with exact
interior-fraction control, and a benchmarking harness with performance
profiles.
"""

from .families import Family, Sense
from .problem import (
    Breakpoints,
    KktReport,
    ProblemInstance,
    Solution,
    Status,
    compute_breakpoints,
    eval_objective,
    kkt_residual,
    primal_from_dual,
    primal_vector,
)
from .oracle import OracleConfig, bisection_solve, interior_count, verify
from .breakpoint import quickselect_median, interior_solve, solve_breakpoint
from .relaxation import RELAXATION_VARIANTS, solve_relaxation
from .newton import NzConfig, NzTrace, psi, solve_nz
from .generate import GenSpec, generate
from .fileio import read_instance, read_solution, write_instance, write_solution
from .bench import (
    BenchMatrix,
    BenchRecord,
    ProfilePoint,
    performance_profile,
    run_bench,
    scaling_fit,
)
from .registry import ALGORITHMS, solve_named

__version__ = "1.0.0"

__all__ = [
    "Family", "Sense", "ProblemInstance", "Breakpoints", "KktReport", "Solution", "Status",
    "compute_breakpoints", "primal_from_dual", "primal_vector", "kkt_residual", "eval_objective",
    "OracleConfig", "bisection_solve", "verify", "interior_count",
    "quickselect_median", "interior_solve", "solve_breakpoint",
    "RELAXATION_VARIANTS", "solve_relaxation",
    "NzConfig", "NzTrace", "psi", "solve_nz",
    "GenSpec", "generate",
    "read_instance", "write_instance", "read_solution", "write_solution",
    "BenchMatrix", "BenchRecord", "ProfilePoint", "performance_profile", "run_bench", "scaling_fit",
    "ALGORITHMS", "solve_named",
]
