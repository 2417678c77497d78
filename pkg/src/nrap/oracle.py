"""Reference solver and verifier.

Deliberately simple: bisection on the monotone map
``mu -> sum_j a_j x_j(mu)`` followed by one exact interior re-solve over
the free coordinates.  Every other solver in the suite is validated
against this one; it is never benchmarked.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .families import Sense, aggregate_mu, dual_basis_slope, mu_positive
from .problem import (
    KktReport,
    ProblemInstance,
    Solution,
    Status,
    kkt_residual,
    primal_vector,
    x_interior,
)

__all__ = ["OracleConfig", "bisection_solve", "verify", "interior_count"]


@dataclass(frozen=True)
class OracleConfig:
    mu_tol: float = 1e-13   # relative dual bracket width at which to stop
    max_iter: int = 200

    def __post_init__(self):
        if self.mu_tol <= 0 or self.max_iter < 1:
            raise ValueError("mu_tol must be positive and max_iter >= 1")


def _resource_at(inst: ProblemInstance, mu: float) -> float:
    return inst.resource(primal_vector(inst, mu))


def bisection_solve(inst: ProblemInstance, cfg: OracleConfig = OracleConfig()) -> Solution:
    """Solve by dual bisection; returns a KKT point of the instance.

    The initial bracket comes from the extreme finite breakpoints and is
    widened geometrically if needed, so the dual root is bracketed for
    every feasible instance.  After the bracket converges, the free set
    is read off at the midpoint and the interior coordinates are
    re-solved in closed form, which makes the resource residual exact up
    to rounding.
    """
    t0 = time.perf_counter_ns()
    bp = inst.breakpoints

    if inst.sense is Sense.LESS_EQUAL:
        x0 = primal_vector(inst, 0.0)
        if inst.resource(x0) <= inst.b:
            return Solution(x0, 0.0, Status.OPTIMAL, 0, time.perf_counter_ns() - t0)

    lo = float(np.min(bp.mu_u))
    finite_l = bp.mu_l[np.isfinite(bp.mu_l)]
    hi = float(np.max(finite_l)) if finite_l.size else lo + 1.0
    if hi <= lo:
        hi = lo + 1.0

    # resource() is nonincreasing in mu; widen until it straddles b.
    iters = 0
    step = max(1.0, abs(hi))
    while _resource_at(inst, hi) > inst.b and iters < cfg.max_iter:
        lo = hi
        hi = hi * 2.0 if hi > 0 else hi + step
        step *= 2.0
        iters += 1
    step = max(1.0, abs(lo))
    while _resource_at(inst, lo) < inst.b and iters < cfg.max_iter:
        hi = lo
        lo = lo / 2.0 if (mu_positive(inst.family) and lo > 0) else lo - step
        step *= 2.0
        iters += 1
    if _resource_at(inst, lo) < inst.b or _resource_at(inst, hi) > inst.b:
        x = primal_vector(inst, lo)
        return Solution(x, lo, Status.FAILED, iters, time.perf_counter_ns() - t0)

    while iters < cfg.max_iter and (hi - lo) > cfg.mu_tol * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _resource_at(inst, mid) > inst.b:
            lo = mid
        else:
            hi = mid
        iters += 1

    # Classify against the whole converged bracket, widened per index by
    # the dual-space width over which that index's resource contribution
    # is absorbed by rounding in the total; degenerate coordinates (a
    # breakpoint inside the widened bracket) then resolve to their bound.
    eps = np.finfo(float).eps
    mu_mid = 0.5 * (lo + hi)
    slope = np.abs(inst.res_coef) * abs(dual_basis_slope(inst.family, mu_mid))
    pad = 64.0 * eps * max(1.0, abs(inst.b)) / np.maximum(slope, 1e-300)
    pad += 8.0 * eps * max(1.0, abs(lo), abs(hi))
    inter = (bp.mu_u < lo - pad) & (bp.mu_l > hi + pad)
    at_lo = ~inter & (bp.mu_l <= hi + pad)
    at_hi = ~(inter | at_lo)
    x = np.where(at_lo, inst.l, inst.u)
    if np.any(inter):
        mu = mu_mid
        budget = inst.b - float(inst.a[~inter] @ x[~inter])
        const = float(np.sum(inst.res_const[inter]))
        coef = float(np.sum(inst.res_coef[inter]))
        try:
            mu = aggregate_mu(inst.family, const, coef, budget)
        except ValueError:
            pass  # near-degenerate budget; keep the bisection point
        x = np.array(x, dtype=float)
        x[inter] = np.clip(x_interior(inst, mu, inter), inst.l[inter], inst.u[inter])
    else:
        # every coordinate pegged: any dual value in the flat stretch of
        # the resource map is optimal, take its midpoint
        lo_edge = float(np.max(bp.mu_l[at_lo])) if np.any(at_lo) else -np.inf
        hi_edge = float(np.min(bp.mu_u[at_hi])) if np.any(at_hi) else np.inf
        if np.isfinite(lo_edge) and np.isfinite(hi_edge) and lo_edge <= hi_edge:
            mu = 0.5 * (lo_edge + hi_edge)
        elif np.isfinite(lo_edge) and not np.isfinite(hi_edge):
            mu = lo_edge
        elif np.isfinite(hi_edge) and not np.isfinite(lo_edge):
            mu = hi_edge
        else:
            mu = mu_mid
    return Solution(x, float(mu), Status.OPTIMAL, iters, time.perf_counter_ns() - t0)


def verify(inst: ProblemInstance, sol: Solution, tol: float = 1e-7) -> KktReport:
    """KKT report for a solution; callers compare max_residual to tol."""
    if np.asarray(sol.x).shape != (inst.n,):
        raise ValueError("solution length does not match instance")
    return kkt_residual(inst, sol.x, sol.mu)


def interior_count(inst: ProblemInstance, x) -> int:
    """Number of coordinates strictly between their bounds."""
    x = np.asarray(x, dtype=float)
    return int(np.count_nonzero((x > inst.l) & (x < inst.u)))
