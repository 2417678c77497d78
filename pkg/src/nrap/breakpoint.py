"""Median-search breakpoint solvers (mb2, mb3, mb5).

Each iteration evaluates the clamped resource use at the median of the
surviving breakpoint multiset, pegs the coordinates that the comparison
proves to sit at a bound, and discards at least half of the candidates.
The 3-set variant additionally retires coordinates proven strictly
interior into a running aggregate; the 5-set variant also tracks
one-sided knowledge (proven below upper / above lower) so such
coordinates retire as soon as the opposite side resolves.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .families import Sense, aggregate_mu, dual_basis
from .problem import ProblemInstance, Solution, Status, primal_fill, primal_vector

__all__ = ["quickselect_median", "interior_solve", "solve_breakpoint", "BreakpointDiagnostics"]

_FREE, _BELOW_UPPER, _ABOVE_LOWER = 0, 1, 2


def quickselect_median(values) -> float:
    """Lower median (index ceil(len/2)-1 of the sorted order) in expected
    linear time via introselect partitioning.

    ndarray inputs are partitioned in place; other sequences are copied.
    """
    if isinstance(values, np.ndarray):
        arr = values
    else:
        arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("median of empty array")
    k = (arr.size - 1) // 2
    arr.partition(k)
    return float(arr[k])


def interior_solve(inst: ProblemInstance, aggregates: tuple[float, float], budget: float) -> float:
    """Dual value at which the aggregated free set uses exactly ``budget``."""
    const, coef = aggregates
    return aggregate_mu(inst.family, const, coef, budget)


@dataclass
class BreakpointDiagnostics:
    """Per-iteration log used by invariant tests."""

    mu_median: list[float] = field(default_factory=list)
    usage: list[float] = field(default_factory=list)
    budget: list[float] = field(default_factory=list)
    n_candidates: list[int] = field(default_factory=list)
    bracket: list[tuple[float, float]] = field(default_factory=list)


def solve_breakpoint(
    inst: ProblemInstance,
    variant: str = "mb5",
    diagnostics: BreakpointDiagnostics | None = None,
) -> Solution:
    if variant not in ("mb2", "mb3", "mb5"):
        raise ValueError(f"unknown breakpoint variant {variant!r}")
    level = int(variant[2])
    t0 = time.perf_counter_ns()

    if inst.sense is Sense.LESS_EQUAL:
        x0 = primal_vector(inst, 0.0)
        if inst.resource(x0) <= inst.b:
            return Solution(x0, 0.0, Status.OPTIMAL, 0, time.perf_counter_ns() - t0)

    bp = inst.breakpoints
    idx = np.arange(inst.n)
    mul = bp.mu_l.copy()
    muu = bp.mu_u.copy()
    rc = inst.res_const.copy()
    rk = inst.res_coef.copy()
    al = inst.a * inst.l
    au = inst.a * inst.u
    role = np.zeros(inst.n, dtype=np.int8) if level == 5 else None

    bps = np.concatenate([mul, muu])
    x = np.empty(inst.n)
    budget = inst.b
    mu_lo, mu_hi = -np.inf, np.inf
    locked_const = locked_coef = 0.0
    locked_idx: list[np.ndarray] = []
    iters = 0

    def fill_at(mu_star: float) -> Solution:
        # value every unresolved coordinate from the clamped map at mu_star
        rest = idx if not locked_idx else np.concatenate([idx, *locked_idx])
        if rest.size:
            x[rest] = primal_fill(inst, rest, mu_star)
        return Solution(x, float(mu_star), Status.OPTIMAL, iters, time.perf_counter_ns() - t0)

    while bps.size:
        mu_m = quickselect_median(bps)
        iters += 1

        at_lo = mul <= mu_m
        at_hi = muu >= mu_m
        inter = ~(at_lo | at_hi)
        base = dual_basis(inst.family, mu_m)
        usage = (
            float(np.sum(rc[inter])) + base * float(np.sum(rk[inter]))
            + float(np.sum(al[at_lo])) + float(np.sum(au[at_hi]))
            + locked_const + base * locked_coef
        )
        if diagnostics is not None:
            diagnostics.mu_median.append(float(mu_m))
            diagnostics.usage.append(usage)
            diagnostics.budget.append(budget)
            diagnostics.n_candidates.append(int(bps.size))
            diagnostics.bracket.append((mu_lo, mu_hi))

        if abs(usage - budget) <= 1e-12 * max(1.0, abs(budget)):
            return fill_at(mu_m)

        pegged_lower = usage > budget
        if pegged_lower:
            # too much resource used: coordinates past their lower
            # breakpoint are at the lower bound in every optimum
            peg = at_lo
            x[idx[peg]] = inst.l[idx[peg]]
            budget -= float(np.sum(al[peg]))
            mu_lo = mu_m
            bps = bps[bps > mu_m]
        else:
            peg = at_hi
            x[idx[peg]] = inst.u[idx[peg]]
            budget -= float(np.sum(au[peg]))
            mu_hi = mu_m
            bps = bps[bps < mu_m]

        keep = ~peg
        idx, mul, muu, rc, rk, al, au = (
            idx[keep], mul[keep], muu[keep], rc[keep], rk[keep], al[keep], au[keep],
        )
        if role is not None:
            role = role[keep]
        if level == 5:
            if pegged_lower:
                newly_below = (role == _FREE) & (muu <= mu_lo)
                role[newly_below] = _BELOW_UPPER
                to_m = (role == _ABOVE_LOWER) & (muu <= mu_lo)
            else:
                newly_above = (role == _FREE) & (mul >= mu_hi)
                role[newly_above] = _ABOVE_LOWER
                to_m = (role == _BELOW_UPPER) & (mul >= mu_hi)
        elif level == 3 and mu_lo > -np.inf and mu_hi < np.inf:
            to_m = (muu <= mu_lo) & (mul >= mu_hi)
        else:
            to_m = None

        if to_m is not None and np.any(to_m):
            locked_const += float(np.sum(rc[to_m]))
            locked_coef += float(np.sum(rk[to_m]))
            locked_idx.append(idx[to_m])
            keep = ~to_m
            idx, mul, muu, rc, rk, al, au = (
                idx[keep], mul[keep], muu[keep], rc[keep], rk[keep], al[keep], au[keep],
            )
            if role is not None:
                role = role[keep]

    # candidate list exhausted: remaining coordinates are strictly interior
    n_locked = sum(a.size for a in locked_idx)
    if idx.size + n_locked == 0:
        if abs(budget) > 1e-9 * max(1.0, abs(inst.b)):
            return Solution(x, mu_lo, Status.FAILED, iters, time.perf_counter_ns() - t0)
        if np.isfinite(mu_lo) and np.isfinite(mu_hi):
            mu_star = 0.5 * (mu_lo + mu_hi)
        else:
            mu_star = mu_lo if np.isfinite(mu_lo) else (mu_hi if np.isfinite(mu_hi) else 0.0)
        return Solution(x, float(mu_star), Status.OPTIMAL, iters, time.perf_counter_ns() - t0)

    const = float(np.sum(rc)) + locked_const
    coef = float(np.sum(rk)) + locked_coef
    try:
        mu_star = interior_solve(inst, (const, coef), budget)
    except ValueError:
        return Solution(x, mu_lo, Status.FAILED, iters, time.perf_counter_ns() - t0)
    return fill_at(mu_star)
