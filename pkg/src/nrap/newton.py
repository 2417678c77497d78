"""Quasi-Newton dual search (nz).

Finds a root of the monotone residual ``psi(mu) = b - sum_j a_j x_j(mu)``
by Newton steps whose slope comes from a one-sided-clamp envelope of the
primal map: when ``psi > 0`` the lower clamps are dropped, when
``psi < 0`` the upper clamps are dropped.  The method stops at a
relative feasibility criterion and therefore returns approximate
solutions; on stiff instances it may fail, which is a valid outcome.

Applies to equality-constrained instances only.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .families import Sense, dual_basis, dual_basis_slope, mu_positive
from .problem import ProblemInstance, Solution, Status, primal_vector

__all__ = ["NzConfig", "NzTrace", "NzStepResult", "psi", "psi_upper", "psi_lower", "nz_step", "solve_nz"]


@dataclass(frozen=True)
class NzConfig:
    eps: float = 0.01              # relative feasibility stop |sum(a*x)/b - 1| < eps
    max_iters: int = 10_000        # per start
    per_start_time_cap: float = 100.0   # seconds
    total_time_cap: float = 300.0       # seconds

    def __post_init__(self):
        if self.eps <= 0 or self.max_iters < 1:
            raise ValueError("eps must be positive and max_iters >= 1")
        if self.per_start_time_cap <= 0 or self.total_time_cap <= 0:
            raise ValueError("time caps must be positive")


@dataclass
class NzTrace:
    iterations: int
    restarts: int
    final_relative_residual: float
    status: Status


@dataclass
class NzStepResult:
    converged: bool
    mu: float


class NzState:
    """Bracket and expansion bookkeeping for the degenerate-step fallback."""

    def __init__(self):
        self.neg_mu = None   # largest mu seen with psi <= 0
        self.pos_mu = None   # smallest mu seen with psi >= 0
        self.step = 1.0

    def record(self, mu: float, value: float):
        if value <= 0.0 and (self.neg_mu is None or mu > self.neg_mu):
            self.neg_mu = mu
        if value >= 0.0 and (self.pos_mu is None or mu < self.pos_mu):
            self.pos_mu = mu

    def fallback(self, mu: float, value: float, positive_domain: bool) -> float:
        if self.neg_mu is not None and self.pos_mu is not None and self.neg_mu < self.pos_mu:
            return 0.5 * (self.neg_mu + self.pos_mu)
        if value > 0.0:  # root lies below mu
            if positive_domain:
                return mu / 2.0
            nxt = mu - self.step
        else:            # root lies above mu
            if mu > 0.0:
                return mu * 2.0
            nxt = mu + self.step
        self.step *= 2.0
        return nxt


def _check_domain(inst: ProblemInstance, mu: float):
    if mu_positive(inst.family) and mu <= 0.0:
        raise ValueError(f"mu={mu} outside the dual domain of {inst.family.value}")


def psi(inst: ProblemInstance, mu: float) -> float:
    """Dual residual b - sum_j a_j x_j(mu) (nondecreasing in mu)."""
    _check_domain(inst, mu)
    return inst.b - inst.resource(primal_vector(inst, mu))


def _relative_residual(b: float, psi_value: float) -> float:
    """|sum(a*x)/b - 1|, falling back to an absolute residual at b = 0."""
    return abs(psi_value / b) if b != 0.0 else abs(psi_value)


def _envelope(inst: ProblemInstance, mu: float, drop_lower: bool) -> tuple[float, float]:
    """Value and slope of the one-sided-clamp envelope at mu."""
    _check_domain(inst, mu)
    bp = inst.breakpoints
    base = dual_basis(inst.family, mu)
    if drop_lower:
        active = mu >= bp.mu_u   # unclamped side of min(x_hat, u)
        clamped_part = float(np.sum(inst.a[~active] * inst.u[~active]))
    else:
        active = mu <= bp.mu_l   # unclamped side of max(l, x_hat)
        clamped_part = float(np.sum(inst.a[~active] * inst.l[~active]))
    coef = float(np.sum(inst.res_coef[active]))
    const = float(np.sum(inst.res_const[active]))
    value = inst.b - (const + coef * base + clamped_part)
    slope = -coef * dual_basis_slope(inst.family, mu)
    return value, slope


def psi_upper(inst: ProblemInstance, mu: float) -> float:
    """Envelope with lower clamps dropped; majorizes psi."""
    return _envelope(inst, mu, drop_lower=True)[0]


def psi_lower(inst: ProblemInstance, mu: float) -> float:
    """Envelope with upper clamps dropped; minorizes psi."""
    return _envelope(inst, mu, drop_lower=False)[0]


def nz_step(
    inst: ProblemInstance,
    mu: float,
    cfg: NzConfig = NzConfig(),
    state: NzState | None = None,
) -> NzStepResult:
    """One quasi-Newton update from ``mu``.

    Returns Converged (the relaxed feasibility criterion holds) or the
    next iterate.  A zero/unusable envelope slope, or a step leaving the
    dual domain, falls back to one bisection step on the sign-changing
    bracket collected so far (or a geometric expansion before a bracket
    exists).
    """
    if state is None:
        state = NzState()
    value = psi(inst, mu)
    state.record(mu, value)
    if _relative_residual(inst.b, value) < cfg.eps:
        return NzStepResult(True, mu)

    _, slope = _envelope(inst, mu, drop_lower=value > 0.0)
    positive_domain = mu_positive(inst.family)
    if slope > 0.0 and np.isfinite(slope):
        nxt = mu - value / slope
        if np.isfinite(nxt) and nxt != mu and not (positive_domain and nxt <= 0.0):
            return NzStepResult(False, nxt)
    return NzStepResult(False, state.fallback(mu, value, positive_domain))


def _start_points(inst: ProblemInstance) -> list[float]:
    bp = inst.breakpoints
    finite_l = bp.mu_l[np.isfinite(bp.mu_l)]
    mean_l = float(np.mean(finite_l)) if finite_l.size else float(np.mean(bp.mu_u))
    mean_u = float(np.mean(bp.mu_u))
    mean_all = 0.5 * (mean_l + mean_u)
    starts = [mean_all, mean_l, mean_u]
    if mu_positive(inst.family):
        starts = [s if s > 0.0 else 1.0 for s in starts]
    return starts


def solve_nz(inst: ProblemInstance, cfg: NzConfig = NzConfig()) -> tuple[Solution, NzTrace]:
    """Run the quasi-Newton search with up to two restarts.

    The first start is the mean of all breakpoints, then the mean of the
    lower-bound breakpoints, then the mean of the upper-bound ones.
    Each start is capped by iterations and wall time; exhausting all
    starts returns a Failed solution (a valid outcome, not an error).
    """
    if inst.sense is not Sense.EQUALITY:
        raise ValueError("the quasi-Newton solver applies to equality instances only")
    t0 = time.perf_counter_ns()
    wall0 = time.monotonic()
    total_iters = 0
    mu = None
    for restart, start in enumerate(_start_points(inst)):
        mu = start
        state = NzState()
        start_wall = time.monotonic()
        for _ in range(cfg.max_iters):
            total_iters += 1
            step = nz_step(inst, mu, cfg, state)
            mu = step.mu
            if step.converged:
                x = primal_vector(inst, mu)
                resid = _relative_residual(inst.b, inst.b - inst.resource(x))
                trace = NzTrace(total_iters, restart, resid, Status.APPROXIMATE)
                sol = Solution(x, float(mu), Status.APPROXIMATE, total_iters,
                               time.perf_counter_ns() - t0)
                return sol, trace
            now = time.monotonic()
            if now - start_wall > cfg.per_start_time_cap or now - wall0 > cfg.total_time_cap:
                break
        if time.monotonic() - wall0 > cfg.total_time_cap:
            break
    x = primal_vector(inst, mu)
    resid = _relative_residual(inst.b, inst.b - inst.resource(x))
    trace = NzTrace(total_iters, 2, resid, Status.FAILED)
    sol = Solution(x, float(mu), Status.FAILED, total_iters, time.perf_counter_ns() - t0)
    return sol, trace
