"""Relaxation (variable-fixing) solvers.

Ten variants named ``<det><eval><sets>``:

* determination ``p``/``d`` — solve the bound-relaxed problem for the
  primal vector directly, or for the dual value (classifying against
  precomputed breakpoints);
* evaluation ``i``/``e``/``b`` — judge the relaxed solution implicitly
  from its excess/deficit, explicitly from its clamped resource use, or
  pick per iteration from the set cardinalities;
* pegging ``2``/``3``/``5`` — track only the pegged bounds, also retire
  proven-interior coordinates into an aggregate, or additionally keep
  one-sided knowledge so classification work keeps shrinking.

Available: pir2, dir2, dir3, dir5, der2, der3, der5, dbr2, dbr3, dbr5.

Every iteration solves the relaxed problem over the unpegged set in
O(1) from maintained aggregates, pegs at least one coordinate unless
optimal, and tightens a dual bracket that always contains the optimum.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .families import Family, Sense, dual_basis_inverse
from .problem import ProblemInstance, Solution, Status, primal_vector

__all__ = [
    "RELAXATION_VARIANTS",
    "RelaxState",
    "RelaxationDiagnostics",
    "solve_relaxation",
    "relaxed_dual",
    "relaxed_primal",
    "implicit_evaluate",
    "explicit_evaluate",
]

RELAXATION_VARIANTS = (
    "pir2", "dir2", "dir3", "dir5", "der2", "der3", "der5", "dbr2", "dbr3", "dbr5",
)

_FREE, _BELOW_UPPER, _ABOVE_LOWER = 0, 1, 2
_POSITIVE_BASIS = {Family.STRATIFIED, Family.SAMPLING, Family.NEGENTROPY}


@dataclass
class RelaxationDiagnostics:
    """Per-iteration log used by invariant tests and the acceptance suite.

    Both evaluations are computed each iteration (regardless of the
    variant) together with the classification made the primal way and
    the dual way.
    """

    excess: list[float] = field(default_factory=list)
    deficit: list[float] = field(default_factory=list)
    usage: list[float] = field(default_factory=list)
    budget: list[float] = field(default_factory=list)
    decision_implicit: list[int] = field(default_factory=list)  # -1 peg lower, 0 stop, +1 peg upper
    decision_explicit: list[int] = field(default_factory=list)
    lower_primal: list[np.ndarray] = field(default_factory=list)
    lower_dual: list[np.ndarray] = field(default_factory=list)
    upper_primal: list[np.ndarray] = field(default_factory=list)
    upper_dual: list[np.ndarray] = field(default_factory=list)
    agg_drift: list[float] = field(default_factory=list)
    bracket: list[tuple[float, float]] = field(default_factory=list)


class RelaxState:
    """Mutable working state of one relaxation solve.

    Arrays hold the classification working set (the free set, plus the
    one-sided sets for 5-set pegging, tagged by ``role``); coordinates
    proven strictly interior leave the arrays and survive only in the
    ``locked_*`` aggregate and index list.  ``agg_const``/``agg_coef``
    aggregate the whole unpegged set, so the relaxed problem is solved
    in O(1).
    """

    def __init__(self, inst: ProblemInstance, with_breakpoints: bool, with_roles: bool):
        self.inst = inst
        self.idx = np.arange(inst.n)
        self.rc = inst.res_const.copy()
        self.rk = inst.res_coef.copy()
        self.a = inst.a.copy()
        self.l = inst.l.copy()
        self.u = inst.u.copy()
        self.al = inst.a * inst.l
        self.au = inst.a * inst.u
        if with_breakpoints:
            self.mul = inst.breakpoints.mu_l.copy()
            self.muu = inst.breakpoints.mu_u.copy()
        else:
            self.mul = self.muu = None
        self.role = np.zeros(inst.n, dtype=np.int8) if with_roles else None
        self.budget = inst.b
        self.agg_const = float(np.sum(self.rc))
        self.agg_coef = float(np.sum(self.rk))
        self.locked_const = 0.0
        self.locked_coef = 0.0
        self.locked_idx: list[np.ndarray] = []
        self.mu_lo = -np.inf
        self.mu_hi = np.inf
        self.basis_val = 0.0  # basis value of the current relaxed solution

    # -- relaxed problem ----------------------------------------------------

    def relaxed_basis(self) -> float:
        """Basis value of the relaxed optimum over the unpegged set."""
        t = (self.budget - self.agg_const) / self.agg_coef
        fam = self.inst.family
        if t <= 0.0 and fam in _POSITIVE_BASIS:
            # these families have a positive basis range; a nonpositive
            # value means the reduced budget is impossible (corrupt pegging)
            raise ValueError(f"reduced budget {self.budget} infeasible for {fam.value}")
        self.basis_val = t
        return t

    def relaxed_dual(self) -> float:
        """Optimal dual value of the bound-relaxed reduced problem."""
        return dual_basis_inverse(self.inst.family, self.relaxed_basis())

    def relaxed_primal(self) -> np.ndarray:
        """Relaxed primal values over the working arrays (unclamped)."""
        self.relaxed_basis()
        return (self.rc + self.rk * self.basis_val) / self.a

    # -- classification and evaluation ---------------------------------------

    def classify_primal(self, xh: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        low = xh <= self.l
        up = xh >= self.u
        if self.role is not None:
            low &= self.role != _ABOVE_LOWER
            up &= self.role != _BELOW_UPPER
        return low, up

    def classify_dual(self, mu_hat: float) -> tuple[np.ndarray, np.ndarray]:
        low = mu_hat >= self.mul
        up = mu_hat <= self.muu
        if self.role is not None:
            low &= self.role != _ABOVE_LOWER
            up &= self.role != _BELOW_UPPER
        return low, up

    def implicit_evaluate(self, low: np.ndarray, up: np.ndarray) -> tuple[float, float]:
        """Excess over the upper bounds and deficit under the lower ones."""
        t = self.basis_val
        excess = float(np.sum(self.rc[up] + self.rk[up] * t - self.au[up]))
        deficit = float(np.sum(self.al[low] - self.rc[low] - self.rk[low] * t))
        return excess, deficit

    def explicit_evaluate(self, low: np.ndarray, up: np.ndarray) -> float:
        """Resource used by the clamped relaxed solution."""
        t = self.basis_val
        out = low | up
        interior = (
            self.agg_const + self.agg_coef * t
            - float(np.sum(self.rc[out] + self.rk[out] * t))
        )
        return interior + float(np.sum(self.al[low])) + float(np.sum(self.au[up]))

    # -- pegging --------------------------------------------------------------

    def peg(self, sel: np.ndarray, x: np.ndarray, lower: bool, mu_hat: float):
        which = self.idx[sel]
        if lower:
            x[which] = self.inst.l[which]
            self.budget -= float(np.sum(self.al[sel]))
            self.mu_lo = mu_hat
        else:
            x[which] = self.inst.u[which]
            self.budget -= float(np.sum(self.au[sel]))
            self.mu_hi = mu_hat
        self.agg_const -= float(np.sum(self.rc[sel]))
        self.agg_coef -= float(np.sum(self.rk[sel]))
        self._compact(~sel)
        self._transfer(lower)

    def _compact(self, keep: np.ndarray):
        self.idx = self.idx[keep]
        self.rc = self.rc[keep]
        self.rk = self.rk[keep]
        self.a = self.a[keep]
        self.l = self.l[keep]
        self.u = self.u[keep]
        self.al = self.al[keep]
        self.au = self.au[keep]
        if self.mul is not None:
            self.mul = self.mul[keep]
            self.muu = self.muu[keep]
        if self.role is not None:
            self.role = self.role[keep]

    def _transfer(self, pegged_lower: bool):
        # retire coordinates whose bound checks the bracket has settled
        if self.mul is None:
            return
        if self.role is not None:
            if pegged_lower:
                below = (self.role == _FREE) & (self.muu <= self.mu_lo)
                self.role[below] = _BELOW_UPPER
                to_m = (self.role == _ABOVE_LOWER) & (self.muu <= self.mu_lo)
            else:
                above = (self.role == _FREE) & (self.mul >= self.mu_hi)
                self.role[above] = _ABOVE_LOWER
                to_m = (self.role == _BELOW_UPPER) & (self.mul >= self.mu_hi)
        elif np.isfinite(self.mu_lo) and np.isfinite(self.mu_hi):
            to_m = (self.muu <= self.mu_lo) & (self.mul >= self.mu_hi)
        else:
            return
        if np.any(to_m):
            self.locked_const += float(np.sum(self.rc[to_m]))
            self.locked_coef += float(np.sum(self.rk[to_m]))
            self.locked_idx.append(self.idx[to_m])
            self._compact(~to_m)

    # -- bookkeeping ------------------------------------------------------------

    @property
    def n_locked(self) -> int:
        return sum(arr.size for arr in self.locked_idx)

    def n_unpegged(self) -> int:
        return self.idx.size + self.n_locked

    def scratch_aggregates(self) -> tuple[float, float]:
        """From-scratch recomputation of the unpegged aggregates."""
        rest = self.idx if not self.locked_idx else np.concatenate([self.idx, *self.locked_idx])
        inst = self.inst
        return float(np.sum(inst.res_const[rest])), float(np.sum(inst.res_coef[rest]))


def relaxed_dual(state: RelaxState) -> float:
    return state.relaxed_dual()


def relaxed_primal(state: RelaxState) -> np.ndarray:
    return state.relaxed_primal()


def implicit_evaluate(state: RelaxState, low: np.ndarray, up: np.ndarray) -> tuple[float, float]:
    return state.implicit_evaluate(low, up)


def explicit_evaluate(state: RelaxState, low: np.ndarray, up: np.ndarray) -> float:
    return state.explicit_evaluate(low, up)


def _decide_implicit(excess: float, deficit: float) -> int:
    if abs(excess - deficit) <= 1e-12 * max(1.0, excess + deficit):
        return 0
    return 1 if excess > deficit else -1


def _decide_explicit(usage: float, budget: float) -> int:
    if abs(usage - budget) <= 1e-12 * max(1.0, abs(budget)):
        return 0
    return -1 if usage > budget else 1


def solve_relaxation(
    inst: ProblemInstance,
    variant: str = "dbr5",
    diagnostics: RelaxationDiagnostics | None = None,
) -> Solution:
    variant = variant.lower()
    if variant not in RELAXATION_VARIANTS:
        raise ValueError(f"unknown relaxation variant {variant!r}")
    det, ev, level = variant[0], variant[1], int(variant[-1])
    t0 = time.perf_counter_ns()

    if inst.sense is Sense.LESS_EQUAL:
        x0 = primal_vector(inst, 0.0)
        if inst.resource(x0) <= inst.b:
            return Solution(x0, 0.0, Status.OPTIMAL, 0, time.perf_counter_ns() - t0)

    need_bp = det == "d" or level >= 3 or diagnostics is not None
    st = RelaxState(inst, with_breakpoints=need_bp, with_roles=level == 5)
    x = np.empty(inst.n)
    iters = 0

    def finish(mu: float, status: Status = Status.OPTIMAL) -> Solution:
        return Solution(x, float(mu), status, iters, time.perf_counter_ns() - t0)

    def fill_unpegged(low, up, mu_hat):
        rest = ~(low | up)
        which = st.idx[rest]
        if which.size:
            x[which] = primal_fill(inst, which, mu_hat)
        x[st.idx[low]] = st.l[low]
        x[st.idx[up]] = st.u[up]
        if st.locked_idx:
            locked = np.concatenate(st.locked_idx)
            x[locked] = primal_fill(inst, locked, mu_hat)

    while True:
        if st.n_unpegged() == 0:
            if np.isfinite(st.mu_lo) and np.isfinite(st.mu_hi):
                mu = 0.5 * (st.mu_lo + st.mu_hi)
            else:
                mu = st.mu_lo if np.isfinite(st.mu_lo) else st.mu_hi
            return finish(mu)
        iters += 1
        if iters > inst.n + 1:
            return finish(st.mu_lo, Status.FAILED)

        try:
            if det == "p":
                xh = st.relaxed_primal()
                mu_hat = None
                low, up = st.classify_primal(xh)
            else:
                mu_hat = st.relaxed_dual()
                low, up = st.classify_dual(mu_hat)
                xh = None
        except ValueError:
            return finish(st.mu_lo, Status.FAILED)

        n_lu = int(np.count_nonzero(low)) + int(np.count_nonzero(up))
        use_explicit = ev == "e" or (ev == "b" and st.idx.size + st.n_locked < 2 * n_lu)

        excess = deficit = usage = 0.0
        if diagnostics is not None or not use_explicit:
            excess, deficit = st.implicit_evaluate(low, up)
        if diagnostics is not None or use_explicit:
            usage = st.explicit_evaluate(low, up)

        if diagnostics is not None:
            if mu_hat is None:
                mu_hat = dual_basis_inverse(inst.family, st.basis_val)
            if xh is None:
                xh = (st.rc + st.rk * st.basis_val) / st.a
            lp, upp = st.classify_primal(xh)
            ld, ud = st.classify_dual(mu_hat)
            diagnostics.excess.append(excess)
            diagnostics.deficit.append(deficit)
            diagnostics.usage.append(usage)
            diagnostics.budget.append(st.budget)
            diagnostics.decision_implicit.append(_decide_implicit(excess, deficit))
            diagnostics.decision_explicit.append(_decide_explicit(usage, st.budget))
            diagnostics.lower_primal.append(np.sort(st.idx[lp]))
            diagnostics.upper_primal.append(np.sort(st.idx[upp]))
            diagnostics.lower_dual.append(np.sort(st.idx[ld]))
            diagnostics.upper_dual.append(np.sort(st.idx[ud]))
            sc, sk = st.scratch_aggregates()
            drift = max(
                abs(sc - st.agg_const) / max(1.0, abs(sc)),
                abs(sk - st.agg_coef) / max(1.0, abs(sk)),
            )
            diagnostics.agg_drift.append(drift)
            diagnostics.bracket.append((st.mu_lo, st.mu_hi))

        decision = (
            _decide_explicit(usage, st.budget) if use_explicit else _decide_implicit(excess, deficit)
        )
        sel = low if decision == -1 else up
        if decision == 0 or not np.any(sel):
            # optimal, or numerically converged with an empty peg set
            if xh is None:
                xh = (st.rc + st.rk * st.basis_val) / st.a
            fill_unpegged(low, up, xh)
            if mu_hat is None:
                mu_hat = dual_basis_inverse(inst.family, st.basis_val)
            return finish(mu_hat)

        if mu_hat is None:
            mu_hat = dual_basis_inverse(inst.family, st.basis_val)
        st.peg(sel, x, lower=decision == -1, mu_hat=mu_hat)
