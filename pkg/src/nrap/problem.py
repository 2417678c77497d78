"""Problem model: instances, breakpoints, the dual-to-primal map, and the
KKT residual report used to verify every solver.

The problem is to minimize ``sum_j phi_j(x_j)`` subject to
``sum_j a_j x_j = b`` (or ``<= b``) and ``l_j <= x_j <= u_j`` with all
``a_j > 0`` and each ``phi_j`` strictly convex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .families import (
    Family,
    Sense,
    PARAM_FIELDS,
    dual_basis,
    mu_positive,
    x_positive,
)

__all__ = [
    "ProblemInstance",
    "Breakpoints",
    "KktReport",
    "Solution",
    "Status",
    "compute_breakpoints",
    "primal_from_dual",
    "primal_vector",
    "kkt_residual",
    "eval_objective",
    "dphi",
    "x_interior",
]

# Relative width of the boundary band used when classifying a coordinate
# as "at a bound" for the one-sided stationarity test.
BOUNDARY_EPS = 1e-12


class Status(str, Enum):
    OPTIMAL = "optimal"
    APPROXIMATE = "approximate"
    FAILED = "failed"


def _as_vec(v, n: int | None = None) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if n is not None and arr.shape != (n,):
        raise ValueError(f"expected vector of length {n}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Immutable problem data plus precomputed per-index coefficients.

    ``params`` holds the family's per-index parameter vectors (see
    :data:`nrap.families.PARAM_FIELDS`).  After construction the arrays
    ``res_const``/``res_coef`` satisfy
    ``a_j * x_j(mu) = res_const_j + res_coef_j * dual_basis(family, mu)``
    for the unclamped interior map, and ``breakpoints`` caches the dual
    values at which each coordinate enters its bounds.
    """

    family: Family
    sense: Sense
    b: float
    a: np.ndarray
    l: np.ndarray
    u: np.ndarray
    params: dict[str, np.ndarray]

    res_const: np.ndarray = field(init=False, repr=False)
    res_coef: np.ndarray = field(init=False, repr=False)
    breakpoints: "Breakpoints" = field(init=False, repr=False)

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "sense", Sense(self.sense))
        object.__setattr__(self, "b", float(self.b))
        a = _as_vec(self.a)
        n = a.size
        l = _as_vec(self.l, n)
        u = _as_vec(self.u, n)
        params = {k: _as_vec(v, n) for k, v in self.params.items()}
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "params", params)
        self._validate()
        self._precompute()
        for arr in (a, l, u, *params.values(), self.res_const, self.res_coef):
            arr.flags.writeable = False

    # -- validation -------------------------------------------------------

    def _validate(self):
        fam = self.family
        expected = set(PARAM_FIELDS[fam])
        if set(self.params) != expected:
            raise ValueError(f"{fam.value} requires params {sorted(expected)}")
        for name, arr in (("a", self.a), ("l", self.l), ("u", self.u), *self.params.items()):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite values in {name}")
        if not np.isfinite(self.b):
            raise ValueError("non-finite b")
        if np.any(self.a <= 0):
            raise ValueError("constraint coefficients must be positive")
        if np.any(self.l >= self.u):
            raise ValueError("bounds must satisfy l < u")
        p = self.params
        if fam is Family.QUADRATIC and np.any(p["w"] <= 0):
            raise ValueError("quadratic weights must be positive")
        if fam is Family.STRATIFIED:
            if np.any(p["M"] <= 0) or np.any(p["rho"] <= 0) or np.any(self.l <= 0):
                raise ValueError("stratified requires M > 0, rho > 0, l > 0")
            if float(np.sum(p["M"])) <= 1.0:
                raise ValueError("stratified requires a total population above 1")
        if fam is Family.SAMPLING and (np.any(p["c"] <= 0) or np.any(self.l < 0)):
            raise ValueError("sampling requires c > 0 and l >= 0")
        if fam is Family.SEARCH and (np.any(p["m"] <= 0) or np.any(p["bparam"] <= 0)):
            raise ValueError("search requires m > 0 and bparam > 0")
        if fam is Family.NEGENTROPY:
            if np.any(p["c"] <= 0) or np.any(self.l <= 0):
                raise ValueError("negentropy requires c > 0 and l > 0")
            if np.any(self.a != 1.0):
                raise ValueError("negentropy fixes all constraint coefficients to 1")
        lo = float(self.a @ self.l)
        hi = float(self.a @ self.u)
        slack = 1e-9 * max(1.0, abs(lo), abs(hi))
        if self.b < lo - slack:
            raise ValueError(f"infeasible: b={self.b} below sum(a*l)={lo}")
        if self.sense is Sense.EQUALITY and self.b > hi + slack:
            raise ValueError(f"infeasible: b={self.b} above sum(a*u)={hi}")

    # -- derived data -----------------------------------------------------

    def _precompute(self):
        fam, a, p = self.family, self.a, self.params
        if fam is Family.QUADRATIC:
            const = a * p["c"] / p["w"]
            coef = -(a * a) / p["w"]
        elif fam is Family.STRATIFIED:
            mtot = float(np.sum(p["M"]))
            ceff = p["M"] * p["rho"] ** 2 / (mtot - 1.0)
            object.__setattr__(self, "_ceff", ceff)
            object.__setattr__(self, "_mtot", mtot)
            const = np.zeros_like(a)
            coef = np.sqrt(a * ceff)
        elif fam is Family.SAMPLING:
            const = np.zeros_like(a)
            coef = np.sqrt(a * p["c"])
        elif fam is Family.SEARCH:
            const = (a / p["bparam"]) * np.log(p["m"] * p["bparam"] / a)
            coef = -a / p["bparam"]
        else:  # NEGENTROPY
            const = np.zeros_like(a)
            coef = p["c"].copy()
        object.__setattr__(self, "res_const", const)
        object.__setattr__(self, "res_coef", coef)
        with np.errstate(divide="ignore"):
            mu_l = -dphi(self, self.l) / self.a
            mu_u = -dphi(self, self.u) / self.a
        object.__setattr__(self, "breakpoints", Breakpoints(mu_l=mu_l, mu_u=mu_u))

    @property
    def n(self) -> int:
        return self.a.size

    def resource(self, x: np.ndarray) -> float:
        """Left-hand side of the resource constraint at ``x``."""
        return float(self.a @ np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Breakpoints:
    """Dual values at which each coordinate leaves its bounds.

    ``x_j(mu) = l_j`` for ``mu >= mu_l[j]`` and ``x_j(mu) = u_j`` for
    ``mu <= mu_u[j]``; strict convexity gives ``mu_u[j] < mu_l[j]``.
    A ``mu_l`` entry may be +inf (sampling instances with ``l_j = 0``),
    meaning the coordinate is never pushed to its lower bound by any
    finite dual value.
    """

    mu_l: np.ndarray
    mu_u: np.ndarray


@dataclass(frozen=True)
class KktReport:
    """Scale-aware first-order optimality residuals for a primal/dual pair."""

    feasibility_residual: float
    stationarity_residual: float
    complementarity_residual: float
    sign_violation: float

    @property
    def max_residual(self) -> float:
        return max(
            self.feasibility_residual,
            self.stationarity_residual,
            self.complementarity_residual,
            self.sign_violation,
        )


@dataclass
class Solution:
    """Primal/dual output of a solver run."""

    x: np.ndarray
    mu: float
    status: Status
    iterations: int
    elapsed_ns: int = 0


# ---------------------------------------------------------------------------
# Family formulas on an instance
# ---------------------------------------------------------------------------


def dphi(inst: ProblemInstance, x, idx=None) -> np.ndarray:
    """Derivatives phi_j'(x_j), vectorized; ``idx`` selects a subset."""
    fam, p = inst.family, inst.params
    x = np.asarray(x, dtype=float)

    def pick(arr):
        return arr if idx is None else arr[idx]

    if fam is Family.QUADRATIC:
        return pick(p["w"]) * x - pick(p["c"])
    if fam is Family.STRATIFIED:
        return -pick(inst._ceff) / (x * x)
    if fam is Family.SAMPLING:
        return -pick(p["c"]) / (x * x)
    if fam is Family.SEARCH:
        bp = pick(p["bparam"])
        return -pick(p["m"]) * bp * np.exp(-bp * x)
    return np.log(x / pick(p["c"]))


def _phi_terms(inst: ProblemInstance, x: np.ndarray) -> np.ndarray:
    fam, p = inst.family, inst.params
    if fam is Family.QUADRATIC:
        return 0.5 * p["w"] * x * x - p["c"] * x
    if fam is Family.STRATIFIED:
        return inst._ceff * (1.0 / x - 1.0 / inst._mtot)
    if fam is Family.SAMPLING:
        return p["c"] / x
    if fam is Family.SEARCH:
        return p["m"] * (np.exp(-p["bparam"] * x) - 1.0)
    return x * (np.log(x / p["c"]) - 1.0)


def eval_objective(inst: ProblemInstance, x) -> float:
    """Objective value ``sum_j phi_j(x_j)``.

    Raises ValueError when some ``x_j`` is outside the family's domain
    (nonpositive for the stratified, sampling, and negentropy families).
    """
    x = _as_vec(x, inst.n)
    if x_positive(inst.family) and np.any(x <= 0):
        raise ValueError(f"{inst.family.value} objective requires x > 0")
    return float(np.sum(_phi_terms(inst, x)))


def x_interior(inst: ProblemInstance, mu: float, idx=None) -> np.ndarray:
    """Unclamped minimizers of ``phi_j(x) + mu a_j x`` (interior formula).

    Raises ValueError for ``mu <= 0`` on families whose interior formula
    lives on the positive dual half-line.
    """
    if mu_positive(inst.family) and mu <= 0.0:
        raise ValueError(f"interior formula undefined at mu={mu} for {inst.family.value}")
    t = dual_basis(inst.family, mu)
    if idx is None:
        return (inst.res_const + inst.res_coef * t) / inst.a
    return (inst.res_const[idx] + inst.res_coef[idx] * t) / inst.a[idx]


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def compute_breakpoints(inst: ProblemInstance) -> Breakpoints:
    """Per-index dual breakpoints (cached on the instance)."""
    return inst.breakpoints


def primal_vector(inst: ProblemInstance, mu: float) -> np.ndarray:
    """Clamped minimizer x(mu) of the partial Lagrangian, all coordinates."""
    bp = inst.breakpoints
    at_l = mu >= bp.mu_l
    at_u = mu <= bp.mu_u
    x = np.where(at_l, inst.l, inst.u)
    inter = ~(at_l | at_u)
    if np.any(inter):
        x = np.array(x, dtype=float)
        x[inter] = x_interior(inst, mu, inter)
    return x


def primal_fill(inst: ProblemInstance, idx: np.ndarray, mu: float) -> np.ndarray:
    """Clamped map values at ``mu`` for selected indices, robust to
    degenerate geometry.

    A coordinate whose breakpoint lies within the rounding-absorption
    width of ``mu`` (the dual distance over which its resource
    contribution is smaller than the rounding floor of the total) is
    snapped to its bound instead of receiving an interior value a few
    ulps inside it.
    """
    from .families import dual_basis_slope  # local to avoid import cycle noise

    bp = inst.breakpoints
    eps = np.finfo(float).eps
    slope = np.abs(inst.res_coef[idx]) * abs(dual_basis_slope(inst.family, mu))
    pad = 64.0 * eps * max(1.0, abs(inst.b)) / np.maximum(slope, 1e-300)
    pad += 8.0 * eps * max(1.0, abs(mu))
    at_lo = bp.mu_l[idx] <= mu + pad
    at_hi = bp.mu_u[idx] >= mu - pad
    t = dual_basis(inst.family, mu)
    vals = (inst.res_const[idx] + inst.res_coef[idx] * t) / inst.a[idx]
    vals = np.clip(vals, inst.l[idx], inst.u[idx])
    return np.where(at_lo, inst.l[idx], np.where(at_hi, inst.u[idx], vals))


def primal_from_dual(inst: ProblemInstance, mu: float, j: int) -> float:
    """Value of coordinate ``j`` of the clamped map x(mu)."""
    bp = inst.breakpoints
    if mu >= bp.mu_l[j]:
        return float(inst.l[j])
    if mu <= bp.mu_u[j]:
        return float(inst.u[j])
    if mu_positive(inst.family) and mu <= 0.0:
        raise ValueError(
            f"mu={mu} strictly between breakpoints of index {j} but outside the "
            f"dual domain of {inst.family.value}; instance data is inconsistent"
        )
    return float(x_interior(inst, mu, np.array([j]))[0])


def kkt_residual(inst: ProblemInstance, x, mu: float) -> KktReport:
    """First-order optimality residuals of the pair ``(x, mu)``.

    The stationarity defect of each coordinate is one-sided at a bound
    (within a relative band of width BOUNDARY_EPS) and scaled by
    ``max(1, |phi_j'(x_j)|)``; coordinates outside the box make it +inf.
    For the inequality sense the feasibility residual counts only
    constraint violation, and complementarity/sign terms apply.
    """
    x = _as_vec(x, inst.n)
    total = inst.resource(x)
    if inst.sense is Sense.EQUALITY:
        feas = abs(total - inst.b)
        comp = 0.0
        sign = 0.0
    else:
        feas = max(0.0, total - inst.b)
        comp = abs(mu * (total - inst.b))
        sign = max(0.0, -mu)

    if np.any(x < inst.l) or np.any(x > inst.u):
        stat = float("inf")
    else:
        width = BOUNDARY_EPS * (inst.u - inst.l)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = dphi(inst, x) + mu * inst.a
            scale = np.maximum(1.0, np.abs(dphi(inst, x)))
        at_lo = x <= inst.l + width
        at_hi = x >= inst.u - width
        defect = np.where(at_lo, np.maximum(0.0, -g), np.where(at_hi, np.maximum(0.0, g), np.abs(g)))
        stat = float(np.max(defect / scale)) if inst.n else 0.0

    return KktReport(
        feasibility_residual=float(feas),
        stationarity_residual=stat,
        complementarity_residual=float(comp),
        sign_violation=float(sign),
    )
