"""Seeded instance generation with exact control of the interior fraction.

The construction picks a target dual value ``mu*`` (the median of the
breakpoint-interval midpoints of a 1000-tuple pilot sample), assigns
each index a role (strictly interior at ``mu*``, at the lower bound, or
at the upper bound), and rejection-samples that index's parameters
until the role holds at ``mu*`` with a small dual-space safety margin.
The right-hand side is then the exact resource use of the role-assigned
optimum, so the instance's optimal solution has exactly the requested
number of strictly interior coordinates.

Draw protocol (see :mod:`nrap.rng` for the bit-level stream spec):

* pilot stream: tag 1, lanes 0..999, one tuple per lane;
* main stream: tag 2, lane j for index j; stratified lanes draw M first,
  then rounds of the remaining fields; all other families draw the full
  field tuple per round;
* field order per round: quadratic a,w,c,l,u; stratified a,rho,l,u
  (after the one-time M); sampling a,c,l,u; search a,m,bparam,l,u;
  negentropy c,l,u.
* closed ranges map a uniform as ``lo + (hi-lo)*U``; half-open ``(lo,hi]``
  ranges as ``hi - (hi-lo)*U``; the negentropy upper bound is drawn from
  ``(max(30, l_j), 210]`` so that ``u_j > l_j`` holds by construction.

A lane that fails its role 1000 times has its bounds shifted
deterministically by the minimal padded amount that forces the role.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .families import Family, Sense
from .problem import ProblemInstance
from .rng import LaneStreams

__all__ = ["GenSpec", "GenerationError", "generate", "PARAM_RANGES"]

PILOT_SIZE = 1000
MAX_ROUNDS = 1000
_PILOT_TAG = 1
_MAIN_TAG = 2
_MARGIN = 1e-6        # dual-space role margin, relative to max(1, |mu*|)
_SAMPLING_MIN_L = 1e-6

# Uniform parameter ranges per family; u-ranges are half-open (lo, hi].
PARAM_RANGES = {
    Family.QUADRATIC: {"a": (1, 30), "w": (1, 20), "c": (1, 25), "l": (0, 3), "u": (3, 11)},
    Family.STRATIFIED: {"a": (1, 30), "M": (5, 30), "rho": (1, 4), "l": (1, 3), "u": (3, 15)},
    Family.SAMPLING: {"a": (1, 4), "c": (5, 30), "l": (0, 3), "u": (3, 6)},
    Family.SEARCH: {"a": (1, 3), "m": (0.5, 8), "bparam": (0.1, 3), "l": (0, 0.1), "u": (0.1, 5)},
    Family.NEGENTROPY: {"c": (50, 250), "l": (20, 100), "u": (30, 210)},
}

_ROLE_INTERIOR, _ROLE_LOWER, _ROLE_UPPER = 0, 1, 2


class GenerationError(RuntimeError):
    """Raised when an index cannot be forced into its role."""


@dataclass(frozen=True)
class GenSpec:
    family: Family
    n: int
    h_frac: float
    seed: int
    sense: Sense = Sense.EQUALITY

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "sense", Sense(self.sense))
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0.0 <= self.h_frac <= 1.0:
            raise ValueError("h_frac must lie in [0, 1]")
        object.__setattr__(self, "seed", int(self.seed) & ((1 << 64) - 1))


def _draw_fields(family: Family, streams: LaneStreams, active=None) -> dict[str, np.ndarray]:
    r = PARAM_RANGES[family]
    out: dict[str, np.ndarray] = {}
    if family is Family.QUADRATIC:
        order = ("a", "w", "c", "l", "u")
    elif family is Family.STRATIFIED:
        order = ("a", "rho", "l", "u")
    elif family is Family.SAMPLING:
        order = ("a", "c", "l", "u")
    elif family is Family.SEARCH:
        order = ("a", "m", "bparam", "l", "u")
    else:
        order = ("c", "l", "u")
    for name in order:
        lo, hi = r[name]
        if name == "u":
            if family is Family.NEGENTROPY:
                lo = np.maximum(float(lo), out["l"])
                out["u"] = lo + (hi - lo) * (1.0 - streams.uniforms(active))
            else:
                out["u"] = streams.uniform_range(lo, hi, active, open_low=True)
        else:
            out[name] = streams.uniform_range(lo, hi, active)
    if family is Family.SAMPLING:
        out["l"] = np.maximum(out["l"], _SAMPLING_MIN_L)
    return out


def _row_breakpoints(family: Family, f: dict[str, np.ndarray], mtot_minus_1: float | None):
    if family is Family.QUADRATIC:
        return (f["c"] - f["w"] * f["l"]) / f["a"], (f["c"] - f["w"] * f["u"]) / f["a"]
    if family is Family.STRATIFIED:
        k = f["M"] * f["rho"] ** 2 / mtot_minus_1
        return k / (f["a"] * f["l"] ** 2), k / (f["a"] * f["u"] ** 2)
    if family is Family.SAMPLING:
        return f["c"] / (f["a"] * f["l"] ** 2), f["c"] / (f["a"] * f["u"] ** 2)
    if family is Family.SEARCH:
        mb = f["m"] * f["bparam"]
        return (
            mb * np.exp(-f["bparam"] * f["l"]) / f["a"],
            mb * np.exp(-f["bparam"] * f["u"]) / f["a"],
        )
    return np.log(f["c"] / f["l"]), np.log(f["c"] / f["u"])


def _row_interior_x(family: Family, f: dict[str, np.ndarray], mu: float, mtot_minus_1):
    if family is Family.QUADRATIC:
        return (f["c"] - f["a"] * mu) / f["w"]
    if family is Family.STRATIFIED:
        k = f["M"] * f["rho"] ** 2 / mtot_minus_1
        return np.sqrt(k / (f["a"] * mu))
    if family is Family.SAMPLING:
        return np.sqrt(f["c"] / (f["a"] * mu))
    if family is Family.SEARCH:
        return np.log(f["m"] * f["bparam"] / (f["a"] * mu)) / f["bparam"]
    return f["c"] * math.exp(-mu)


def _role_holds(role, mu_l, mu_u, mu_star: float) -> np.ndarray:
    margin = _MARGIN * max(1.0, abs(mu_star))
    ok_int = (mu_u <= mu_star - margin) & (mu_l >= mu_star + margin)
    ok_low = mu_l <= mu_star - margin
    ok_up = mu_u >= mu_star + margin
    return np.where(role == _ROLE_INTERIOR, ok_int, np.where(role == _ROLE_LOWER, ok_low, ok_up))


def _force_role(family: Family, row: dict[str, float], role: int, mu_star: float, mtot_minus_1):
    """Shift the bounds of one stubborn index so its role holds at mu*."""
    f = {k: np.array([v]) for k, v in row.items()}
    xh = float(_row_interior_x(family, f, mu_star, mtot_minus_1))
    positive = family in (Family.STRATIFIED, Family.SAMPLING, Family.NEGENTROPY)
    rel = 1e-3
    pad = rel * max(1.0, abs(xh))
    l, u = row["l"], row["u"]
    if role == _ROLE_INTERIOR:
        if positive:
            l, u = min(l, xh * (1 - rel)), max(u, xh * (1 + rel))
        else:
            l, u = min(l, xh - pad), max(u, xh + pad)
    elif role == _ROLE_LOWER:
        if positive:
            l = max(l, xh * (1 + rel))
            u = max(u, l * (1 + rel))
        else:
            l = max(l, xh + pad)
            u = max(u, l + pad)
    else:
        if positive:
            u = min(u, xh * (1 - rel))
            l = min(l, u * (1 - rel))
        else:
            u = min(u, xh - pad)
            l = min(l, u - pad)
    if family is Family.SAMPLING:
        l = max(l, _SAMPLING_MIN_L)
    row["l"], row["u"] = l, u
    f = {k: np.array([v]) for k, v in row.items()}
    mu_l, mu_u = _row_breakpoints(family, f, mtot_minus_1)
    if not bool(_role_holds(np.array([role]), mu_l, mu_u, mu_star)[0]) or l >= u:
        raise GenerationError(f"could not force role {role} at mu*={mu_star} for {family.value}")
    return row


def _pilot_mu(spec: GenSpec, mtot_minus_1: float | None) -> float:
    streams = LaneStreams(spec.seed, _PILOT_TAG, PILOT_SIZE)
    if spec.family is Family.STRATIFIED:
        m = streams.uniform_range(*PARAM_RANGES[Family.STRATIFIED]["M"])
        fields = _draw_fields(spec.family, streams)
        fields["M"] = m
    else:
        fields = _draw_fields(spec.family, streams)
    mu_l, mu_u = _row_breakpoints(spec.family, fields, mtot_minus_1)
    mid = 0.5 * (mu_l + mu_u)
    mid.partition((mid.size - 1) // 2)
    mu_star = float(mid[(mid.size - 1) // 2])
    if spec.sense is Sense.LESS_EQUAL and mu_star <= 0.0:
        # keep the constraint active so the equality construction carries over
        mu_star = 1e-2
    return mu_star


def generate(spec: GenSpec) -> ProblemInstance:
    """Deterministically generate an instance matching ``spec``.

    The optimal solution has exactly ``round(h_frac * n)`` strictly
    interior coordinates; the remaining ones alternate between the lower
    and upper bound.
    """
    fam, n = spec.family, spec.n
    streams = LaneStreams(spec.seed, _MAIN_TAG, n)

    mtot_minus_1 = None
    m_col = None
    if fam is Family.STRATIFIED:
        m_col = streams.uniform_range(*PARAM_RANGES[fam]["M"])
        mtot_minus_1 = float(np.sum(m_col)) - 1.0

    mu_star = _pilot_mu(spec, mtot_minus_1)

    n_interior = int(math.floor(spec.h_frac * n + 0.5))
    role = np.empty(n, dtype=np.int8)
    role[:n_interior] = _ROLE_INTERIOR
    boundary = np.arange(n - n_interior)
    role[n_interior:] = np.where(boundary % 2 == 0, _ROLE_LOWER, _ROLE_UPPER)

    fields = {k: np.empty(n) for k in _field_names(fam)}
    active = np.arange(n)
    for _ in range(MAX_ROUNDS):
        drawn = _draw_fields(fam, streams, active)
        if fam is Family.STRATIFIED:
            drawn["M"] = m_col[active]
        mu_l, mu_u = _row_breakpoints(fam, drawn, mtot_minus_1)
        ok = _role_holds(role[active], mu_l, mu_u, mu_star)
        done = active[ok]
        for k in fields:
            fields[k][done] = drawn[k][ok]
        active = active[~ok]
        if active.size == 0:
            break
    for j in active:  # resample cap hit: force the role by shifting bounds
        drawn = _draw_fields(fam, streams, np.array([j]))
        if fam is Family.STRATIFIED:
            drawn["M"] = m_col[[j]]
        row = {k: float(v[0]) for k, v in drawn.items()}
        row = _force_role(fam, row, int(role[j]), mu_star, mtot_minus_1)
        for k in fields:
            fields[k][j] = row[k]

    x_star = np.where(role == _ROLE_LOWER, fields["l"], fields["u"])
    if n_interior:
        inter = role == _ROLE_INTERIOR
        sub = {k: v[inter] for k, v in fields.items()}
        x_star = np.array(x_star)
        x_star[inter] = _row_interior_x(fam, sub, mu_star, mtot_minus_1)

    a = fields.get("a", np.ones(n))
    b = float(a @ x_star)
    params = {k: fields[k] for k in fields if k not in ("a", "l", "u")}
    return ProblemInstance(
        family=fam, sense=spec.sense, b=b, a=a, l=fields["l"], u=fields["u"], params=params
    )


def _field_names(family: Family) -> tuple[str, ...]:
    if family is Family.QUADRATIC:
        return ("a", "w", "c", "l", "u")
    if family is Family.STRATIFIED:
        return ("a", "M", "rho", "l", "u")
    if family is Family.SAMPLING:
        return ("a", "c", "l", "u")
    if family is Family.SEARCH:
        return ("a", "m", "bparam", "l", "u")
    return ("c", "l", "u")
