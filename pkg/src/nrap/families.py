"""Closed-form machinery shared by all solvers.

Five objective families are supported.  Each term ``phi_j`` is strictly
convex on its domain, so the map from a dual value ``mu`` to the
unconstrained minimizer of ``phi_j(x) + mu * a_j * x`` is single valued.
For every family that minimizer admits an affine expansion in a scalar
*basis* function of ``mu``::

    a_j * x_j(mu) = res_const_j + res_coef_j * dual_basis(family, mu)

which makes aggregate sums over index sets O(1) to evaluate and invert.
The per-index coefficients are precomputed on the problem instance.

Family table (params drawn per index unless noted):

==============  =======================  ======================  ===========
family          phi_j(x)                 phi_j'(x)               basis(mu)
==============  =======================  ======================  ===========
quadratic       w*x^2/2 - c*x            w*x - c                 mu
stratified      k*(1/x - 1/Mtot)         -k/x^2                  1/sqrt(mu)
sampling        c/x                      -c/x^2                  1/sqrt(mu)
search          m*(exp(-p*x) - 1)        -m*p*exp(-p*x)          log(mu)
negentropy      x*(log(x/c) - 1)         log(x/c)                exp(-mu)
==============  =======================  ======================  ===========

where for the stratified family ``k = M_j*rho_j^2/(Mtot - 1)`` with
``Mtot = sum_j M_j``, and the negentropy family fixes ``a_j = 1``.
The stratified, sampling, and search interior formulas are defined only
for ``mu > 0``.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

__all__ = [
    "Family",
    "Sense",
    "FILE_COLUMNS",
    "PARAM_FIELDS",
    "mu_positive",
    "x_positive",
    "dual_basis",
    "dual_basis_inverse",
    "dual_basis_slope",
    "aggregate_sum",
    "aggregate_mu",
]


class Family(str, Enum):
    """Objective family of a problem instance."""

    QUADRATIC = "quadratic"
    STRATIFIED = "stratified"
    SAMPLING = "sampling"
    SEARCH = "search"
    NEGENTROPY = "negentropy"


class Sense(str, Enum):
    """Sense of the single resource constraint."""

    EQUALITY = "eq"
    LESS_EQUAL = "le"


# Per-index parameter vectors beyond a/l/u, keyed by family.
PARAM_FIELDS = {
    Family.QUADRATIC: ("w", "c"),
    Family.STRATIFIED: ("M", "rho"),
    Family.SAMPLING: ("c",),
    Family.SEARCH: ("m", "bparam"),
    Family.NEGENTROPY: ("c",),
}

# Column order of the per-index rows in instance files.  The negentropy
# family has no constraint-coefficient column (a_j = 1 fixed).
FILE_COLUMNS = {
    Family.QUADRATIC: ("a", "w", "c", "l", "u"),
    Family.STRATIFIED: ("a", "M", "rho", "l", "u"),
    Family.SAMPLING: ("a", "c", "l", "u"),
    Family.SEARCH: ("a", "m", "bparam", "l", "u"),
    Family.NEGENTROPY: ("c", "l", "u"),
}

_MU_POSITIVE = {Family.STRATIFIED, Family.SAMPLING, Family.SEARCH}
_X_POSITIVE = {Family.STRATIFIED, Family.SAMPLING, Family.NEGENTROPY}


def mu_positive(family: Family) -> bool:
    """True if the interior dual formula is defined only for mu > 0."""
    return family in _MU_POSITIVE


def x_positive(family: Family) -> bool:
    """True if the objective terms require strictly positive arguments."""
    return family in _X_POSITIVE


def dual_basis(family: Family, mu):
    """Scalar basis function of the dual value (vectorizes over mu)."""
    if family is Family.QUADRATIC:
        return mu
    if family in (Family.STRATIFIED, Family.SAMPLING):
        return 1.0 / np.sqrt(mu)
    if family is Family.SEARCH:
        return np.log(mu)
    return np.exp(-np.asarray(mu)) if isinstance(mu, np.ndarray) else math.exp(-mu)


def dual_basis_inverse(family: Family, t: float) -> float:
    """Dual value whose basis equals ``t``.

    Raises ValueError when ``t`` is outside the basis range (this is how
    an impossible reduced budget, e.g. a nonpositive one for a mu > 0
    family, surfaces).
    """
    if family is Family.QUADRATIC:
        return float(t)
    if family in (Family.STRATIFIED, Family.SAMPLING):
        if t <= 0.0:
            raise ValueError(f"basis value must be positive for {family.value}, got {t}")
        return 1.0 / (t * t)
    if family is Family.SEARCH:
        return math.exp(t)
    if t <= 0.0:
        raise ValueError(f"basis value must be positive for {family.value}, got {t}")
    return -math.log(t)


def dual_basis_slope(family: Family, mu: float) -> float:
    """Derivative of the basis function at ``mu``."""
    if family is Family.QUADRATIC:
        return 1.0
    if family in (Family.STRATIFIED, Family.SAMPLING):
        return -0.5 * mu ** -1.5
    if family is Family.SEARCH:
        return 1.0 / mu
    return -math.exp(-mu)


def aggregate_sum(family: Family, const: float, coef: float, mu: float) -> float:
    """Resource use of an index set with aggregated coefficients at ``mu``."""
    return const + coef * dual_basis(family, mu)


def aggregate_mu(family: Family, const: float, coef: float, budget: float) -> float:
    """Dual value at which the aggregated set uses exactly ``budget``.

    Inverts ``const + coef * basis(mu) = budget``; ``coef`` must be the
    sum over a nonempty index set (it is then nonzero by strict
    convexity).
    """
    if coef == 0.0:
        raise ValueError("aggregate_mu called with an empty index set")
    return dual_basis_inverse(family, (budget - const) / coef)
