"""Analytic solution of the harvested logistic model.

The model: between impulses the population follows x' = r(t) (1 - x/K(t)) x,
and at each impulse instant tau_k = t0 + k (k = 1, 2, ...) a fraction E of
the population is removed, x -> (1 - E) x.

Everything here is closed form up to one quadrature.  Substituting y = 1/x
linearizes the growth law to y' + r y = r/K, so on the interval
[t0 + k, t0 + k + 1) the reciprocal of the solution is an explicit
combination of the per-period growth factor A, the unit-window forcing
integral B, the net per-period multiplier q = (1 - E) A, and one running
forcing integral.  See ``solution_at`` for the exact expression.

When q > 1 the model has a unique positive period-1 orbit; its post-impulse
anchor value is x0_star = (q - 1) / (A B), the fixed point of the
period-advance (Poincare) map.  ``legacy_periodic_at`` evaluates an older
published formula for that orbit which is continuous at the impulse times
and therefore cannot satisfy the jump rule; it is provided so the
discrepancy is checkable (see :mod:`impulsive_logistic.analysis`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from .coefficients import (
    DEFAULT_PANELS_PER_UNIT,
    CoefficientPair,
    compute_A,
    compute_B,
    forcing_integral,
    gauss_panels,
)

__all__ = [
    "BOUNDARY_SNAP",
    "ImpulseLimits",
    "ModelParams",
    "NoPeriodicSolutionError",
    "SolutionConstants",
    "derive_constants",
    "fixed_point_x0",
    "legacy_periodic_at",
    "one_sided_limits",
    "periodic_orbit_mean",
    "periodic_solution_at",
    "poincare_map",
    "solution_at",
]

#: Times within this distance of an impulse instant evaluate on the
#: post-impulse side.  Guards against t0 + k computed in floating point
#: landing a few ulp below the boundary.
BOUNDARY_SNAP = 1e-9

# |q - 1| below this routes the geometric sum to its q = 1 limit.
_Q_ONE_TOL = 1e-12

# k beyond which the k-dependent terms are evaluated in log space.
_LOG_SPACE_K = 500

_EXP_MAX = 709.0  # math.exp overflows just above this


class NoPeriodicSolutionError(ValueError):
    """Raised when (1 - E) A <= 1: no positive periodic orbit exists."""


@dataclass(frozen=True)
class ModelParams:
    """One problem instance: coefficients, harvest fraction, anchor time.

    Impulses occur at tau_k = t0 + k for k = 1, 2, ...; the solution is
    defined forward from t0 only.  E = 0 is allowed (impulses degenerate to
    no-ops); E must stay below 1 so harvesting never removes everything.
    """

    pair: CoefficientPair
    E: float
    t0: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.E < 1.0):
            raise ValueError(f"harvest fraction must satisfy 0 <= E < 1, got {self.E!r}")
        if not (math.isfinite(self.t0) and self.t0 > 0.0):
            raise ValueError(f"anchor time t0 must be positive, got {self.t0!r}")

    @property
    def r(self):
        return self.pair.r

    @property
    def K(self):
        return self.pair.K

    def impulse_time(self, k: int) -> float:
        return self.t0 + k

    def to_dict(self) -> dict:
        d = self.pair.to_dict()
        d.update({"E": self.E, "t0": self.t0})
        return d

    @staticmethod
    def from_dict(data: dict) -> "ModelParams":
        return ModelParams(pair=CoefficientPair.from_dict(data), E=data["E"], t0=data["t0"])


class ImpulseLimits(NamedTuple):
    """One-sided values of the periodic orbit at an impulse instant."""

    pre: float
    post: float


@dataclass(frozen=True)
class SolutionConstants:
    """Derived constants of a model instance.

    A: per-period growth factor exp(integral of r over one period).
    B: unit-window forcing integral (see ``compute_B``).
    q: net per-period multiplier (1 - E) A near extinction.
    x0_star: post-impulse value of the periodic orbit, (q - 1) / (A B);
        present exactly when q > 1.
    """

    A: float
    B: float
    q: float
    x0_star: Optional[float]


@lru_cache(maxsize=256)
def derive_constants(
    params: ModelParams, panels_per_unit: int = DEFAULT_PANELS_PER_UNIT
) -> SolutionConstants:
    """Compute A, B, q and (when q > 1) the fixed-point anchor x0_star.

    Cached per params; safe for concurrent readers (the cached value is
    immutable and fully constructed before it is published).
    """
    A = compute_A(params.pair.r)
    B = compute_B(params.pair, params.t0, panels_per_unit)
    q = (1.0 - params.E) * A
    x0_star = (q - 1.0) / (A * B) if q > 1.0 else None
    return SolutionConstants(A=A, B=B, q=q, x0_star=x0_star)


def fixed_point_x0(params: ModelParams) -> float:
    """Post-impulse anchor value of the periodic orbit; errors when q <= 1."""
    consts = derive_constants(params)
    _require_orbit(params, consts)
    return consts.x0_star


def _require_orbit(params: ModelParams, consts: SolutionConstants) -> None:
    if consts.x0_star is None:
        e_crit = 1.0 - 1.0 / consts.A
        raise NoPeriodicSolutionError(
            "no positive periodic solution: (1-E)A = "
            f"{consts.q!r} <= 1 (need E < {e_crit!r})"
        )


def _interval_index(params: ModelParams, t: float) -> int:
    """Index k with t in [t0 + k, t0 + k + 1), snapping to the post side."""
    dt = t - params.t0
    if dt < -BOUNDARY_SNAP:
        raise ValueError(f"t={t!r} precedes the anchor time t0={params.t0!r}")
    return max(0, math.floor(dt + BOUNDARY_SNAP))


def _geometric_sum(q: float, k: int) -> float:
    """Sum of q**-j for j = 1..k, with the q -> 1 limit handled explicitly."""
    if k == 0:
        return 0.0
    if abs(q - 1.0) < _Q_ONE_TOL:
        return float(k)
    if q > 1.0:
        return (1.0 - q ** (-k)) / (q - 1.0)
    # q < 1: q**-k grows; compute through exp so huge k saturates to inf
    # instead of raising.
    ln = -k * math.log(q)
    grow = math.exp(ln) if ln <= _EXP_MAX else math.inf
    return (grow - 1.0) / (1.0 - q)


def solution_at(
    params: ModelParams,
    x0: float,
    t: float,
    panels_per_unit: int = DEFAULT_PANELS_PER_UNIT,
) -> float:
    """Value at time t >= t0 of the solution started at x(t0) = x0 > 0.

    With k impulses in (t0, t], q = (1 - E) A, R = integral of r from
    t0 + k to t, S = sum of q**-j for j = 1..k, and C the forcing integral
    over [t0 + k, t], the reciprocal of the solution is

        1/x(t) = exp(-R) / (x0 q**k)  +  A B S exp(-R)  +  C.

    The decaying exponential multiplies the middle term as well as the
    first; see the sign-regression tests before touching it.  Evaluation
    exactly at an impulse instant returns the post-impulse value.
    """
    if not x0 > 0.0:
        raise ValueError(f"x0 must be positive, got {x0!r}")
    k = _interval_index(params, t)
    consts = derive_constants(params, panels_per_unit)
    anchor = params.t0 + k
    te = max(t, anchor)  # t may sit a few ulp below the snapped anchor
    big_r = params.pair.r.integral(anchor, te)
    forcing = forcing_integral(params.pair, anchor, te, panels_per_unit)
    q = consts.q

    ln_q = math.log(q)
    if k > _LOG_SPACE_K or k * abs(ln_q) > 600.0:
        ln_lead = -math.log(x0) - k * ln_q - big_r
        lead = math.exp(ln_lead) if ln_lead <= _EXP_MAX else math.inf
    else:
        lead = math.exp(-big_r) / (x0 * q**k)
    recip = lead + consts.A * consts.B * _geometric_sum(q, k) * math.exp(-big_r) + forcing
    return 1.0 / recip


def periodic_solution_at(
    params: ModelParams,
    t: float,
    panels_per_unit: int = DEFAULT_PANELS_PER_UNIT,
) -> float:
    """Value at time t >= t0 of the unique positive period-1 orbit.

    Requires q = (1 - E) A > 1.  With R and C as in ``solution_at``,

        x*(t) = (q - 1) / (A B exp(-R) + (q - 1) C),

    which is ``solution_at`` evaluated at the fixed-point anchor x0_star.
    Evaluation exactly at an impulse instant returns the post-impulse value
    x0_star; the pre-impulse limit is available from ``one_sided_limits``.
    """
    consts = derive_constants(params, panels_per_unit)
    _require_orbit(params, consts)
    k = _interval_index(params, t)
    anchor = params.t0 + k
    te = max(t, anchor)
    big_r = params.pair.r.integral(anchor, te)
    forcing = forcing_integral(params.pair, anchor, te, panels_per_unit)
    qm1 = consts.q - 1.0
    return qm1 / (consts.A * consts.B * math.exp(-big_r) + qm1 * forcing)


def legacy_periodic_at(
    params: ModelParams,
    t: float,
    panels_per_unit: int = DEFAULT_PANELS_PER_UNIT,
) -> float:
    """The older published periodic-orbit formula (kept for its refutation).

    Evaluates (q - 1) / (A * J(t)) where J(t) is the forcing integral over
    the moving window [t, t + 1].  J is continuous in t, so this expression
    has equal one-sided limits at the impulse instants and cannot satisfy
    the jump rule x(tau+) = (1 - E) x(tau-) for any E > 0.  Defined for any
    real t; requires q > 1.
    """
    consts = derive_constants(params, panels_per_unit)
    _require_orbit(params, consts)
    window = forcing_integral(params.pair, t, t + 1.0, panels_per_unit)
    return (consts.q - 1.0) / (consts.A * window)


def one_sided_limits(params: ModelParams, k: int) -> ImpulseLimits:
    """Pre/post values of the periodic orbit at tau_k; independent of k.

        pre  = (q - 1) / (A B (1 - E)),    post = (q - 1) / (A B) = x0_star,

    so post = (1 - E) * pre: the orbit loses exactly the harvested fraction.
    """
    if not (isinstance(k, int) and k >= 1):
        raise ValueError(f"impulse index k must be a positive integer, got {k!r}")
    consts = derive_constants(params)
    _require_orbit(params, consts)
    post = consts.x0_star
    return ImpulseLimits(pre=post / (1.0 - params.E), post=post)


def periodic_orbit_mean(
    params: ModelParams, panels_per_unit: int = DEFAULT_PANELS_PER_UNIT
) -> float:
    """Average of the periodic orbit over one period; errors when q <= 1.

    The orbit is smooth between coefficient jumps, so the same split-panel
    Gauss-Legendre rule used for the forcing integrals applies.
    """
    consts = derive_constants(params, panels_per_unit)
    _require_orbit(params, consts)
    nodes, weights = gauss_panels(
        params.pair.breakpoints_mod1(), params.t0, params.t0 + 1.0, panels_per_unit
    )
    values = [periodic_solution_at(params, float(t), panels_per_unit) for t in nodes]
    return float(np.dot(weights, values))


def poincare_map(params: ModelParams, x0: float) -> float:
    """Post-impulse state one period after starting at post-impulse state x0.

        P(x0) = (1 - E) A x0 / (1 + x0 A B)

    (flow the reciprocal form across one window, then apply the jump).  Its
    unique positive fixed point, when q = (1 - E) A > 1, is x0_star.
    """
    if not x0 > 0.0:
        raise ValueError(f"x0 must be positive, got {x0!r}")
    consts = derive_constants(params)
    return (1.0 - params.E) * consts.A * x0 / (1.0 + x0 * consts.A * consts.B)
