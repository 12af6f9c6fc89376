"""Period-1 coefficient functions and the growth/forcing constants A and B.

The growth rate r(t) and the carrying capacity K(t) are strictly positive,
piecewise-continuous functions of period 1.  Three constructible families are
supported (constant, sinusoid, piecewise-constant) so that every
antiderivative is analytic; the only numerical step anywhere in the library
is one well-conditioned quadrature over a piecewise-smooth integrand.

Conventions:
  * Evaluation reduces t to the fundamental period [0, 1) first, so
    eval(t + 1) == eval(t) holds by construction.
  * Where the periodic extension jumps, the function takes its left-limit
    value.  The choice is measure-zero and cannot affect any integral; it
    exists so that evaluation is well defined everywhere.

Derived constants (see also :mod:`impulsive_logistic.closed_form`):
  * ``A = exp(integral of r over one period)`` -- the per-period growth
    factor of the linearization at extinction (``compute_A``).
  * ``B`` -- the unit-window forcing integral of (r/K) weighted by the decay
    ``exp(-integral of r)`` (``compute_B``); it is the forced response of the
    reciprocal form ``y = 1/x``, whose evolution is ``y' + r y = r / K``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "DEFAULT_PANELS_PER_UNIT",
    "CoefficientPair",
    "ConstantCoefficient",
    "PeriodicCoefficient",
    "PiecewiseConstantCoefficient",
    "QuadratureResult",
    "SinusoidCoefficient",
    "antiderivative_between",
    "coefficient_from_dict",
    "compute_A",
    "compute_B",
    "compute_B_result",
    "forcing_integral",
    "forcing_integral_result",
    "gauss_panels",
]

ArrayLike = Union[float, np.ndarray]

#: Default number of quadrature panels per unit of integration length.
DEFAULT_PANELS_PER_UNIT = 64

_TWO_PI = 2.0 * math.pi
_GL_ORDER = 10
_GL_NODES, _GL_WEIGHTS = leggauss(_GL_ORDER)

# Cut points closer than this are merged when building quadrature panels.
_CUT_TOL = 1e-12


def _fractional(t: np.ndarray) -> np.ndarray:
    """Reduce to the fundamental period [0, 1); exact for any real t."""
    return t - np.floor(t)


class PeriodicCoefficient:
    """A strictly positive period-1 function with an analytic antiderivative.

    Subclasses evaluate pointwise (scalar or ndarray), expose the exact
    antiderivative F(t) = integral from 0 to t, and list the points in
    [0, 1) where the periodic extension may jump.
    """

    kind: ClassVar[str] = ""

    def _values(self, u: np.ndarray) -> np.ndarray:
        """Pointwise values; u is already reduced to [0, 1)."""
        raise NotImplementedError

    def _antiderivative(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t: ArrayLike) -> ArrayLike:
        arr = np.asarray(t, dtype=float)
        out = self._values(_fractional(arr))
        return float(out) if np.ndim(t) == 0 else out

    def antiderivative(self, t: ArrayLike) -> ArrayLike:
        """Exact integral from 0 to t."""
        arr = np.asarray(t, dtype=float)
        out = self._antiderivative(arr)
        return float(out) if np.ndim(t) == 0 else out

    def smooth_piece(self, t_interior: float):
        """Callable matching this coefficient on the smooth piece around
        ``t_interior`` and extending it smoothly to the piece's closure.

        Steppers working on a step [a, b] strictly inside one piece must
        evaluate stages at the endpoints through this (keyed by the step
        midpoint): endpoint times can sit within rounding of a jump, where
        direct evaluation may land on either side.
        """
        return self

    def integral(self, a: float, b: float) -> float:
        """Exact integral over [a, b]; requires a <= b."""
        return antiderivative_between(self, a, b)

    def breakpoints_mod1(self) -> tuple[float, ...]:
        """Points in [0, 1) where the periodic extension may jump."""
        return ()

    def min_value(self) -> float:
        """Infimum over one period (attained for these families)."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantCoefficient(PeriodicCoefficient):
    value: float

    kind: ClassVar[str] = "constant"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.value) and self.value > 0.0):
            raise ValueError(
                f"constant coefficient must be a positive finite number, got {self.value!r}"
            )

    def _values(self, u: np.ndarray) -> np.ndarray:
        return np.full_like(u, self.value)

    def _antiderivative(self, t: np.ndarray) -> np.ndarray:
        return self.value * t

    def min_value(self) -> float:
        return self.value

    def to_dict(self) -> dict:
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class SinusoidCoefficient(PeriodicCoefficient):
    """mean + amp * sin(2*pi*t + phase); positivity requires mean > |amp|."""

    mean: float
    amp: float
    phase: float = 0.0

    kind: ClassVar[str] = "sinusoid"

    def __post_init__(self) -> None:
        for name in ("mean", "amp", "phase"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"sinusoid {name} must be finite")
        if not self.mean > abs(self.amp):
            raise ValueError(
                "sinusoid must stay strictly positive: need mean > |amp|, "
                f"got mean={self.mean!r}, amp={self.amp!r}"
            )

    def _values(self, u: np.ndarray) -> np.ndarray:
        return self.mean + self.amp * np.sin(_TWO_PI * u + self.phase)

    def _antiderivative(self, t: np.ndarray) -> np.ndarray:
        # Phase argument built from the reduced time so that the integral
        # over any whole number of periods is exactly mean * length.
        u = _fractional(t)
        osc = np.cos(_TWO_PI * u + self.phase) - math.cos(self.phase)
        return self.mean * t - (self.amp / _TWO_PI) * osc

    def min_value(self) -> float:
        return self.mean - abs(self.amp)

    def to_dict(self) -> dict:
        return {"kind": "sinusoid", "mean": self.mean, "amp": self.amp, "phase": self.phase}


@dataclass(frozen=True)
class PiecewiseConstantCoefficient(PeriodicCoefficient):
    """Step function on [0, 1): values[i] on [breakpoints[i], breakpoints[i+1]).

    breakpoints must run from exactly 0.0 to exactly 1.0, strictly increasing.
    At a jump of the periodic extension (interior breakpoints, and the period
    boundary when values[0] != values[-1]) evaluation returns the left limit.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    kind: ClassVar[str] = "piecewise"

    # derived lookup tables, excluded from comparison/hash
    _bp: np.ndarray = field(init=False, repr=False, compare=False)
    _vals: np.ndarray = field(init=False, repr=False, compare=False)
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        bp, vals = self.breakpoints, self.values
        if len(bp) < 2:
            raise ValueError("piecewise coefficient needs at least two breakpoints")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise ValueError(
                f"breakpoints must run from 0.0 to 1.0, got {bp[0]!r}..{bp[-1]!r}"
            )
        if any(b1 <= b0 for b0, b1 in zip(bp, bp[1:])):
            raise ValueError(f"breakpoints must be strictly increasing, got {bp!r}")
        if len(vals) != len(bp) - 1:
            raise ValueError(
                f"expected {len(bp) - 1} values for {len(bp)} breakpoints, got {len(vals)}"
            )
        if any(not (math.isfinite(v) and v > 0.0) for v in vals):
            raise ValueError(f"piecewise values must be positive finite numbers, got {vals!r}")
        bp_arr = np.asarray(bp)
        vals_arr = np.asarray(vals)
        cum = np.concatenate(([0.0], np.cumsum(np.diff(bp_arr) * vals_arr)))
        object.__setattr__(self, "_bp", bp_arr)
        object.__setattr__(self, "_vals", vals_arr)
        object.__setattr__(self, "_cum", cum)

    def _values(self, u: np.ndarray) -> np.ndarray:
        # side="left" puts u == breakpoint into the segment on its left,
        # and u == 0.0 onto the last segment (index -1): the left limit of
        # the periodic extension at the period boundary.
        idx = np.searchsorted(self._bp, u, side="left") - 1
        return self._vals[idx]

    def smooth_piece(self, t_interior: float):
        value = float(self(t_interior))
        return lambda t: value

    def _antiderivative(self, t: np.ndarray) -> np.ndarray:
        whole = np.floor(t)
        u = t - whole
        idx = np.clip(np.searchsorted(self._bp, u, side="right") - 1, 0, len(self.values) - 1)
        partial = self._cum[idx] + self._vals[idx] * (u - self._bp[idx])
        return whole * self._cum[-1] + partial

    def min_value(self) -> float:
        return min(self.values)

    def breakpoints_mod1(self) -> tuple[float, ...]:
        return (0.0,) + self.breakpoints[1:-1]

    def to_dict(self) -> dict:
        return {
            "kind": "piecewise",
            "breakpoints": list(self.breakpoints),
            "values": list(self.values),
        }


_KINDS = {
    "constant": ConstantCoefficient,
    "sinusoid": SinusoidCoefficient,
    "piecewise": PiecewiseConstantCoefficient,
}

_KIND_FIELDS = {
    "constant": {"value": True},
    "sinusoid": {"mean": True, "amp": True, "phase": False},
    "piecewise": {"breakpoints": True, "values": True},
}


def coefficient_from_dict(data: dict) -> PeriodicCoefficient:
    """Build a coefficient from its ``to_dict`` form (also the CLI schema)."""
    if not isinstance(data, dict):
        raise ValueError(f"coefficient description must be an object, got {type(data).__name__}")
    kind = data.get("kind")
    if kind not in _KINDS:
        raise ValueError(
            f"unknown coefficient kind {kind!r}; expected one of {sorted(_KINDS)}"
        )
    fields = _KIND_FIELDS[kind]
    unknown = set(data) - set(fields) - {"kind"}
    if unknown:
        raise ValueError(f"unknown field(s) {sorted(unknown)} for kind {kind!r}")
    missing = [name for name, required in fields.items() if required and name not in data]
    if missing:
        raise ValueError(f"missing field(s) {missing} for kind {kind!r}")
    kwargs = {name: data[name] for name in fields if name in data}
    if kind == "piecewise":
        kwargs = {
            "breakpoints": tuple(kwargs["breakpoints"]),
            "values": tuple(kwargs["values"]),
        }
    return _KINDS[kind](**kwargs)


@dataclass(frozen=True)
class CoefficientPair:
    """Growth rate r and carrying capacity K for one model instance."""

    r: PeriodicCoefficient
    K: PeriodicCoefficient

    def breakpoints_mod1(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.r.breakpoints_mod1()) | set(self.K.breakpoints_mod1())))

    def to_dict(self) -> dict:
        return {"r": self.r.to_dict(), "K": self.K.to_dict()}

    @staticmethod
    def from_dict(data: dict) -> "CoefficientPair":
        return CoefficientPair(
            r=coefficient_from_dict(data["r"]), K=coefficient_from_dict(data["K"])
        )


def antiderivative_between(c: PeriodicCoefficient, a: float, b: float) -> float:
    """Exact integral of c over [a, b]; a > b is an error."""
    if b < a:
        raise ValueError(f"reversed interval: a={a} > b={b}")
    return float(c.antiderivative(b)) - float(c.antiderivative(a))


def compute_A(r: PeriodicCoefficient) -> float:
    """Per-period growth factor A = exp(integral of r over one period).

    By periodicity the same value results from any window of length 1;
    A > 1 whenever r is positive.
    """
    return math.exp(antiderivative_between(r, 0.0, 1.0))


def gauss_panels(
    breaks_mod1: tuple[float, ...], a: float, b: float, panels_per_unit: int
) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [a, b].

    Panels are split at every translate of the given mod-1 breakpoints so a
    piecewise-smooth integrand is smooth on each panel; nodes are strictly
    interior, so jump-point value conventions never enter an integral.
    """
    cuts = [a]
    if breaks_mod1:
        lo = math.floor(a) - 1
        hi = math.ceil(b) + 1
        translated = sorted(beta + m for beta in breaks_mod1 for m in range(lo, hi))
        for p in translated:
            if a + _CUT_TOL < p < b - _CUT_TOL and p - cuts[-1] > _CUT_TOL:
                cuts.append(p)
    cuts.append(b)

    nodes, weights = [], []
    for c0, c1 in zip(cuts, cuts[1:]):
        width = c1 - c0
        n = max(1, math.ceil(width * panels_per_unit - 1e-9))
        edges = np.linspace(c0, c1, n + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * np.diff(edges)
        nodes.append((mid[:, None] + half[:, None] * _GL_NODES).ravel())
        weights.append((half[:, None] * _GL_WEIGHTS).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def forcing_integral(
    pair: CoefficientPair,
    a: float,
    b: float,
    panels_per_unit: int = DEFAULT_PANELS_PER_UNIT,
) -> float:
    """Integral over [a, b] of (r/K)(s) * exp(-(R(b) - R(s))), R = antiderivative of r.

    This is the forced response of the reciprocal form y = 1/x: it is the
    inhomogeneous term in y(b) = y(a) * exp(-(R(b) - R(a))) + (this integral).
    Composite Gauss-Legendre of order 10; panels are split at every jump of
    r or K so each panel sees a smooth integrand.
    """
    if b < a:
        raise ValueError(f"reversed interval: a={a} > b={b}")
    if b == a:
        return 0.0
    nodes, weights = gauss_panels(pair.breakpoints_mod1(), a, b, panels_per_unit)
    r, K = pair.r, pair.K
    decay = np.exp(r.antiderivative(nodes) - r.antiderivative(b))
    return float(np.dot(weights, r(nodes) / K(nodes) * decay))


@dataclass(frozen=True)
class QuadratureResult:
    """Quadrature value with a conservative error estimate.

    ``error_estimate`` is the change from halving the panel count, floored at
    rounding scale; refining the panel count further moves the value by less
    than this estimate.
    """

    value: float
    error_estimate: float
    panels_per_unit: int


def forcing_integral_result(
    pair: CoefficientPair,
    a: float,
    b: float,
    panels_per_unit: int = DEFAULT_PANELS_PER_UNIT,
) -> QuadratureResult:
    value = forcing_integral(pair, a, b, panels_per_unit)
    coarse = forcing_integral(pair, a, b, max(1, panels_per_unit // 2))
    estimate = max(abs(value - coarse), 1e-14 * abs(value))
    return QuadratureResult(value=value, error_estimate=estimate, panels_per_unit=panels_per_unit)


def compute_B(
    pair: CoefficientPair, t0: float, panels_per_unit: int = DEFAULT_PANELS_PER_UNIT
) -> float:
    """Unit-window forcing integral B over [t0, t0 + 1]; strictly positive.

    Shifting the window by any whole number of periods leaves B unchanged
    (periodicity of r and K); t0 must be positive.
    """
    if not t0 > 0.0:
        raise ValueError(f"t0 must be positive, got {t0!r}")
    return forcing_integral(pair, t0, t0 + 1.0, panels_per_unit)


def compute_B_result(
    pair: CoefficientPair, t0: float, panels_per_unit: int = DEFAULT_PANELS_PER_UNIT
) -> QuadratureResult:
    """Like :func:`compute_B` but with the quadrature error estimate."""
    if not t0 > 0.0:
        raise ValueError(f"t0 must be positive, got {t0!r}")
    return forcing_integral_result(pair, t0, t0 + 1.0, panels_per_unit)
