"""Numerical oracle: fixed-step RK4 between impulses, exact jumps at them.

Impulse instants and coefficient discontinuities are all known a priori, so
the grid is aligned instead of adaptive: every unit interval is divided into
an integer number of base steps (so each impulse lands exactly on a step
boundary) and any step straddling a coefficient jump is split at it.  The
harvest jump x -> (1 - E) x is applied algebraically, never integrated
across.

``exact_constant_flow`` gives the closed-form flow of the autonomous
logistic equation and serves as a second, quadrature-free oracle for
constant coefficients.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import PchipInterpolator

from .closed_form import BOUNDARY_SNAP, ModelParams

__all__ = [
    "ImpulseEvent",
    "IntegrationError",
    "StepControl",
    "Trajectory",
    "TrajectoryPiece",
    "exact_constant_flow",
    "integrate",
]


class IntegrationError(RuntimeError):
    """The scheme failed (state left the positive domain or error target hit)."""


@dataclass(frozen=True)
class StepControl:
    """Step settings for the RK4 scheme.

    h must divide the unit interval into a whole number of steps so impulse
    instants are exact step boundaries.  If ``error_target`` is set, every
    step is re-done with two half steps as a diagnostic; the run fails if
    the estimated relative step error ever exceeds the target.
    """

    h: float = 1.0 / 256.0
    error_target: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.h) and self.h > 0.0):
            raise ValueError(f"step h must be positive, got {self.h!r}")
        n = round(1.0 / self.h)
        if n < 1 or abs(n * self.h - 1.0) > 1e-9:
            raise ValueError(
                f"step h={self.h!r} must divide the unit interval into a whole "
                "number of steps"
            )
        if self.error_target is not None and not self.error_target > 0.0:
            raise ValueError(f"error_target must be positive, got {self.error_target!r}")

    @property
    def steps_per_unit(self) -> int:
        return round(1.0 / self.h)


@dataclass(frozen=True)
class ImpulseEvent:
    """One harvest jump: post_value = (1 - E) * pre_value, applied exactly."""

    index: int
    time: float
    pre_value: float
    post_value: float


@dataclass(frozen=True, eq=False)
class TrajectoryPiece:
    """Samples of one impulse-free stretch, both endpoints included.

    The final value is the pre-impulse state when an impulse follows.
    """

    segment: int
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @cached_property
    def interpolant(self) -> PchipInterpolator | None:
        if len(self.times) < 2:
            return None
        # Shape-preserving cubic: no overshoot, so positive data stay positive.
        return PchipInterpolator(self.times, self.values)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Integrated path with its impulse events; immutable once returned.

    The flattened ``times``/``values``/``segments`` views are strictly
    increasing in t and carry the post-impulse value at each impulse
    instant; the pre-impulse values live in ``events``.
    """

    params: ModelParams
    x0: float
    ctrl: StepControl
    pieces: tuple[TrajectoryPiece, ...]
    events: tuple[ImpulseEvent, ...]
    step_error_estimate: float | None = None

    @property
    def t_start(self) -> float:
        return float(self.pieces[0].times[0])

    @property
    def t_end(self) -> float:
        return float(self.pieces[-1].times[-1])

    @cached_property
    def _flat(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ts, xs, ks = [], [], []
        for i, piece in enumerate(self.pieces):
            t_arr, v_arr = piece.times, piece.values
            if i + 1 < len(self.pieces):
                # drop the pre-impulse row; the next piece starts at the
                # same instant with the post value
                t_arr, v_arr = t_arr[:-1], v_arr[:-1]
            ts.append(t_arr)
            xs.append(v_arr)
            ks.append(np.full(len(t_arr), piece.segment, dtype=int))
        return np.concatenate(ts), np.concatenate(xs), np.concatenate(ks)

    @property
    def times(self) -> np.ndarray:
        return self._flat[0]

    @property
    def values(self) -> np.ndarray:
        return self._flat[1]

    @property
    def segments(self) -> np.ndarray:
        return self._flat[2]

    @cached_property
    def _piece_starts(self) -> list[float]:
        return [float(p.times[0]) for p in self.pieces]

    def sample(self, t: float) -> float:
        """Value at time t inside the integrated span.

        At an impulse instant this is the post-impulse value; within a
        stretch the value is monotone-cubic interpolation of the step
        samples.
        """
        if t < self.t_start - BOUNDARY_SNAP or t > self.t_end + BOUNDARY_SNAP:
            raise ValueError(
                f"t={t!r} outside the trajectory span "
                f"[{self.t_start!r}, {self.t_end!r}]"
            )
        idx = max(0, bisect_right(self._piece_starts, t + BOUNDARY_SNAP) - 1)
        piece = self.pieces[idx]
        if piece.interpolant is None:
            return float(piece.values[0])
        t_clipped = min(max(t, float(piece.times[0])), float(piece.times[-1]))
        return float(piece.interpolant(t_clipped))


def exact_constant_flow(r0: float, K0: float, x_start: float, dt: float) -> float:
    """Closed-form flow of x' = r0 (1 - x/K0) x over a time span dt >= 0."""
    if dt < 0.0:
        raise ValueError(f"dt must be nonnegative, got {dt!r}")
    em1 = math.expm1(r0 * dt)
    return K0 * x_start * (em1 + 1.0) / (K0 + x_start * em1)


def _rk4_step(rhs, t: float, x: float, h: float) -> float:
    k1 = rhs(t, x)
    k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2)
    k4 = rhs(t + h, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def _segment_bounds(
    seg_start: float, seg_end: float, n: int, breaks_mod1: tuple[float, ...]
) -> list[float]:
    """Step boundaries across one stretch: base grid plus coefficient jumps."""
    width = seg_end - seg_start
    bounds = []
    i = 0
    while True:
        off = i / n
        if off >= width - 1e-12:
            break
        bounds.append(seg_start + off)
        i += 1
    bounds.append(seg_end)
    if breaks_mod1:
        lo = math.floor(seg_start) - 1
        hi = math.ceil(seg_end) + 1
        cuts = sorted(
            beta + m
            for beta in breaks_mod1
            for m in range(lo, hi)
            if seg_start + 1e-12 < beta + m < seg_end - 1e-12
        )
        for c in cuts:
            pos = bisect_right(bounds, c)
            if c - bounds[pos - 1] > 1e-12 and bounds[pos] - c > 1e-12:
                bounds.insert(pos, c)
    return bounds


def _make_piece(segment: int, times: list[float], values: list[float]) -> TrajectoryPiece:
    t_arr = np.asarray(times)
    v_arr = np.asarray(values)
    t_arr.setflags(write=False)
    v_arr.setflags(write=False)
    return TrajectoryPiece(segment=segment, times=t_arr, values=v_arr)


def integrate(
    params: ModelParams,
    x0: float,
    t_end: float,
    ctrl: StepControl | None = None,
) -> Trajectory:
    """RK4-integrate the harvested logistic model from (t0, x0) to t_end.

    Each impulse instant tau_k <= t_end applies the exact jump
    x -> (1 - E) x and is recorded as an :class:`ImpulseEvent`.  Every step
    boundary becomes a sample.  Raises :class:`IntegrationError` if the
    state leaves the positive domain (step too large for the given
    coefficients).
    """
    if ctrl is None:
        ctrl = StepControl()
    if not x0 > 0.0:
        raise ValueError(f"x0 must be positive, got {x0!r}")
    if not t_end > params.t0:
        raise ValueError(f"t_end={t_end!r} must exceed t0={params.t0!r}")

    r, K = params.pair.r, params.pair.K

    n = ctrl.steps_per_unit
    breaks = params.pair.breakpoints_mod1()
    keep_fraction = 1.0 - params.E

    pieces: list[TrajectoryPiece] = []
    events: list[ImpulseEvent] = []
    worst_step_error = 0.0
    x = float(x0)
    seg = 0
    while True:
        seg_start = params.t0 + seg
        full_end = params.t0 + (seg + 1.0)
        reaches_impulse = t_end >= full_end - BOUNDARY_SNAP
        seg_end = full_end if reaches_impulse else t_end

        bounds = _segment_bounds(seg_start, seg_end, n, breaks)
        values = [x]
        for ta, tb in zip(bounds, bounds[1:]):
            h = tb - ta
            # Freeze the smooth piece via the step midpoint: the step lies
            # strictly inside one piece of each coefficient, but its
            # endpoint times can sit within rounding of a jump where direct
            # evaluation could land on either side.
            r_p = r.smooth_piece(ta + 0.5 * h)
            k_p = K.smooth_piece(ta + 0.5 * h)

            def rhs(t: float, y: float, r_p=r_p, k_p=k_p) -> float:
                return r_p(t) * (1.0 - y / k_p(t)) * y

            x_new = _rk4_step(rhs, ta, x, h)
            if ctrl.error_target is not None:
                x_half = _rk4_step(rhs, ta, x, 0.5 * h)
                x_half = _rk4_step(rhs, ta + 0.5 * h, x_half, 0.5 * h)
                est = abs(x_new - x_half) / (15.0 * max(abs(x_half), 1e-300))
                worst_step_error = max(worst_step_error, est)
                if est > ctrl.error_target:
                    raise IntegrationError(
                        f"estimated step error {est:.3e} exceeds the target "
                        f"{ctrl.error_target:.3e} at t={tb!r}; reduce h"
                    )
            x = x_new
            if not (math.isfinite(x) and x > 0.0):
                raise IntegrationError(
                    f"state became non-positive at t={tb!r} (x={x!r}); the "
                    "step is too large for these coefficients"
                )
            values.append(x)
        pieces.append(_make_piece(seg, bounds, values))

        if not reaches_impulse:
            break
        pre = x
        x = keep_fraction * pre
        events.append(
            ImpulseEvent(index=seg + 1, time=full_end, pre_value=pre, post_value=x)
        )
        if t_end <= full_end + BOUNDARY_SNAP:
            # t_end coincides with the impulse instant: close with the
            # post-impulse state as a zero-length final piece.
            pieces.append(_make_piece(seg + 1, [full_end], [x]))
            break
        seg += 1

    return Trajectory(
        params=params,
        x0=float(x0),
        ctrl=ctrl,
        pieces=tuple(pieces),
        events=tuple(events),
        step_error_estimate=(
            worst_step_error if ctrl.error_target is not None else None
        ),
    )
