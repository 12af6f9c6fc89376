"""Shared fixtures and independent oracles for the test suite.

The oracles here are deliberately separate from the library code paths they
check: the logistic flow is the textbook closed form written out inline, and
the chained variant applies the harvest jumps by plain multiplication.
"""

from __future__ import annotations

import math

import numpy as np

from impulsive_logistic import (
    CoefficientPair,
    ConstantCoefficient,
    ModelParams,
    PeriodicCoefficient,
    PiecewiseConstantCoefficient,
    SinusoidCoefficient,
)

LN2 = math.log(2.0)


def golden_params(E: float = 0.25, t0: float = 0.5) -> ModelParams:
    """Constant-coefficient instance: r = ln 2, K = 100."""
    return ModelParams(
        pair=CoefficientPair(r=ConstantCoefficient(LN2), K=ConstantCoefficient(100.0)),
        E=E,
        t0=t0,
    )


def logistic_flow(r0: float, K0: float, x: float, dt: float) -> float:
    """Autonomous logistic flow, written independently of the library."""
    e = math.exp(r0 * dt)
    return K0 * x * e / (K0 + x * (e - 1.0))


def chained_flow(r0: float, K0: float, E: float, t0: float, x0: float, t: float) -> float:
    """Flow with multiplicative harvest jumps at t0 + 1, t0 + 2, ...

    Evaluation exactly at a jump instant returns the post-jump value.
    """
    k = math.floor(t - t0 + 1e-9)
    x = x0
    for _ in range(k):
        x = (1.0 - E) * logistic_flow(r0, K0, x, 1.0)
    rest = t - (t0 + k)
    if rest > 1e-9:
        x = logistic_flow(r0, K0, x, rest)
    return x


def richardson_left(f, t: float, d: float = 1e-4) -> float:
    """Left limit of f at t, two Richardson stages over halving offsets."""
    u1, u2, u3 = f(t - d), f(t - d / 2.0), f(t - d / 4.0)
    return (8.0 * u3 - 6.0 * u2 + u1) / 3.0


def random_coefficient(
    rng: np.random.Generator, kind: str, low: float, high: float
) -> PeriodicCoefficient:
    """One coefficient of the requested kind with values inside [low, high]."""
    if kind == "constant":
        return ConstantCoefficient(float(rng.uniform(low, high)))
    if kind == "sinusoid":
        mean = float(rng.uniform(0.6 * low + 0.4 * high, high))
        amp = float(rng.uniform(0.1, 0.6) * (mean - low))
        phase = float(rng.uniform(0.0, 2.0 * math.pi))
        return SinusoidCoefficient(mean=mean, amp=amp, phase=phase)
    if kind == "piecewise":
        while True:
            m = int(rng.integers(1, 3))
            interior = np.sort(rng.uniform(0.15, 0.85, size=m))
            if m == 1 or np.min(np.diff(interior)) > 0.08:
                break
        breakpoints = (0.0, *(float(b) for b in interior), 1.0)
        values = tuple(float(v) for v in rng.uniform(low, high, size=m + 1))
        return PiecewiseConstantCoefficient(breakpoints=breakpoints, values=values)
    raise ValueError(kind)


_KINDS = ("constant", "sinusoid", "piecewise")


def random_params(
    rng: np.random.Generator, index: int = 0, require_orbit: bool = True
) -> ModelParams:
    """Random instance with mixed coefficient kinds (cycled so all appear)."""
    r = random_coefficient(rng, _KINDS[index % 3], 0.3, 1.5)
    K = random_coefficient(rng, _KINDS[(index + 1) % 3], 50.0, 200.0)
    growth = math.exp(r.integral(0.0, 1.0))
    e_crit = 1.0 - 1.0 / growth
    if require_orbit:
        E = float(rng.uniform(0.15, 0.8)) * e_crit
    else:
        E = min(0.95, e_crit + float(rng.uniform(0.05, 0.2)) * (1.0 - e_crit))
    t0 = float(rng.uniform(0.15, 0.85))
    return ModelParams(pair=CoefficientPair(r=r, K=K), E=E, t0=t0)
