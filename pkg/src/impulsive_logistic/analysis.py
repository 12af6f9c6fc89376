"""Machine-checked verification of the model's structural claims.

Each check produces a :class:`VerificationReport`: named, self-describing
(the metadata is enough to re-run it), and passing exactly when every
recorded residual is within its tolerance.

The checks:
  * ``verify_impulse_condition`` -- one-sided limits at the impulse
    instants.  The corrected periodic formula must jump by the harvested
    fraction; the legacy formula is expected to be continuous there, which
    is precisely why it is wrong whenever E > 0.
  * ``verify_periodicity`` -- x*(t + 1) = x*(t) on a grid.
  * ``compare_solutions`` -- closed form against the RK4 oracle.
  * ``fixed_point_scan`` -- sign changes of the period-advance map against
    the identity: exactly one positive fixed point when (1-E)A > 1, none
    otherwise.
  * ``convergence_experiment`` -- observational only: iterated map distance
    to the fixed point (no claim is made that the orbit attracts).

Pre-impulse limits are estimated by evaluating just before the instant and
extrapolating the offset to zero (two Richardson stages over offsets
1e-4, 5e-5, 2.5e-5), which pushes the O(offset) bias far below the default
tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .closed_form import (
    ModelParams,
    NoPeriodicSolutionError,
    derive_constants,
    legacy_periodic_at,
    one_sided_limits,
    periodic_solution_at,
    poincare_map,
    solution_at,
)
from .coefficients import (
    DEFAULT_PANELS_PER_UNIT,
    PeriodicCoefficient,
    compute_A,
)
from .integrator import StepControl, Trajectory, integrate

__all__ = [
    "CheckRecord",
    "ConvergenceTable",
    "RICHARDSON_OFFSETS",
    "VerificationReport",
    "compare_solutions",
    "convergence_experiment",
    "critical_harvest",
    "fixed_point_scan",
    "left_limit",
    "verify_impulse_condition",
    "verify_periodicity",
]

#: Offsets used to extrapolate one-sided limits (largest first, halving).
RICHARDSON_OFFSETS = (1e-4, 5e-5, 2.5e-5)

DEFAULT_IMPULSE_TOL = 1e-6
DEFAULT_PERIODICITY_TOL = 1e-8
DEFAULT_ORACLE_TOL = 1e-5
DEFAULT_FIXED_POINT_TOL = 1e-6


@dataclass(frozen=True)
class CheckRecord:
    """One measured residual; passing means residual <= tolerance."""

    location: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "location": self.location,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass(frozen=True, eq=False)
class VerificationReport:
    """Outcome of one named check over a set of locations."""

    check: str
    records: tuple[CheckRecord, ...]
    metadata: dict

    @property
    def passed(self) -> bool:
        return all(rec.passed for rec in self.records)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "passed": self.passed,
            "records": [rec.to_dict() for rec in self.records],
            "metadata": self.metadata,
        }

    def to_text(self) -> str:
        lines = [f"[{'PASS' if self.passed else 'FAIL'}] {self.check}"]
        if self.records:
            width = max(len(rec.location) for rec in self.records)
            for rec in self.records:
                lines.append(
                    f"  {rec.location:<{width}}  residual={rec.residual: .6e}  "
                    f"tol={rec.tolerance:.1e}  {'pass' if rec.passed else 'FAIL'}"
                )
        return "\n".join(lines)

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.to_text()


def left_limit(
    f: Callable[[float], float], t: float, offsets: Sequence[float] = RICHARDSON_OFFSETS
) -> float:
    """Extrapolated limit of f at t from the left.

    Two Richardson stages over halving offsets cancel the linear and
    quadratic terms of f(t - d) in d, leaving an O(d**3) bias.
    """
    d = offsets[0]
    u1, u2, u3 = f(t - d), f(t - d / 2.0), f(t - d / 4.0)
    return (8.0 * u3 - 6.0 * u2 + u1) / 3.0


def verify_impulse_condition(
    which: str,
    params: ModelParams,
    ks: Iterable[int] = (1, 2, 3, 4, 5),
    tol: float = DEFAULT_IMPULSE_TOL,
    panels_per_unit: int = DEFAULT_PANELS_PER_UNIT,
) -> VerificationReport:
    """Check the jump behavior of a periodic formula at the impulse instants.

    which="corrected": for each k, the numerically extrapolated pre-impulse
    limit and the post-impulse value must satisfy post = (1 - E) pre within
    tol (relative to pre).

    which="legacy": the report instead records (a) the continuity residual
    |post - pre| / pre, which must be within tol, and (b) the jump-rule
    shortfall E/2 - violation with tolerance 0, where
    violation = |post - (1 - E) pre| / pre.  Both passing means the legacy
    formula is demonstrably continuous at the impulses and misses the
    required jump by at least half the harvest fraction.
    """
    if which not in ("corrected", "legacy"):
        raise ValueError(f"which must be 'corrected' or 'legacy', got {which!r}")
    ks = tuple(int(k) for k in ks)
    if not ks or any(k < 1 for k in ks):
        raise ValueError(f"impulse indices must be positive, got {ks!r}")

    formula = periodic_solution_at if which == "corrected" else legacy_periodic_at
    keep = 1.0 - params.E

    records: list[CheckRecord] = []
    estimates: dict[str, dict[str, float]] = {}
    for k in ks:
        tau = params.impulse_time(k)
        pre = left_limit(lambda s: formula(params, s, panels_per_unit), tau)
        post = formula(params, tau, panels_per_unit)
        estimates[f"k={k}"] = {"pre": float(pre), "post": float(post)}
        if which == "corrected":
            residual = abs(post - keep * pre) / pre
            records.append(CheckRecord(f"k={k} jump", float(residual), tol))
        else:
            continuity = abs(post - pre) / pre
            violation = abs(post - keep * pre) / pre
            estimates[f"k={k}"]["jump_violation"] = float(violation)
            records.append(CheckRecord(f"k={k} continuity", float(continuity), tol))
            records.append(
                CheckRecord(f"k={k} jump shortfall", float(params.E / 2.0 - violation), 0.0)
            )

    metadata = {
        "which": which,
        "params": params.to_dict(),
        "ks": list(ks),
        "tolerance": tol,
        "offsets": list(RICHARDSON_OFFSETS),
        "panels_per_unit": panels_per_unit,
        "estimates": estimates,
    }
    if which == "corrected":
        limits = one_sided_limits(params, ks[0])
        metadata["analytic_pre"] = limits.pre
        metadata["analytic_post"] = limits.post
    return VerificationReport(
        check=f"impulse condition ({which})", records=tuple(records), metadata=metadata
    )


def verify_periodicity(
    params: ModelParams,
    grid: Sequence[float] | None = None,
    periods: int = 5,
    tol: float = DEFAULT_PERIODICITY_TOL,
    panels_per_unit: int = DEFAULT_PANELS_PER_UNIT,
) -> VerificationReport:
    """Check x*(t + 1) = x*(t) at t = t0 + k + offset for k < periods."""
    if grid is None:
        grid = tuple(j / 16.0 for j in range(16))
    grid = tuple(float(o) for o in grid)
    if any(not (0.0 <= o < 1.0) for o in grid):
        raise ValueError("grid offsets must lie in [0, 1)")
    if periods < 1:
        raise ValueError(f"periods must be >= 1, got {periods!r}")

    records = []
    for k in range(periods):
        for off in grid:
            t = params.t0 + k + off
            now = periodic_solution_at(params, t, panels_per_unit)
            shifted = periodic_solution_at(params, t + 1.0, panels_per_unit)
            residual = abs(shifted - now) / now
            records.append(CheckRecord(f"k={k} offset={off:g}", float(residual), tol))
    metadata = {
        "params": params.to_dict(),
        "grid": list(grid),
        "periods": periods,
        "tolerance": tol,
        "panels_per_unit": panels_per_unit,
    }
    return VerificationReport(check="periodicity", records=tuple(records), metadata=metadata)


def _comparison_nodes(traj: Trajectory, grid_per_period: int) -> list[tuple[float, float]]:
    """Decimated (t, value) samples, post-impulse rows at the boundaries."""
    stride = max(1, traj.ctrl.steps_per_unit // grid_per_period)
    out = []
    last = len(traj.pieces) - 1
    for i, piece in enumerate(traj.pieces):
        times, values = piece.times, piece.values
        if i < last:
            times, values = times[:-1], values[:-1]  # pre-impulse row handled via events
        for t, v in zip(times[::stride], values[::stride]):
            out.append((float(t), float(v)))
    return out


def compare_solutions(
    params: ModelParams,
    x0: float,
    horizon_periods: int,
    ctrl: StepControl | None = None,
    tol: float = DEFAULT_ORACLE_TOL,
    panels_per_unit: int = DEFAULT_PANELS_PER_UNIT,
    grid_per_period: int = 64,
) -> VerificationReport:
    """Closed form against the RK4 oracle over a whole horizon.

    Records the worst relative deviation between ``solution_at`` and the
    integrated trajectory started at x0 (sampled at step boundaries,
    including the pre/post values at every impulse), and the same for the
    periodic formula against a trajectory started at the fixed-point anchor
    when the orbit exists.
    """
    if horizon_periods < 1:
        raise ValueError(f"horizon_periods must be >= 1, got {horizon_periods!r}")
    if ctrl is None:
        ctrl = StepControl()
    consts = derive_constants(params, panels_per_unit)
    t_end = params.t0 + horizon_periods
    keep = 1.0 - params.E

    def worst_against(traj: Trajectory, reference: Callable[[float], float]):
        worst, worst_t = 0.0, traj.t_start
        for t, num in _comparison_nodes(traj, grid_per_period):
            ref = reference(t)
            residual = abs(ref - num) / ref
            if residual > worst:
                worst, worst_t = residual, t
        for event in traj.events:
            ref_post = reference(event.time)
            ref_pre = ref_post / keep
            for num, ref in ((event.pre_value, ref_pre), (event.post_value, ref_post)):
                residual = abs(ref - num) / ref
                if residual > worst:
                    worst, worst_t = residual, event.time
        return worst, worst_t

    traj = integrate(params, x0, t_end, ctrl)
    worst, worst_t = worst_against(
        traj, lambda t: solution_at(params, x0, t, panels_per_unit)
    )
    records = [
        CheckRecord(f"solution vs oracle (worst at t={worst_t:.6g})", float(worst), tol)
    ]
    metadata = {
        "params": params.to_dict(),
        "x0": float(x0),
        "horizon_periods": horizon_periods,
        "h": ctrl.h,
        "tolerance": tol,
        "grid_per_period": grid_per_period,
        "panels_per_unit": panels_per_unit,
        "x0_star": consts.x0_star,
    }
    if consts.x0_star is not None:
        orbit_traj = integrate(params, consts.x0_star, t_end, ctrl)
        worst_p, worst_pt = worst_against(
            orbit_traj, lambda t: periodic_solution_at(params, t, panels_per_unit)
        )
        records.append(
            CheckRecord(
                f"periodic orbit vs oracle (worst at t={worst_pt:.6g})", float(worst_p), tol
            )
        )
    return VerificationReport(
        check="closed form vs numerical oracle", records=tuple(records), metadata=metadata
    )


def critical_harvest(r: PeriodicCoefficient) -> float:
    """Largest sustainable harvest fraction: E* = 1 - 1/A.

    For E < E* the positive periodic orbit exists; at or above it the
    net per-period multiplier (1 - E) A drops to 1 or below and the
    periodic-orbit functions raise :class:`NoPeriodicSolutionError`.
    """
    return 1.0 - 1.0 / compute_A(r)


def _bisect(f: Callable[[float], float], lo: float, hi: float, iters: int = 100) -> float:
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (flo < 0.0) == (fmid < 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fixed_point_scan(
    params: ModelParams,
    x_min: float,
    x_max: float,
    n: int = 512,
    tol: float = DEFAULT_FIXED_POINT_TOL,
) -> VerificationReport:
    """Scan the period-advance map for fixed points on a log-spaced grid.

    When the orbit exists there must be exactly one sign change of
    P(x) - x in (x_min, x_max) and its refined abscissa must match the
    anchor value within tol (relative).  Otherwise there must be no sign
    change, with P(x) < x everywhere on the grid.
    """
    if not (0.0 < x_min < x_max):
        raise ValueError(f"need 0 < x_min < x_max, got {x_min!r}, {x_max!r}")
    if n < 2:
        raise ValueError(f"need at least 2 grid points, got {n!r}")
    consts = derive_constants(params)
    xs = np.geomspace(x_min, x_max, n)
    gap = np.array([poincare_map(params, float(x)) - float(x) for x in xs])

    crossings: list[float] = []
    for i in range(n - 1):
        if gap[i] == 0.0:
            crossings.append(float(xs[i]))
        elif gap[i] * gap[i + 1] < 0.0:
            crossings.append(
                _bisect(lambda x: poincare_map(params, x) - x, float(xs[i]), float(xs[i + 1]))
            )
    if gap[-1] == 0.0:
        crossings.append(float(xs[-1]))

    records = []
    if consts.x0_star is not None:
        records.append(
            CheckRecord("sign changes (expect exactly 1)", float(abs(len(crossings) - 1)), 0.0)
        )
        if len(crossings) == 1:
            records.append(
                CheckRecord(
                    "crossing vs fixed-point anchor",
                    float(abs(crossings[0] - consts.x0_star) / consts.x0_star),
                    tol,
                )
            )
    else:
        records.append(CheckRecord("sign changes (expect none)", float(len(crossings)), 0.0))
        records.append(CheckRecord("map stays below identity", float(np.max(gap)), 0.0))

    metadata = {
        "params": params.to_dict(),
        "x_min": float(x_min),
        "x_max": float(x_max),
        "n": n,
        "tolerance": tol,
        "crossings": [float(c) for c in crossings],
        "x0_star": consts.x0_star,
    }
    return VerificationReport(
        check="fixed-point scan of the period-advance map",
        records=tuple(records),
        metadata=metadata,
    )


@dataclass(frozen=True)
class ConvergenceTable:
    """Observational record of iterated-map distances to the anchor.

    residuals[i][j] = |P^j(seeds[i]) - x0_star| / x0_star.  No pass/fail:
    existence and uniqueness of the orbit say nothing about attraction, so
    this is a diagnostic, not a verified claim.
    """

    x0_star: float
    seeds: tuple[float, ...]
    periods: int
    residuals: tuple[tuple[float, ...], ...]

    def to_text(self) -> str:
        lines = [f"iterated map distance to anchor {self.x0_star:.6g} (per period)"]
        for seed, row in zip(self.seeds, self.residuals):
            trail = " ".join(f"{v:.3e}" for v in row)
            lines.append(f"  x0={seed:<12g} {trail}")
        return "\n".join(lines)


def convergence_experiment(
    params: ModelParams, seeds: Iterable[float], periods: int = 10
) -> ConvergenceTable:
    """Iterate the period-advance map from each seed; record the distances."""
    consts = derive_constants(params)
    if consts.x0_star is None:
        raise NoPeriodicSolutionError(
            "convergence experiment needs the periodic orbit: (1-E)A = "
            f"{consts.q!r} <= 1"
        )
    if periods < 1:
        raise ValueError(f"periods must be >= 1, got {periods!r}")
    anchor = consts.x0_star
    rows = []
    seeds = tuple(float(s) for s in seeds)
    for seed in seeds:
        x = seed
        row = [abs(x - anchor) / anchor]
        for _ in range(periods):
            x = poincare_map(params, x)
            row.append(abs(x - anchor) / anchor)
        rows.append(tuple(row))
    return ConvergenceTable(
        x0_star=anchor, seeds=seeds, periods=periods, residuals=tuple(rows)
    )
