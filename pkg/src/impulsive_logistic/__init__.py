"""Period-1 logistic growth with proportional harvesting impulses.

Closed-form solution evaluation, the corrected periodic orbit and its
refuted legacy counterpart, an independent RK4 oracle, and verification
reports; see the README for the CLI.
"""

from .analysis import (
    CheckRecord,
    ConvergenceTable,
    VerificationReport,
    compare_solutions,
    convergence_experiment,
    critical_harvest,
    fixed_point_scan,
    verify_impulse_condition,
    verify_periodicity,
)
from .closed_form import (
    ImpulseLimits,
    ModelParams,
    NoPeriodicSolutionError,
    SolutionConstants,
    derive_constants,
    fixed_point_x0,
    legacy_periodic_at,
    one_sided_limits,
    periodic_orbit_mean,
    periodic_solution_at,
    poincare_map,
    solution_at,
)
from .coefficients import (
    CoefficientPair,
    ConstantCoefficient,
    PeriodicCoefficient,
    PiecewiseConstantCoefficient,
    QuadratureResult,
    SinusoidCoefficient,
    antiderivative_between,
    coefficient_from_dict,
    compute_A,
    compute_B,
    compute_B_result,
    forcing_integral,
    forcing_integral_result,
)
from .integrator import (
    ImpulseEvent,
    IntegrationError,
    StepControl,
    Trajectory,
    exact_constant_flow,
    integrate,
)

__version__ = "0.1.0"

__all__ = [
    "CheckRecord",
    "CoefficientPair",
    "ConstantCoefficient",
    "ConvergenceTable",
    "ImpulseEvent",
    "ImpulseLimits",
    "IntegrationError",
    "ModelParams",
    "NoPeriodicSolutionError",
    "PeriodicCoefficient",
    "PiecewiseConstantCoefficient",
    "QuadratureResult",
    "SinusoidCoefficient",
    "SolutionConstants",
    "StepControl",
    "Trajectory",
    "VerificationReport",
    "antiderivative_between",
    "coefficient_from_dict",
    "compare_solutions",
    "compute_A",
    "compute_B",
    "compute_B_result",
    "convergence_experiment",
    "critical_harvest",
    "derive_constants",
    "exact_constant_flow",
    "fixed_point_scan",
    "fixed_point_x0",
    "forcing_integral",
    "forcing_integral_result",
    "integrate",
    "legacy_periodic_at",
    "one_sided_limits",
    "periodic_orbit_mean",
    "periodic_solution_at",
    "poincare_map",
    "solution_at",
    "verify_impulse_condition",
    "verify_periodicity",
]
