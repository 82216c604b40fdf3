"""Numerical tolerance constants shared across the package."""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # density-matrix validation
    hermitian: float = 1e-12
    trace: float = 1e-12
    # ODE oracle defaults
    ode_rel: float = 1e-10
    ode_abs: float = 1e-12
    # quadrature oracle
    quad_abs: float = 1e-10
    quad_rel: float = 1e-12
    # acceptance gates
    oracle_gate: float = 1e-8
    rate_gate: float = 1e-8
    trace_drift_gate: float = 1e-10
    positivity_gate: float = -1e-9
    uncertainty_floor: float = 1.0 / 16.0 - 1e-10
    # envelope analysis
    collapse_fraction: float = 0.05
    min_samples_per_fast_period: int = 40


TOL = Tolerances()
