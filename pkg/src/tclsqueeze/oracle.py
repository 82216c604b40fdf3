"""Independent numerical checks of the closed-form dynamics.

Three routes, none of which reuse the closed-form damping integrals:

* direct adaptive Runge-Kutta integration of the master equation,
* adaptive quadrature of the decay rates (the damping integrals),
* decay rates rebuilt from the Lorentzian bath-correlation integral.
"""
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import _kernels
from .model import GAMMA0, gamma_minus, gamma_plus, validate_density_matrix
from .tolerances import TOL


class IntegrationError(RuntimeError):
    """The ODE integrator could not reach the requested time."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Settings for :func:`integrate_master_equation`.

    ``max_step=None`` caps steps at 1/40 of a radian of the fastest coherence,
    which keeps the cubic Hermite dense output well below 1e-9.
    """

    rel_tol: float = TOL.ode_rel
    abs_tol: float = TOL.ode_abs
    max_step: float = None
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("integrator tolerances must be positive")
        if self.max_step is not None and not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")

    def step_cap(self, params):
        if self.max_step is not None:
            return self.max_step
        return 0.025 / (params.omega0 + params.coupling)


@dataclass
class OdeTrajectory:
    t: np.ndarray
    rho: np.ndarray  # (n, 3, 3)
    n_accepted: int
    n_rejected: int


# -- state packing ---------------------------------------------------------

def pack_state(rho):
    """Flatten the independent upper-triangle entries into a real 9-vector."""
    rho = np.asarray(rho)
    return np.array([
        rho[0, 0].real, rho[1, 1].real, rho[2, 2].real,
        rho[0, 1].real, rho[0, 1].imag,
        rho[0, 2].real, rho[0, 2].imag,
        rho[1, 2].real, rho[1, 2].imag,
    ])


def unpack_state(y):
    """Inverse of :func:`pack_state`; accepts ``(9,)`` or ``(n, 9)``."""
    y = np.asarray(y, dtype=float)
    rho = np.zeros(y.shape[:-1] + (3, 3), dtype=complex)
    rho[..., 0, 0] = y[..., 0]
    rho[..., 1, 1] = y[..., 1]
    rho[..., 2, 2] = y[..., 2]
    rho[..., 0, 1] = y[..., 3] + 1j * y[..., 4]
    rho[..., 0, 2] = y[..., 5] + 1j * y[..., 6]
    rho[..., 1, 2] = y[..., 7] + 1j * y[..., 8]
    for i, j in ((0, 1), (0, 2), (1, 2)):
        rho[..., j, i] = np.conj(rho[..., i, j])
    return rho


# -- master equation -------------------------------------------------------

def _projector(i, j):
    op = np.zeros((3, 3), dtype=complex)
    op[i, j] = 1.0
    return op


def liouvillian_apply(rho, t, params):
    """Right-hand side of the TCL2 master equation in operator form.

    Builds -i[H, rho] plus one jump channel per dressed excited state
    (jump operator |E0><E1+-|) with the time-dependent rate of that state.
    """
    rho = np.asarray(rho, dtype=complex)
    hamiltonian = np.diag(params.energies).astype(complex)
    drho = -1j * (hamiltonian @ rho - rho @ hamiltonian)
    channels = ((0, gamma_plus(t, params)), (1, gamma_minus(t, params)))
    for level, rate in channels:
        jump = _projector(2, level)
        number = jump.conj().T @ jump
        drho += rate * (0.5 * jump @ rho @ jump.conj().T
                        - 0.25 * (number @ rho + rho @ number))
    return drho


def integrate_master_equation(rho0, t_grid, params, cfg=None):
    """Integrate the master equation with Dormand-Prince 5(4) and dense output.

    Parameters
    ----------
    rho0 : array_like
        Initial dressed-basis density matrix.
    t_grid : array_like
        Ascending output times starting at 0.
    params : ModelParams
    cfg : IntegratorConfig, optional

    Returns
    -------
    OdeTrajectory
    """
    cfg = cfg or IntegratorConfig()
    rho0 = validate_density_matrix(rho0)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("t_grid must be a non-empty 1-D array")
    if t_grid[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    if np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be ascending")

    ys, n_acc, n_rej, status, t_last = _kernels.dopri5_dense(
        pack_state(rho0), t_grid, params.lam, params.coupling, params.omega0,
        cfg.rel_tol, cfg.abs_tol, cfg.step_cap(params), max_steps=cfg.max_steps)
    if status == _kernels.STATUS_UNDERFLOW:
        raise IntegrationError(f"step size underflow at t={t_last!r}")
    if status == _kernels.STATUS_MAX_STEPS:
        raise IntegrationError(
            f"exceeded {cfg.max_steps} steps at t={t_last!r}")
    return OdeTrajectory(t=t_grid, rho=unpack_state(ys),
                         n_accepted=int(n_acc), n_rejected=int(n_rej))


# -- quadrature ------------------------------------------------------------

def _panel_edges(t, oscillation):
    """Breakpoints no more than a quarter period apart for angular frequency ``oscillation``."""
    if oscillation <= 0 or t == 0:
        return np.array([0.0, t])
    quarter = 0.5 * np.pi / oscillation
    n = max(1, int(np.ceil(t / quarter)))
    return np.linspace(0.0, t, n + 1)


def _panel_quad(func, edges, epsabs, epsrel, what):
    total = 0.0
    per_panel = epsabs / max(1, len(edges) - 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            try:
                value, _ = integrate.quad(func, a, b, epsabs=per_panel, epsrel=epsrel,
                                          limit=200)
            except integrate.IntegrationWarning as exc:
                raise QuadratureError(f"{what}: no convergence on [{a}, {b}]: {exc}") from exc
            total += value
    return total


def quad_damping(t, which, params, epsabs=TOL.quad_abs, epsrel=TOL.quad_rel):
    """Damping integral f1 or f2 by adaptive Gauss-Kronrod quadrature of its rate."""
    if t < 0:
        raise ValueError("time must be non-negative")
    if which == "f1":
        rate, oscillation = gamma_minus, 0.0
    elif which == "f2":
        rate, oscillation = gamma_plus, 2.0 * params.coupling
    else:
        raise ValueError(f"which must be 'f1' or 'f2', got {which!r}")
    edges = _panel_edges(float(t), oscillation)
    return 0.5 * _panel_quad(lambda s: float(rate(s, params)), edges, epsabs, epsrel, which)


def rate_from_correlation(omega, t, params, epsabs=TOL.quad_abs, epsrel=TOL.quad_rel):
    """TCL2 decay rate at frequency ``omega`` from the bath correlation function.

    The Lorentzian spectral density, extended over the whole frequency axis,
    has correlation function (gamma0 lam / 2) exp(-lam s - i omega1 s); the rate is
    twice the real part of its one-sided Fourier integral up to ``t``.
    """
    if t < 0:
        raise ValueError("time must be non-negative")
    lam = params.lam
    detuning = omega - params.peak_frequency

    def integrand(s):
        return np.exp(-lam * s) * np.cos(detuning * s)

    edges = _panel_edges(float(t), abs(detuning))
    scale = GAMMA0 * lam
    return scale * _panel_quad(integrand, edges, epsabs / scale, epsrel, "rate")
