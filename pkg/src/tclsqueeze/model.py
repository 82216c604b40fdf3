"""Closed-form TCL2 dynamics of a two-level atom in a leaky cavity.

Everything lives in the single-excitation dressed basis, ordered
``[|E1+>, |E1->, |E0>]`` with ``|E1+-> = (|1g> +- |0e>)/sqrt(2)`` and
``|E0> = |0g>``. Units are gamma0 = 1: times are gamma0*t and all frequencies
are multiples of gamma0.

The bath is a Lorentzian of width ``lam`` peaked on the ``|E1->`` transition
frequency ``omega0 - coupling``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .tolerances import TOL

GAMMA0 = 1.0

#: Dressed basis labels, in matrix order.
BASIS = ("E1+", "E1-", "E0")


class ParameterError(ValueError):
    """Raised for physically meaningless model or state parameters."""


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters in units of gamma0.

    Attributes
    ----------
    lam : float
        Spectral width of the bath (inverse reservoir correlation time).
    coupling : float
        Atom-cavity coupling Omega.
    omega0 : float
        Atomic transition (and cavity) frequency.
    """

    lam: float = 5.0
    coupling: float = 1.0
    omega0: float = 10.0

    def __post_init__(self):
        for name in ("lam", "coupling", "omega0"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.lam <= 0:
            raise ParameterError(f"lam (spectral width) must be > 0, got {self.lam!r}")
        if self.coupling < 0:
            raise ParameterError(f"coupling must be >= 0, got {self.coupling!r}")
        if self.omega0 <= self.coupling:
            raise ParameterError(
                f"omega0 must exceed coupling (omega0 - coupling > 0), "
                f"got omega0={self.omega0!r}, coupling={self.coupling!r}")

    @property
    def peak_frequency(self):
        """Lorentzian centre omega1 = omega0 - coupling."""
        return self.omega0 - self.coupling

    @property
    def relaxation_time(self):
        return 1.0 / GAMMA0

    @property
    def correlation_time(self):
        return 1.0 / self.lam

    @property
    def markovian(self):
        """True when lam > 2 gamma0 (correlation time shorter than relaxation)."""
        return self.lam > 2.0 * GAMMA0

    @property
    def energies(self):
        """Eigenenergies of the dressed basis states."""
        half = 0.5 * self.omega0
        return np.array([half + self.coupling, half - self.coupling, -half])


@dataclass(frozen=True)
class InitialAtomSpec:
    """Initial atom state cos(theta/2)|e> + exp(i phi) sin(theta/2)|g>, cavity in vacuum."""

    theta: float = 2.0 * np.pi / 3.0
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi:
            raise ParameterError(f"theta must lie in [0, pi], got {self.theta!r}")
        if not 0.0 <= self.phi < 2.0 * np.pi:
            raise ParameterError(f"phi must lie in [0, 2*pi), got {self.phi!r}")


@dataclass(frozen=True)
class DampingValues:
    """Rates and damping integrals at a given time (scalars or arrays)."""

    t: object
    f1: object
    f2: object
    gamma_minus: object
    gamma_plus: object


@dataclass(frozen=True)
class PropagatorCoefficients:
    c11: object
    c12: object
    c13: object
    c22: object
    c23: object


def _times(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(~np.isfinite(t)):
        raise ValueError("time must be finite and non-negative")
    return t


def _scalar_or_array(x):
    return x[()] if isinstance(x, np.ndarray) and x.ndim == 0 else x


def spectral_density(omega, params):
    """Lorentzian spectral density J(omega) peaked at omega0 - coupling."""
    omega = np.asarray(omega, dtype=float)
    lam = params.lam
    detuning = params.peak_frequency - omega
    return _scalar_or_array(GAMMA0 * lam**2 / (2.0 * np.pi * (detuning**2 + lam**2)))


def gamma_minus(t, params):
    """Decay rate of |E1->, on resonance with the bath peak."""
    t = _times(t)
    return _scalar_or_array(-GAMMA0 * np.expm1(-params.lam * t))


def gamma_plus(t, params):
    """Decay rate of |E1+>, detuned by 2*coupling from the bath peak.

    Can be transiently negative when lam < 2*coupling; never clamp it.
    """
    t = _times(t)
    lam, om = params.lam, params.coupling
    prefactor = GAMMA0 * lam**2 / (4.0 * om**2 + lam**2)
    phase = 2.0 * om * t
    # 1 - cos(2wt) e^{-lt} rewritten to avoid cancellation at small t
    one_minus = 2.0 * np.sin(om * t) ** 2 - np.cos(phase) * np.expm1(-lam * t)
    bracket = one_minus + (2.0 * om / lam) * np.sin(phase) * np.exp(-lam * t)
    return _scalar_or_array(prefactor * bracket)


def _x_plus_expm1_neg(x):
    """x + exp(-x) - 1 for x >= 0, by Taylor series where the direct form cancels."""
    x = np.asarray(x, dtype=float)
    direct = x + np.expm1(-x)
    small = x < 0.1
    if np.any(small):
        xs = np.where(small, x, 0.0)
        series = np.zeros_like(xs)
        for k in range(14, 1, -1):  # x^2/2! - x^3/3! + ... through x^14
            series = series * xs + (-1) ** k / math.factorial(k)
        direct = np.where(small, series * xs * xs, direct)
    return direct


def damping_f1(t, params):
    """Half the time integral of gamma_minus."""
    t = _times(t)
    lam = params.lam
    return _scalar_or_array(0.5 * GAMMA0 * _x_plus_expm1_neg(lam * t) / lam)


def damping_f2(t, params):
    """Half the time integral of gamma_plus."""
    t = _times(t)
    lam, om = params.lam, params.coupling
    denom = 4.0 * om**2 + lam**2
    decay = np.exp(-lam * t)
    # e^{-lt} cos(2wt) - 1, again without the small-t cancellation
    cos_term = np.cos(2.0 * om * t) * np.expm1(-lam * t) - 2.0 * np.sin(om * t) ** 2
    bracket = (t
               - 4.0 * om * decay * np.sin(2.0 * om * t) / denom
               + (lam**2 - 4.0 * om**2) * cos_term / (lam * denom))
    return _scalar_or_array(0.5 * GAMMA0 * lam**2 / denom * bracket)


def damping_values(t, params):
    return DampingValues(
        t=_scalar_or_array(_times(t)),
        f1=damping_f1(t, params),
        f2=damping_f2(t, params),
        gamma_minus=gamma_minus(t, params),
        gamma_plus=gamma_plus(t, params),
    )


def propagator_coefficients(t, params, dissipation=True):
    """Coefficients mapping Lambda(0) to Lambda(t).

    With ``dissipation=False`` both damping integrals are zeroed, leaving the
    bare unitary JC phases.
    """
    t = _times(t)
    if dissipation:
        f1 = np.asarray(damping_f1(t, params))
        f2 = np.asarray(damping_f2(t, params))
    else:
        f1 = f2 = np.zeros_like(t)
    om, w0 = params.coupling, params.omega0
    coeffs = PropagatorCoefficients(
        c11=np.exp(-f2),
        c12=np.exp(-2j * om * t) * np.exp(-0.5 * (f1 + f2)),
        c13=np.exp(-1j * (w0 + om) * t) * np.exp(-0.5 * f2),
        c22=np.exp(-f1),
        c23=np.exp(-1j * (w0 - om) * t) * np.exp(-0.5 * f1),
    )
    if t.ndim == 0:
        coeffs = PropagatorCoefficients(*(_scalar_or_array(np.asarray(c)) for c in (
            coeffs.c11, coeffs.c12, coeffs.c13, coeffs.c22, coeffs.c23)))
    return coeffs


def validate_density_matrix(rho, tol=TOL):
    """Return ``rho`` as a complex 3x3 array or raise ParameterError."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (3, 3):
        raise ParameterError(f"dressed density matrix must be 3x3, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ParameterError("dressed density matrix has non-finite entries")
    if np.max(np.abs(rho - rho.conj().T)) > tol.hermitian:
        raise ParameterError("dressed density matrix is not Hermitian")
    trace = np.trace(rho)
    if abs(trace - 1.0) > tol.trace:
        raise ParameterError(f"dressed density matrix has trace {trace}, expected 1")
    return rho


def evolve(rho0, t, params, dissipation=True):
    """Propagate a dressed-basis density matrix to time(s) ``t``.

    Returns an array of shape ``np.shape(t) + (3, 3)``. The lower triangle is
    filled by conjugation so the result is Hermitian by construction, and the
    ground-state population absorbs exactly what the excited states lose.
    """
    rho0 = validate_density_matrix(rho0)
    t = _times(t)
    c = propagator_coefficients(t, params, dissipation=dissipation)
    p11, p22, p33 = rho0[0, 0].real, rho0[1, 1].real, rho0[2, 2].real

    out = np.empty(t.shape + (3, 3), dtype=complex)
    out[..., 0, 0] = c.c11 * p11
    out[..., 1, 1] = c.c22 * p22
    out[..., 2, 2] = (1.0 - c.c11) * p11 + (1.0 - c.c22) * p22 + p33
    out[..., 0, 1] = c.c12 * rho0[0, 1]
    out[..., 0, 2] = c.c13 * rho0[0, 2]
    out[..., 1, 2] = c.c23 * rho0[1, 2]
    for i, j in ((0, 1), (0, 2), (1, 2)):
        out[..., j, i] = np.conj(out[..., i, j])
    return out


def initial_dressed_state(spec):
    """Dressed-basis density matrix of the atom state ``spec`` times cavity vacuum."""
    # cos(theta/2) as sin((pi - theta)/2) so theta = pi gives an exact zero
    cos_half = np.sin(0.5 * (np.pi - spec.theta))
    sin_half = np.sin(0.5 * spec.theta)
    a_plus = cos_half / np.sqrt(2.0)
    magnitudes = np.array([a_plus, -a_plus, sin_half])
    # phase only on the |E0> row/column keeps the diagonal exactly real
    phase = np.ones((3, 3), dtype=complex)
    phase[:2, 2] = np.exp(-1j * spec.phi)
    phase[2, :2] = np.exp(1j * spec.phi)
    return np.outer(magnitudes, magnitudes) * phase
