"""Hot loops: Dormand-Prince 5(4) integration of the dressed-basis generator.

The state is the real 9-vector
``[L11, L22, L33, Re L12, Im L12, Re L13, Im L13, Re L23, Im L23]``.
All kernels are written once. At import they are compiled with numba unless
``TCLSQUEEZE_DISABLE_NUMBA`` is set, in which case the same source runs as
plain numpy; ``ACCELERATED`` records which path is live.
"""
import numpy as np

from ._accel import USE_NUMBA, jit

ACCELERATED = USE_NUMBA

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAX_STEPS = 2

# Dormand-Prince tableau
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                           49.0 / 176.0, -5103.0 / 18656.0)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# 5th minus embedded 4th order weights
E1, E3, E4, E5, E6, E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                          -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)


def rates(t, lam, coupling):
    """(gamma_minus, gamma_plus) at time t; same formulas as the model module."""
    decay = np.exp(-lam * t)
    g_minus = 1.0 - decay
    phase = 2.0 * coupling * t
    g_plus = lam * lam / (4.0 * coupling * coupling + lam * lam) * (
        1.0 + (2.0 * coupling / lam * np.sin(phase) - np.cos(phase)) * decay)
    return g_minus, g_plus


def rhs(t, y, lam, coupling, omega0):
    g_minus, g_plus = rates(t, lam, coupling)
    out = np.empty(9)
    out[0] = -0.5 * g_plus * y[0]
    out[1] = -0.5 * g_minus * y[1]
    out[2] = 0.5 * g_plus * y[0] + 0.5 * g_minus * y[1]

    w = 2.0 * coupling
    k = 0.25 * (g_plus + g_minus)
    out[3] = w * y[4] - k * y[3]
    out[4] = -w * y[3] - k * y[4]

    w = omega0 + coupling
    k = 0.25 * g_plus
    out[5] = w * y[6] - k * y[5]
    out[6] = -w * y[5] - k * y[6]

    w = omega0 - coupling
    k = 0.25 * g_minus
    out[7] = w * y[8] - k * y[7]
    out[8] = -w * y[7] - k * y[8]
    return out


def error_norm(err, y, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return np.sqrt(np.mean((err / scale) ** 2))


def _dopri5(y0, t_grid, lam, coupling, omega0, rtol, atol, max_step,
                    first_step, max_steps):
    n_out = t_grid.shape[0]
    ys = np.empty((n_out, 9))
    t = t_grid[0]
    t_end = t_grid[n_out - 1]
    y = y0.copy()
    ys[0] = y
    i_out = 1
    f = rhs(t, y, lam, coupling, omega0)

    h = first_step
    if h <= 0.0:
        d0 = np.sqrt(np.mean((y / (atol + rtol * np.abs(y))) ** 2))
        d1 = np.sqrt(np.mean((f / (atol + rtol * np.abs(y))) ** 2))
        h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h = min(h, max_step)

    n_acc = 0
    n_rej = 0
    while i_out < n_out:
        if n_acc + n_rej >= max_steps:
            return ys, n_acc, n_rej, STATUS_MAX_STEPS, t
        if h < 1e-14 * max(1.0, abs(t)):
            return ys, n_acc, n_rej, STATUS_UNDERFLOW, t
        if t + h > t_end:
            h = t_end - t

        k1 = f
        k2 = rhs(t + C2 * h, y + h * (A21 * k1), lam, coupling, omega0)
        k3 = rhs(t + C3 * h, y + h * (A31 * k1 + A32 * k2), lam, coupling, omega0)
        k4 = rhs(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3),
                 lam, coupling, omega0)
        k5 = rhs(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
                 lam, coupling, omega0)
        k6 = rhs(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
                 lam, coupling, omega0)
        y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = rhs(t + h, y_new, lam, coupling, omega0)
        err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        norm = error_norm(err, y, y_new, rtol, atol)

        if norm <= 1.0:
            t_new = t + h
            if i_out < n_out and t_grid[i_out] <= t_new:
                while i_out < n_out and t_grid[i_out] <= t_new:
                    s = (t_grid[i_out] - t) / h
                    s2 = s * s
                    s3 = s2 * s
                    ys[i_out] = ((2.0 * s3 - 3.0 * s2 + 1.0) * y
                                 + (s3 - 2.0 * s2 + s) * h * k1
                                 + (3.0 * s2 - 2.0 * s3) * y_new
                                 + (s3 - s2) * h * k7)
                    i_out += 1
            t = t_new
            y = y_new
            f = k7
            n_acc += 1
            factor = 5.0 if norm == 0.0 else min(5.0, 0.9 * norm ** -0.2)
        else:
            n_rej += 1
            factor = max(0.2, 0.9 * norm ** -0.2)
        h = min(h * factor, max_step)

    return ys, n_acc, n_rej, STATUS_OK, t


if ACCELERATED:
    rates = jit(rates)
    rhs = jit(rhs)
    error_norm = jit(error_norm)
    _dopri5 = jit(_dopri5)


def dopri5_dense(y0, t_grid, lam, coupling, omega0, rtol, atol, max_step,
                 first_step=0.0, max_steps=10_000_000):
    """Integrate the generator from ``t_grid[0]``, sampling at every grid time.

    Returns ``(ys, n_accepted, n_rejected, status, t_last)``. Grid times are
    filled by cubic Hermite interpolation inside accepted steps, so they never
    shorten or reject a step.
    """
    y0 = np.ascontiguousarray(y0, dtype=float)
    t_grid = np.ascontiguousarray(t_grid, dtype=float)
    return _dopri5(y0, t_grid, float(lam), float(coupling), float(omega0),
                   float(rtol), float(atol), float(max_step), float(first_step),
                   int(max_steps))
