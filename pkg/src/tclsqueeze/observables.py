"""Field and atom observables derived from the dressed-basis density matrix.

All reductions broadcast over leading axes, so a whole trajectory of shape
``(n, 3, 3)`` can be reduced at once.

In the single-excitation truncation <a^2> vanishes identically, which makes
both quadrature second moments equal to (1 + 2<n>)/4. That is exact here,
not an approximation.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, signal

from .tolerances import TOL

SQRT2 = np.sqrt(2.0)

#: Dressed -> bare change of basis; columns are |E1+>, |E1->, |E0> in the bare
#: basis [|1g>, |0e>, |0g>].
DRESSED_TO_BARE = np.array([
    [1.0, 1.0, 0.0],
    [1.0, -1.0, 0.0],
    [0.0, 0.0, SQRT2],
]) / SQRT2

CONVENTIONS = ("quarter", "unit")


class UndersampledError(ValueError):
    """Trajectory too coarse for envelope extraction."""


@dataclass
class QuadratureMoments:
    mean_a: object
    mean_n: object
    x1_mean: object
    x2_mean: object
    x1_var: object
    x2_var: object


@dataclass
class ObservableRecord:
    t: float
    F1: float
    F2: float
    Pe: float
    mean_n: float
    re_a: float
    im_a: float
    uncertainty_product: float
    min_eigenvalue: float


@dataclass
class EnvelopeSummary:
    """Collapse/revival structure of an F1 trajectory.

    ``period_estimate`` is NaN when fewer than two revival peaks are found.
    """

    collapse_times: list
    revival_peaks: list
    period_estimate: float
    fast_frequency: float
    t: np.ndarray = field(repr=False, default=None)
    lower: np.ndarray = field(repr=False, default=None)

    @property
    def minimum(self):
        """Deepest point of the lower envelope."""
        return float(np.min(self.lower))


def dressed_to_bare(rho):
    """Rotate into the bare basis ``[|1g>, |0e>, |0g>]``."""
    rho = np.asarray(rho)
    return DRESSED_TO_BARE @ rho @ DRESSED_TO_BARE.T


def bare_to_dressed(rho_bare):
    rho_bare = np.asarray(rho_bare)
    return DRESSED_TO_BARE.T @ rho_bare @ DRESSED_TO_BARE


def reduce_field(rho):
    """Trace out the atom; returns 2x2 ``rho_f`` in photon basis ``[|0>, |1>]``.

    Only ``|1g>`` carries a photon, so the coherence <1|rho_f|0> comes from
    <1g|rho|0g> alone.
    """
    rho = np.asarray(rho)
    one = 0.5 * (rho[..., 0, 0].real + rho[..., 1, 1].real) + rho[..., 0, 1].real
    coherence = (rho[..., 0, 2] + rho[..., 1, 2]) / SQRT2
    rho_f = np.empty(rho.shape[:-2] + (2, 2), dtype=complex)
    rho_f[..., 1, 1] = one
    rho_f[..., 0, 0] = 1.0 - one
    rho_f[..., 1, 0] = coherence
    rho_f[..., 0, 1] = np.conj(coherence)
    return rho_f


def atom_excited_population(rho):
    """<0e|rho|0e>, the probability of finding the atom excited."""
    rho = np.asarray(rho)
    return 0.5 * (rho[..., 0, 0].real + rho[..., 1, 1].real) - rho[..., 0, 1].real


def quadrature_moments(rho_f):
    rho_f = np.asarray(rho_f)
    mean_a = rho_f[..., 1, 0]
    mean_n = rho_f[..., 1, 1].real
    second = 0.25 * (1.0 + 2.0 * mean_n)
    x1 = mean_a.real
    x2 = mean_a.imag
    return QuadratureMoments(
        mean_a=mean_a, mean_n=mean_n, x1_mean=x1, x2_mean=x2,
        x1_var=second - x1**2, x2_var=second - x2**2)


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise ValueError(
            f"unknown squeezing convention {convention!r}; expected one of {CONVENTIONS}")


def squeezing_factors(moments, convention="quarter"):
    """(F1, F2) = variance - 1/4, or four times that for ``convention='unit'``.

    Negative values mean the quadrature fluctuates below the vacuum level.
    """
    _check_convention(convention)
    scale = 4.0 if convention == "unit" else 1.0
    return scale * (moments.x1_var - 0.25), scale * (moments.x2_var - 0.25)


def uncertainty_product(moments):
    return moments.x1_var * moments.x2_var


def squeezing_envelope(rho, convention="quarter"):
    """Exact lower envelope of F1 over the fast optical phase.

    Rotating the quadrature phase turns (Re<a>)^2 into at most |<a>|^2, so the
    envelope is <n>/2 - |<a>|^2 (times four in the unit convention).
    """
    _check_convention(convention)
    m = quadrature_moments(reduce_field(rho))
    env = 0.5 * m.mean_n - np.abs(m.mean_a) ** 2
    return 4.0 * env if convention == "unit" else env


def min_eigenvalue(rho):
    return np.linalg.eigvalsh(np.asarray(rho))[..., 0]


def observable_columns(rho, convention="quarter"):
    """Column arrays of every per-sample observable for a stack of states."""
    rho_f = reduce_field(rho)
    m = quadrature_moments(rho_f)
    f1, f2 = squeezing_factors(m, convention)
    return {
        "F1": f1,
        "F2": f2,
        "Pe": atom_excited_population(rho),
        "n": m.mean_n,
        "re_a": m.mean_a.real,
        "im_a": m.mean_a.imag,
        "x1_var": m.x1_var,
        "x2_var": m.x2_var,
        "uncertainty": uncertainty_product(m),
        "min_eig": min_eigenvalue(rho),
        "field_trace": np.trace(rho_f, axis1=-2, axis2=-1).real,
    }


# -- envelope analysis -----------------------------------------------------

def _as_series(trajectory):
    """(t, F1) arrays from a list of ObservableRecord or anything with t/F1 arrays."""
    if hasattr(trajectory, "t") and hasattr(trajectory, "F1"):
        return np.asarray(trajectory.t, dtype=float), np.asarray(trajectory.F1, dtype=float)
    records = list(trajectory)
    return (np.array([r.t for r in records], dtype=float),
            np.array([r.F1 for r in records], dtype=float))


def _odd_window(width, dt):
    n = max(3, int(round(width / dt)))
    return n if n % 2 else n + 1


def dominant_frequency(t, values):
    """Angular frequency of the strongest spectral line of a uniformly sampled series.

    Hann-windowed, mean removed; the peak is refined by a parabola through the
    largest bin and its two neighbours.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    dt = (t[-1] - t[0]) / (len(t) - 1)
    x = (values - values.mean()) * np.hanning(len(values))
    spectrum = np.abs(np.fft.rfft(x))
    spectrum[0] = 0.0
    k = int(np.argmax(spectrum))
    offset = 0.0
    if 0 < k < len(spectrum) - 1:
        a, b, c = spectrum[k - 1], spectrum[k], spectrum[k + 1]
        denom = a - 2.0 * b + c
        if denom != 0.0:
            offset = 0.5 * (a - c) / denom
    return 2.0 * np.pi * (k + offset) / (len(values) * dt)


def extract_envelope(trajectory, params, collapse_fraction=TOL.collapse_fraction):
    """Collapse and revival metrics of the F1 oscillation.

    The lower envelope is a running minimum of F1 over one period
    2*pi/omega0. Revival peaks are its local minima deeper than
    ``collapse_fraction`` of the global minimum (by prominence); collapses are
    the points nearest zero within each stretch where the envelope stays
    within that fraction of zero. The fast frequency
    is the dominant spectral line of F1 minus its running mean.

    Raises
    ------
    UndersampledError
        If the grid has fewer than 40 samples per 2*pi/(omega0 + coupling),
        or is not uniform.
    """
    t, f1 = _as_series(trajectory)
    if len(t) < 3:
        raise UndersampledError("trajectory needs at least three samples")
    steps = np.diff(t)
    dt = steps.mean()
    if np.max(np.abs(steps - dt)) > 1e-9 * max(1.0, t[-1]):
        raise UndersampledError("trajectory must be uniformly sampled")
    fast_period = 2.0 * np.pi / (params.omega0 + params.coupling)
    needed = TOL.min_samples_per_fast_period
    if fast_period / dt < needed * (1.0 - 1e-9):
        raise UndersampledError(
            f"need at least {needed} samples per fast period {fast_period:.6g}, "
            f"i.e. dt <= {fast_period / needed:.6g}; got dt = {dt:.6g}")

    window = _odd_window(2.0 * np.pi / params.omega0, dt)
    lower = ndimage.minimum_filter1d(f1, window, mode="nearest")
    depth = abs(float(lower.min()))

    revival_peaks = []
    collapse_times = []
    if depth > 0.0:
        threshold = collapse_fraction * depth
        troughs, _ = signal.find_peaks(-lower, prominence=threshold)
        revival_peaks = [(float(t[i]), float(lower[i])) for i in troughs]
        # one collapse per stretch of near-zero envelope, skipping the start
        stretches, count = ndimage.label(np.abs(lower) < threshold)
        for k in range(1, count + 1):
            idx = np.flatnonzero(stretches == k)
            if idx[0] > 0:
                collapse_times.append(float(t[idx[np.argmax(lower[idx])]]))

    if len(revival_peaks) >= 2:
        period = float(np.mean(np.diff([p[0] for p in revival_peaks])))
    else:
        period = float("nan")

    running_mean = ndimage.uniform_filter1d(f1, window, mode="nearest")
    fast = dominant_frequency(t, f1 - running_mean)

    return EnvelopeSummary(collapse_times=collapse_times, revival_peaks=revival_peaks,
                           period_estimate=period, fast_frequency=float(fast),
                           t=t, lower=lower)
