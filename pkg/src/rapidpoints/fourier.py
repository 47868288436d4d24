"""Fourier-Stieltjes transforms of stage measures and decay estimation.

Measures here are finite sums of uniform densities on intervals, so the
transform is evaluated in closed form per interval; no FFT is involved.
Decay exponents are fitted to the running tail supremum of |mu-hat|, not
to pointwise values, because the modulus oscillates through near-zeros.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, InvalidArgumentError
from .measure import total_mass

# Below this |u * length| the closed form loses accuracy to cancellation
# and an 8-term power series takes over (truncation error < 1e-24 rel).
SERIES_SWITCH = 1e-3
_SERIES_TERMS = 8


def _phase_average(x):
    """E(x) = (e^{ix} - 1) / (ix), the transform of Uniform[0,1] at x."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape, dtype=complex)
    small = np.abs(x) < SERIES_SWITCH
    xs = x[small]
    acc = np.zeros(xs.shape, dtype=complex)
    for k in range(_SERIES_TERMS - 1, -1, -1):
        acc = acc * (1j * xs) + 1.0 / _factorial(k + 1)
    out[small] = acc
    xl = x[~small]
    out[~small] = (np.exp(1j * xl) - 1.0) / (1j * xl)
    return out


def _factorial(n):
    r = 1
    for i in range(2, n + 1):
        r *= i
    return r


def transform_uniform(u):
    """Transform of Lebesgue measure on [0,1]; scalar in, scalar out."""
    return complex(_phase_average(np.asarray([u], dtype=float))[0])


@dataclass(frozen=True)
class SpectrumGrid:
    """Sampled transform values of one measure on a frequency grid."""

    u_values: np.ndarray
    values: np.ndarray
    measure_id: str = ""

    def __post_init__(self):
        u = np.asarray(self.u_values, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if len(u) != len(v):
            raise InvalidArgumentError("u_values and values must have equal length")
        if len(u) == 0 or (u <= 0).any() or (np.diff(u) <= 0).any():
            raise InvalidArgumentError("u_values must be strictly increasing and positive")
        object.__setattr__(self, "u_values", u)
        object.__setattr__(self, "values", v)
        u.setflags(write=False)
        v.setflags(write=False)


def transform_measure(measure, u_values, measure_id="", chunk=8):
    """Closed-form transform of a piecewise-uniform stage measure.

    mu-hat(u) = density * h * E(u h) * sum_k e^{i u a_k} over selected
    intervals [a_k, a_k + h]; interval summation is index-ordered so
    results are bit-reproducible.
    """
    u = np.asarray(u_values, dtype=float)
    if u.size == 0:
        raise InvalidArgumentError("u_values must be nonempty")
    h = measure.interval_length
    a = (np.sort(measure.selected) - 1) * h
    values = np.empty(len(u), dtype=complex)
    for start in range(0, len(u), chunk):
        ub = u[start : start + chunk]
        phases = np.exp(1j * np.multiply.outer(ub, a))
        values[start : start + chunk] = phases.sum(axis=1)
    values *= measure.density * h * _phase_average(u * h)
    return SpectrumGrid(u_values=u, values=values, measure_id=measure_id)


def log_frequency_grid(u_max, points_per_decade=64, u_min=1.0):
    """Log-spaced frequencies in (u_min, u_max]."""
    if u_max <= u_min:
        raise InvalidArgumentError("u_max must exceed u_min")
    n = int(np.ceil(np.log10(u_max / u_min) * points_per_decade))
    return u_min * 10.0 ** (np.arange(1, n + 1) / points_per_decade)


@dataclass(frozen=True)
class DecayFit:
    """Power-law fit of the spectrum's running tail supremum."""

    exponent: float
    intercept: float
    u_min: float
    r_squared: float
    n_points: int = 0


def decay_exponent(spectrum, u_min):
    """Fit log T(u) ~ -exponent * log u over u >= u_min.

    T(u_j) = max over u_k >= u_j of |mu-hat(u_k)| (the decay envelope).
    """
    u = spectrum.u_values
    mag = np.abs(spectrum.values)
    tail_sup = np.maximum.accumulate(mag[::-1])[::-1]
    keep = (u >= u_min) & (tail_sup > 0.0)
    if np.count_nonzero(tail_sup[u >= u_min]) == 0:
        raise InvalidArgumentError("degenerate spectrum: all tail suprema are zero")
    if np.count_nonzero(keep) < 10:
        raise InvalidArgumentError("need >= 10 grid points with u >= u_min")
    x = np.log(u[keep])
    y = np.log(tail_sup[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    return DecayFit(
        exponent=float(-slope),
        intercept=float(intercept),
        u_min=float(u_min),
        r_squared=r2,
        n_points=int(np.count_nonzero(keep)),
    )


def fourier_dimension_estimate(fit):
    """Clamp 2 * exponent to [0, 1]."""
    return min(1.0, max(0.0, 2.0 * fit.exponent))


@dataclass(frozen=True)
class Lemma22Report:
    violating_u: tuple
    max_ratio: float


def lemma22_check(spectrum_m, spectrum_0, epsilon, alpha):
    """Check |mu-hat_m(u) - mu-hat_0(u)| < eps * u^((alpha^2-1)/2) on a grid."""
    if len(spectrum_m.u_values) != len(spectrum_0.u_values) or not np.array_equal(
        spectrum_m.u_values, spectrum_0.u_values
    ):
        raise GridMismatchError("spectra must share an identical u grid")
    u = spectrum_m.u_values
    if (u <= 1.0).any():
        raise InvalidArgumentError("lemma check requires u > 1")
    if epsilon <= 0:
        raise InvalidArgumentError("epsilon must be positive")
    envelope = epsilon * u ** ((alpha * alpha - 1.0) / 2.0)
    diff = np.abs(spectrum_m.values - spectrum_0.values)
    ratios = diff / envelope
    bad = diff >= envelope
    return Lemma22Report(violating_u=tuple(float(x) for x in u[bad]), max_ratio=float(ratios.max()))


def spectrum_to_csv(spectrum, stream):
    """Dump a spectrum as `u,re,im,abs` rows."""
    stream.write("u,re,im,abs\n")
    for u, v in zip(spectrum.u_values, spectrum.values):
        stream.write(f"{float(u)!r},{float(v.real)!r},{float(v.imag)!r},{float(abs(v))!r}\n")


def fit_to_dict(fit):
    return {
        "exponent": fit.exponent,
        "intercept": fit.intercept,
        "u_min": fit.u_min,
        "r_squared": fit.r_squared,
        "n_points": fit.n_points,
    }


def assert_mass_bound(spectrum, measure, rtol=1e-9):
    """|mu-hat(u)| <= total mass, up to rounding slack."""
    mass = total_mass(measure)
    return bool((np.abs(spectrum.values) <= mass * (1.0 + rtol)).all())
