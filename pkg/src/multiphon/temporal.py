"""Temporal-model pitch estimation.

Three estimators live here: waveform autocorrelation (the classic temporal
f0), autocorrelation of the complex envelope (modulation-rate analysis of
sideband-structured tones), and the approximate greatest common divisor of
adjacent-partial spacings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import hilbert

from multiphon.errors import ConfigurationError, InsufficientDataError, InvalidFrequencyError
from multiphon.kernels import gcd_deviation_scan
from multiphon.tones import Partial

DEFAULT_F0_SEARCH = (20.0, 2000.0)

F0_METHODS = ("autocorrelation", "envelope-autocorrelation", "spacing-gcd",
              "smoothed-spectrum")


@dataclass(frozen=True)
class F0Estimate:
    """A fundamental-frequency estimate with its salience in [0, 1].

    ``frequency`` is None for a no-estimate result (salience 0).
    """

    frequency: float | None
    salience: float
    method: str

    def __post_init__(self):
        if self.method not in F0_METHODS:
            raise ConfigurationError(f"unknown f0 method {self.method!r}")
        if not 0.0 <= self.salience <= 1.0:
            raise ConfigurationError(f"salience {self.salience} outside [0, 1]")

    @classmethod
    def none(cls, method: str) -> "F0Estimate":
        return cls(None, 0.0, method)


@dataclass(frozen=True)
class SpacingProfile:
    """Adjacent-partial frequency differences with robust centre statistics."""

    spacings: np.ndarray
    center: float       # median spacing, Hz
    dispersion: float   # median absolute deviation, Hz


def _check_search(search: tuple[float, float]) -> tuple[float, float]:
    f_min, f_max = float(search[0]), float(search[1])
    if not (0.0 < f_min < f_max):
        raise ConfigurationError(f"invalid search range [{f_min}, {f_max}]")
    return f_min, f_max


def _lag_window(n: int, rate: float, f_min: float, f_max: float) -> tuple[int, int]:
    lag_min = max(1, int(math.ceil(rate / f_max)))
    lag_max = int(math.floor(rate / f_min))
    if n < 2 * rate / f_min:
        raise InsufficientDataError(
            f"frame of {n} samples is shorter than two periods of {f_min} Hz at {rate} Hz")
    return lag_min, min(lag_max, n - 2)


def _refine_lag(curve: np.ndarray, lag: int) -> tuple[float, float]:
    left, mid, right = curve[lag - 1], curve[lag], curve[lag + 1]
    denom = left - 2.0 * mid + right
    if denom == 0.0:
        return float(lag), float(mid)
    offset = 0.5 * (left - right) / denom
    return lag + float(offset), float(mid - 0.25 * (left - right) * offset)


def _best_refined_peak(curve: np.ndarray, lag_min: int, lag_max: int,
                       ) -> tuple[float, float] | None:
    """Parabolic-refined (lag, value) of the strongest interior local maximum.

    Peaks are compared by their refined values: a short-lag peak sampled off
    its true top must not lose to a longer-lag peak that happens to land
    nearer a sample point.
    """
    seg = curve[lag_min - 1 : lag_max + 2]
    is_max = (seg[1:-1] >= seg[:-2]) & (seg[1:-1] > seg[2:])
    candidates = np.nonzero(is_max)[0] + lag_min
    if len(candidates) == 0:
        return None
    best = None
    for lag in candidates:
        refined = _refine_lag(curve, int(lag))
        if best is None or refined[1] > best[1]:
            best = refined
    return best


def _acf(x: np.ndarray) -> np.ndarray:
    """Energy-normalised autocorrelation (type II: divide by the zero lag)."""
    n = len(x)
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.abs(np.fft.rfft(x, nfft)) ** 2
    r = np.fft.irfft(spec, nfft)[:n]
    if r[0] <= 0:
        return np.zeros(n)
    return r / r[0]


def autocorrelation_f0(samples: np.ndarray, rate: float,
                       search: tuple[float, float] = DEFAULT_F0_SEARCH) -> F0Estimate:
    """Temporal f0: the highest autocorrelation peak beyond zero lag.

    The peak is searched over lags in [rate/f_max, rate/f_min], restricted to
    interior local maxima with positive correlation, and refined by parabolic
    interpolation over the lag axis.  Salience is the normalised peak value
    clipped to [0, 1].  Returns a no-estimate result when no positive peak
    exists in the window.
    """
    f_min, f_max = _check_search(search)
    x = np.asarray(samples, dtype=np.float64)
    lag_min, lag_max = _lag_window(len(x), rate, f_min, f_max)
    r = _acf(x - x.mean())
    peak = _best_refined_peak(r, lag_min, lag_max)
    if peak is None or peak[1] <= 0:
        return F0Estimate.none("autocorrelation")
    lag_refined, value = peak
    return F0Estimate(rate / lag_refined, float(np.clip(value, 0.0, 1.0)),
                      "autocorrelation")


def envelope_autocorrelation_f0(samples: np.ndarray, rate: float,
                                search: tuple[float, float]) -> F0Estimate:
    """Modulation-rate f0 from the magnitude of the complex autocorrelation.

    The analytic signal's autocorrelation magnitude discards the carrier
    phase, so a tone built of sidebands spaced ``m`` Hz apart peaks at lag
    1/m regardless of where the carrier sits.  An unmodulated sinusoid has a
    flat magnitude curve and yields a no-estimate result.
    """
    f_min, f_max = _check_search(search)
    x = np.asarray(samples, dtype=np.float64)
    lag_min, lag_max = _lag_window(len(x), rate, f_min, f_max)
    z = hilbert(x - x.mean())
    n = len(z)
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.abs(np.fft.fft(z, nfft)) ** 2
    r = np.abs(np.fft.ifft(spec)[:n])
    if r[0] <= 0:
        return F0Estimate.none("envelope-autocorrelation")
    r = r / r[0]
    peak = _best_refined_peak(r, lag_min, lag_max)
    if peak is None or peak[1] <= 0:
        return F0Estimate.none("envelope-autocorrelation")
    lag_refined, value = peak
    return F0Estimate(rate / lag_refined, float(np.clip(value, 0.0, 1.0)),
                      "envelope-autocorrelation")


def partial_spacings(partials: list[Partial]) -> SpacingProfile:
    """Adjacent-partial differences with median centre and MAD dispersion."""
    if len(partials) < 2:
        raise InsufficientDataError("spacing profile needs at least 2 partials")
    freqs = np.array([p.frequency for p in partials], dtype=np.float64)
    if np.any(np.diff(freqs) <= 0):
        raise InvalidFrequencyError("partials must be strictly ascending in frequency")
    spacings = np.diff(freqs)
    center = float(np.median(spacings))
    dispersion = float(np.median(np.abs(spacings - center)))
    return SpacingProfile(spacings, center, dispersion)


GCD_GRID_STEP_HZ = 0.01
GCD_MAX_SUBDIVISION = 8
_SLACK_ABS_CENTS = 0.5
_SLACK_REL = 0.05


def approximate_gcd(spacings: np.ndarray, tolerance_cents: float = 35.0) -> F0Estimate:
    """Approximate GCD of spacings: the divisor every spacing is an integer
    multiple of, within ``tolerance_cents``.

    Candidates on a dense grid in [min/8, min*1.05] are scored by their worst
    cent deviation.  Among candidates whose worst deviation fits the
    tolerance, the highest-frequency contiguous run is selected (ties between
    exact subdivisions resolve toward the larger divisor) and the
    minimum-RMS candidate inside the run seeds a closed-form refinement.
    When nothing fits, the best-effort candidate is returned; salience
    reports fit quality either way, as max(0, 1 - worst/tolerance).
    """
    s = np.asarray(spacings, dtype=np.float64)
    if len(s) == 0:
        raise InsufficientDataError("approximate_gcd needs at least one spacing")
    if np.any(s <= 0):
        raise InvalidFrequencyError("spacings must be positive")
    if tolerance_cents <= 0:
        raise ConfigurationError("tolerance_cents must be positive")

    smin = float(s.min())
    grid = np.arange(smin / GCD_MAX_SUBDIVISION, smin * 1.05, GCD_GRID_STEP_HZ)
    if len(grid) < 3:
        grid = np.linspace(smin / GCD_MAX_SUBDIVISION, smin * 1.05, 64)
    max_dev, rms_dev = gcd_deviation_scan(s, grid)

    fitting = np.nonzero(max_dev <= tolerance_cents)[0]
    if len(fitting):
        # highest-g contiguous run of fitting candidates
        breaks = np.nonzero(np.diff(fitting) > 1)[0]
        run_start = fitting[breaks[-1] + 1] if len(breaks) else fitting[0]
        run = np.arange(run_start, fitting[-1] + 1)
        rmin = rms_dev[run].min()
        slack = max(_SLACK_ABS_CENTS, _SLACK_REL * rmin)
        g = float(grid[run[rms_dev[run] <= rmin + slack].max()])
    else:
        best = np.nonzero(max_dev <= max_dev.min() + 1e-12)[0]
        g = float(grid[best.max()])

    # closed-form polish: with fixed multiples the cents objective is minimised
    # by the geometric mean of spacing/multiple
    for _ in range(3):
        n = np.maximum(np.floor(s / g + 0.5), 1.0)
        g = float(np.exp(np.mean(np.log(s / n))))

    final_max, _ = gcd_deviation_scan(s, np.array([g]))
    score = max(0.0, 1.0 - float(final_max[0]) / tolerance_cents)
    return F0Estimate(g, score, "spacing-gcd")
