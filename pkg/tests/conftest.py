import numpy as np
import pytest

from multiphon.fixtures import FIXTURE_SPECS
from multiphon.pipeline import analyze_samples
from multiphon.synthesis import render_tone


@pytest.fixture(scope="session")
def rendered():
    """All fixture tones rendered once: name -> (samples, rate)."""
    return {name: (render_tone(spec), spec.rate) for name, spec in FIXTURE_SPECS.items()}


@pytest.fixture(scope="session")
def analyzed(rendered):
    """Full analysis reports for every fixture tone."""
    return {
        name: analyze_samples(samples, rate, sample_id=name)
        for name, (samples, rate) in rendered.items()
    }


def brute_force_acf_peak(samples, rate, f_min, f_max):
    """Independent time-domain autocorrelation oracle (no FFT shortcut).

    Returns (frequency, normalised_value) of the highest interior local
    maximum over the lag window, without interpolation.
    """
    x = np.asarray(samples, dtype=np.float64)
    x = x - x.mean()
    n = len(x)
    lag_min = max(1, int(np.ceil(rate / f_max)))
    lag_max = int(np.floor(rate / f_min))
    r0 = float(np.dot(x, x))
    r = np.array([np.dot(x[: n - lag], x[lag:]) for lag in range(lag_max + 2)]) / r0
    best_lag, best_val = None, -np.inf
    for lag in range(lag_min, lag_max + 1):
        if r[lag] >= r[lag - 1] and r[lag] > r[lag + 1] and r[lag] > best_val:
            best_lag, best_val = lag, r[lag]
    if best_lag is None:
        return None, 0.0
    return rate / best_lag, best_val
