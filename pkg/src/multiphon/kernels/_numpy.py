"""Vectorised numpy fallback for the grid-scan kernels.

Semantics must match ``_native.pyx`` bit-for-bit apart from floating-point
summation order; the backend equivalence test pins both to 1e-9.
"""

import numpy as np

_CENTS = 1200.0 / np.log(2.0)


def harmonic_deviation_scan(freqs, weights, f0_grid):
    """Weighted RMS cent deviation from the nearest harmonic, per candidate f0.

    For each candidate ``g`` the deviation of partial ``f`` is the interval in
    cents between ``f`` and ``n*g`` where ``n = max(1, round(f/g))``.  Returns
    an array of sqrt(sum(w * dev^2) / sum(w)) values, one per candidate.
    """
    freqs = np.asarray(freqs, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    f0_grid = np.asarray(f0_grid, dtype=np.float64)
    ratio = freqs[None, :] / f0_grid[:, None]
    # round-half-up, matching the compiled backend (np.rint rounds half-even)
    n = np.maximum(np.floor(ratio + 0.5), 1.0)
    dev = _CENTS * np.log(ratio / n)
    wsum = weights.sum()
    return np.sqrt((weights[None, :] * dev * dev).sum(axis=1) / wsum)


def gcd_deviation_scan(spacings, g_grid):
    """Per-candidate max and RMS cent deviation of spacings from multiples of g.

    The deviation of spacing ``s`` against candidate ``g`` is the interval in
    cents between ``s`` and ``n*g`` with ``n = max(1, round(s/g))``.  Returns
    ``(max_dev, rms_dev)`` arrays over the candidate grid.
    """
    spacings = np.asarray(spacings, dtype=np.float64)
    g_grid = np.asarray(g_grid, dtype=np.float64)
    ratio = spacings[None, :] / g_grid[:, None]
    n = np.maximum(np.floor(ratio + 0.5), 1.0)
    dev = np.abs(_CENTS * np.log(ratio / n))
    return dev.max(axis=1), np.sqrt((dev * dev).mean(axis=1))
