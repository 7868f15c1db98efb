# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid-scan kernels.

Flat C loops over (candidate x element) with no temporaries; the numpy
fallback in ``_numpy.py`` materialises the full matrix instead.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, log, sqrt

cnp.import_array()

cdef double CENTS = 1200.0 / 0.6931471805599453  # 1200 / ln 2


def harmonic_deviation_scan(object freqs, object weights, object f0_grid):
    """Weighted RMS cent deviation from the nearest harmonic, per candidate f0."""
    cdef double[::1] f = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double[::1] g = np.ascontiguousarray(f0_grid, dtype=np.float64)
    cdef Py_ssize_t nf = f.shape[0], ng = g.shape[0]
    out_arr = np.empty(ng, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double wsum = 0.0, acc, ratio, n, dev
    for j in range(nf):
        wsum += w[j]
    with nogil:
        for i in range(ng):
            acc = 0.0
            for j in range(nf):
                ratio = f[j] / g[i]
                n = ratio + 0.5
                n = <double>(<long long>n)
                if n < 1.0:
                    n = 1.0
                dev = CENTS * log(ratio / n)
                acc += w[j] * dev * dev
            out[i] = sqrt(acc / wsum)
    return out_arr


def gcd_deviation_scan(object spacings, object g_grid):
    """Per-candidate max and RMS cent deviation of spacings from multiples of g."""
    cdef double[::1] s = np.ascontiguousarray(spacings, dtype=np.float64)
    cdef double[::1] g = np.ascontiguousarray(g_grid, dtype=np.float64)
    cdef Py_ssize_t ns = s.shape[0], ng = g.shape[0]
    max_arr = np.empty(ng, dtype=np.float64)
    rms_arr = np.empty(ng, dtype=np.float64)
    cdef double[::1] mx = max_arr
    cdef double[::1] rm = rms_arr
    cdef Py_ssize_t i, j
    cdef double acc, worst, ratio, n, dev
    with nogil:
        for i in range(ng):
            acc = 0.0
            worst = 0.0
            for j in range(ns):
                ratio = s[j] / g[i]
                n = ratio + 0.5
                n = <double>(<long long>n)
                if n < 1.0:
                    n = 1.0
                dev = fabs(CENTS * log(ratio / n))
                acc += dev * dev
                if dev > worst:
                    worst = dev
            mx[i] = worst
            rm[i] = sqrt(acc / ns)
    return max_arr, rms_arr
