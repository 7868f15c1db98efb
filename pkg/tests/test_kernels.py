"""Backend equivalence: the compiled kernels and the numpy fallback must
produce the same numbers on identical inputs."""

import os

import numpy as np
import pytest

from multiphon import kernels
from multiphon.kernels import _numpy as fallback

native = pytest.importorskip("multiphon.kernels._native",
                             reason="compiled extension not built")


@pytest.fixture(scope="module")
def workload():
    rng = np.random.default_rng(42)
    freqs = np.sort(rng.uniform(30.0, 6000.0, 48))
    weights = rng.uniform(1e-4, 1.0, 48)
    f0_grid = 20.0 * 2.0 ** (np.arange(7973) / 1200.0)
    spacings = np.sort(rng.uniform(30.0, 400.0, 9))
    g_grid = np.arange(spacings.min() / 8.0, spacings.min() * 1.05, 0.01)
    return freqs, weights, f0_grid, spacings, g_grid


@pytest.mark.skipif(bool(os.environ.get("MULTIPHON_PURE_PYTHON")),
                    reason="fallback forced via MULTIPHON_PURE_PYTHON")
def test_backend_is_native_when_built():
    assert kernels.BACKEND == "native"


def test_harmonic_scan_equivalence(workload):
    freqs, weights, f0_grid, _, _ = workload
    a = native.harmonic_deviation_scan(freqs, weights, f0_grid)
    b = fallback.harmonic_deviation_scan(freqs, weights, f0_grid)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-9)


def test_gcd_scan_equivalence(workload):
    _, _, _, spacings, g_grid = workload
    max_a, rms_a = native.gcd_deviation_scan(spacings, g_grid)
    max_b, rms_b = fallback.gcd_deviation_scan(spacings, g_grid)
    np.testing.assert_allclose(max_a, max_b, rtol=0, atol=1e-9)
    np.testing.assert_allclose(rms_a, rms_b, rtol=0, atol=1e-9)


def test_half_integer_ratio_agreement():
    # round-half-up boundary: both backends must pick the same harmonic
    freqs = np.array([150.0])
    weights = np.array([1.0])
    grid = np.array([100.0])  # ratio exactly 1.5
    a = native.harmonic_deviation_scan(freqs, weights, grid)
    b = fallback.harmonic_deviation_scan(freqs, weights, grid)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_pure_python_env_override(monkeypatch):
    import importlib
    import multiphon.kernels as pkg

    monkeypatch.setenv("MULTIPHON_PURE_PYTHON", "1")
    reloaded = importlib.reload(pkg)
    try:
        assert reloaded.BACKEND == "python"
    finally:
        monkeypatch.delenv("MULTIPHON_PURE_PYTHON")
        importlib.reload(pkg)
