"""Power spectra, spectral smoothing and discrete partial extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.signal import find_peaks, get_window

from multiphon.errors import ConfigurationError, InsufficientDataError
from multiphon.tones import Partial, Spectrum

# Cosine-taper windows accepted for analysis.  blackmanharris is the default:
# its -92 dB sidelobes keep window leakage below the partial floor.
WINDOW_SHAPES = ("hann", "hamming", "blackman", "blackmanharris", "nuttall", "tukey")

GAUSSIAN_FWHM = 2.0 * np.sqrt(2.0 * np.log(2.0))  # ~2.355 sigma per FWHM


@dataclass(frozen=True)
class WindowConfig:
    """STFT frame parameters.

    ``window_length`` is in samples (power of two, >= 1024) and
    ``zero_pad_factor`` multiplies the FFT size for finer bin interpolation.
    """

    window_length: int = 8192
    hop: int = 4096
    zero_pad_factor: int = 4
    window_shape: str = "blackmanharris"

    def __post_init__(self):
        if self.window_length < 1024 or self.window_length & (self.window_length - 1):
            raise ConfigurationError(
                f"window_length must be a power of two >= 1024, got {self.window_length}")
        if self.zero_pad_factor < 1:
            raise ConfigurationError("zero_pad_factor must be >= 1")
        if self.hop < 1:
            raise ConfigurationError("hop must be >= 1")
        if self.window_shape not in WINDOW_SHAPES:
            raise ConfigurationError(
                f"window_shape must be one of {WINDOW_SHAPES}, got {self.window_shape!r}")

    @property
    def fft_length(self) -> int:
        return self.window_length * self.zero_pad_factor


@dataclass(frozen=True)
class PeakConfig:
    """Partial-extraction thresholds.

    ``relative_floor_db`` is measured down from the loudest bin; peaks below
    it are discarded.  ``min_prominence_db`` rejects shoulder bumps and
    ``max_partials`` caps the list at the loudest entries.
    """

    relative_floor_db: float = 60.0
    min_prominence_db: float = 6.0
    max_partials: int = 64

    def __post_init__(self):
        if self.relative_floor_db <= 0:
            raise ConfigurationError("relative_floor_db must be positive")
        if self.max_partials < 1:
            raise ConfigurationError("max_partials must be >= 1")


def compute_power_spectrum(samples: np.ndarray, rate: float,
                           cfg: WindowConfig | None = None,
                           average_frames: bool = False) -> Spectrum:
    """One-sided power spectrum of an audio frame.

    The spectrum is scaled so that its total power equals the energy of the
    windowed signal (Parseval).  With ``average_frames`` the power spectra of
    all full hops are averaged; by default only the first window is analysed.

    Raises InsufficientDataError when fewer than ``window_length`` samples
    are supplied.
    """
    if cfg is None:
        cfg = WindowConfig()
    samples = np.asarray(samples, dtype=np.float64)
    if rate <= 0:
        raise ConfigurationError(f"sample rate must be positive, got {rate}")
    if len(samples) < cfg.window_length:
        raise InsufficientDataError(
            f"need at least {cfg.window_length} samples, got {len(samples)}")

    window = get_window(cfg.window_shape, cfg.window_length, fftbins=True)
    nfft = cfg.fft_length

    if average_frames:
        starts = range(0, len(samples) - cfg.window_length + 1, cfg.hop)
    else:
        starts = (0,)
    acc = np.zeros(nfft // 2 + 1)
    count = 0
    for start in starts:
        frame = samples[start : start + cfg.window_length] * window
        spec = np.abs(np.fft.rfft(frame, nfft)) ** 2
        # one-sided Parseval scaling: total bin power == windowed-frame energy
        spec *= 2.0 / nfft
        spec[0] /= 2.0
        if nfft % 2 == 0:
            spec[-1] /= 2.0
        acc += spec
        count += 1
    acc /= count

    freqs = np.fft.rfftfreq(nfft, 1.0 / rate)
    return Spectrum(freqs, acc, float(rate), cfg.window_length, "raw")


def smooth_spectrum(spectrum: Spectrum, bandwidth_hz: float) -> Spectrum:
    """Gaussian smoothing over linear frequency.

    ``bandwidth_hz`` is the kernel FWHM and must exceed the bin spacing.  The
    kernel is normalised, so total power is conserved; edge bins replicate
    (a flat spectrum stays flat).
    """
    spacing = spectrum.bin_spacing
    if spacing <= 0:
        raise ConfigurationError("spectrum has no usable bin spacing")
    steps = np.diff(spectrum.bin_frequencies)
    if np.max(np.abs(steps - spacing)) > 1e-6 * spacing:
        raise ConfigurationError("smoothing requires uniformly spaced bins")
    if bandwidth_hz <= spacing:
        raise ConfigurationError(
            f"smoothing bandwidth {bandwidth_hz} Hz must exceed bin spacing {spacing:.3f} Hz")
    sigma_bins = (bandwidth_hz / GAUSSIAN_FWHM) / spacing
    smoothed = gaussian_filter1d(spectrum.bin_powers, sigma_bins, mode="nearest")
    return spectrum.replace(bin_powers=smoothed, kind="smoothed")


def _parabolic_refine(values: np.ndarray, index: int) -> tuple[float, float]:
    """Vertex (offset, value) of the parabola through three points around a peak."""
    if index <= 0 or index >= len(values) - 1:
        return 0.0, float(values[index])
    left, mid, right = values[index - 1], values[index], values[index + 1]
    denom = left - 2.0 * mid + right
    if denom == 0.0:
        return 0.0, float(mid)
    offset = 0.5 * (left - right) / denom
    value = mid - 0.25 * (left - right) * offset
    return float(offset), float(value)


def extract_partials(spectrum: Spectrum, cfg: PeakConfig | None = None,
                     refine_on: Spectrum | None = None) -> list[Partial]:
    """Pick spectral peaks and refine them to discrete partials.

    Local maxima above ``max - relative_floor_db`` with at least
    ``min_prominence_db`` prominence are kept; frequency and power are
    refined by parabolic interpolation over log power.  The result is sorted
    by ascending frequency, at most ``max_partials`` entries (loudest win).
    An empty spectrum region yields an empty list, not an error.

    When ``refine_on`` is given (a spectrum on the same bin grid, typically
    the raw spectrum underlying a weighted one), peak selection still runs on
    ``spectrum`` but the parabolic refinement uses ``refine_on``.  A weighted
    spectrum's steep low-frequency gain slope tilts peak lobes and would bias
    interpolated frequencies by whole hertz down there; the unweighted lobe
    is symmetric.  Reported powers stay on ``spectrum``'s scale.
    """
    if cfg is None:
        cfg = PeakConfig()
    powers = spectrum.bin_powers
    if len(powers) == 0 or not np.any(powers > 0):
        return []

    db = 10.0 * np.log10(np.maximum(powers, np.max(powers) * 1e-30))
    floor = np.max(db) - cfg.relative_floor_db
    peaks, _ = find_peaks(db, height=floor, prominence=cfg.min_prominence_db)
    if len(peaks) == 0:
        return []

    refine_db = db
    if refine_on is not None:
        if len(refine_on) != len(spectrum):
            raise ConfigurationError("refine_on must share the spectrum's bin grid")
        ref_powers = refine_on.bin_powers
        refine_db = 10.0 * np.log10(np.maximum(ref_powers, np.max(ref_powers) * 1e-30))

    refined = []
    spacing = spectrum.bin_spacing
    for k in peaks:
        offset, peak_db = _parabolic_refine(refine_db, int(k))
        freq = spectrum.bin_frequencies[k] + offset * spacing
        if freq <= 0:
            continue
        if refine_on is not None:
            # translate the refined level back to the selection spectrum's
            # scale through the local per-bin gain
            peak_db += db[k] - refine_db[k]
        refined.append(Partial(float(freq), float(10.0 ** (peak_db / 10.0))))

    refined.sort(key=lambda p: p.power, reverse=True)
    refined = refined[: cfg.max_partials]
    refined.sort(key=lambda p: p.frequency)
    return refined


def spectrum_to_csv(spectrum: Spectrum) -> str:
    """Render a spectrum as ``freq_hz,power_db`` CSV text."""
    lines = ["freq_hz,power_db"]
    for freq, power in zip(spectrum.bin_frequencies, spectrum.bin_powers):
        db = 10.0 * np.log10(power) if power > 0 else float("-inf")
        lines.append(f"{freq!r},{db!r}")
    return "\n".join(lines) + "\n"


def spectrum_to_json(spectrum: Spectrum) -> str:
    import json

    return json.dumps({
        "kind": spectrum.kind,
        "sample_rate": spectrum.sample_rate,
        "window_length": spectrum.window_length,
        "bin_frequencies_hz": [float(f) for f in spectrum.bin_frequencies],
        "bin_powers": [float(p) for p in spectrum.bin_powers],
    }, sort_keys=True)
