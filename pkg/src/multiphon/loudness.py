"""Equal-loudness weighting of power spectra.

The weighting follows the ISO 226 equal-loudness contours.  The standard
tabulates three frequency-dependent parameters (exponent alpha_f, transfer
level L_U and hearing threshold T_f) at 29 third-octave anchor frequencies
from 20 Hz to 12.5 kHz; the sound pressure level of the N-phon contour is

    A    = 4.47e-3 * (10^(0.025*N) - 1.15)
    B(f) = (0.4 * 10^((T_f + L_U)/10 - 9)) ^ alpha_f
    SPL  = 10/alpha_f * log10(A + B) - L_U + 94       [dB]

Between anchors the SPL curve is interpolated with a monotone cubic (PCHIP)
over log-frequency.  The weighting gain applied to a power spectrum is

    gain(f) = 10 ^ ((N - SPL(f)) / 10)   normalised so gain(1 kHz) = 1,

i.e. spectral regions that need a higher SPL to sound equally loud are
attenuated.  Bins outside the tabulated [20, 12500] Hz domain are set to
zero rather than extrapolated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from multiphon.errors import ConfigurationError
from multiphon.tones import Spectrum

# ISO 226 tabulated parameters at the 29 standard anchor frequencies.
ISO226_FREQUENCIES = np.array([
    20.0, 25.0, 31.5, 40.0, 50.0, 63.0, 80.0, 100.0, 125.0, 160.0, 200.0,
    250.0, 315.0, 400.0, 500.0, 630.0, 800.0, 1000.0, 1250.0, 1600.0,
    2000.0, 2500.0, 3150.0, 4000.0, 5000.0, 6300.0, 8000.0, 10000.0, 12500.0,
])
ISO226_ALPHA = np.array([
    0.532, 0.506, 0.480, 0.455, 0.432, 0.409, 0.387, 0.367, 0.349, 0.330,
    0.315, 0.301, 0.288, 0.276, 0.267, 0.259, 0.253, 0.250, 0.246, 0.244,
    0.243, 0.243, 0.243, 0.242, 0.242, 0.245, 0.254, 0.271, 0.301,
])
ISO226_LU = np.array([
    -31.6, -27.2, -23.0, -19.1, -15.9, -13.0, -10.3, -8.1, -6.2, -4.5,
    -3.1, -2.0, -1.1, -0.4, 0.0, 0.3, 0.5, 0.0, -2.7, -4.1,
    -1.0, 1.7, 2.5, 1.2, -2.1, -7.1, -11.2, -10.7, -3.1,
])
ISO226_TF = np.array([
    78.5, 68.7, 59.5, 51.1, 44.0, 37.5, 31.5, 26.5, 22.1, 17.9,
    14.4, 11.4, 8.6, 6.2, 4.4, 3.0, 2.2, 2.4, 3.5, 1.7,
    -1.3, -4.2, -6.0, -5.4, -1.5, 6.0, 12.6, 13.9, 12.3,
])


def iso226_spl(phon: float, frequencies: np.ndarray | None = None) -> np.ndarray:
    """SPL of the ``phon`` equal-loudness contour at the anchor frequencies
    (or at given anchor-subset frequencies, which must be tabulated)."""
    if not 0.0 <= phon <= 90.0:
        raise ConfigurationError(f"phon level {phon} outside the tabulated range [0, 90]")
    a = 4.47e-3 * (10.0 ** (0.025 * phon) - 1.15)
    b = (0.4 * 10.0 ** ((ISO226_TF + ISO226_LU) / 10.0 - 9.0)) ** ISO226_ALPHA
    spl = (10.0 / ISO226_ALPHA) * np.log10(a + b) - ISO226_LU + 94.0
    if frequencies is None:
        return spl
    idx = np.searchsorted(ISO226_FREQUENCIES, frequencies)
    if not np.allclose(ISO226_FREQUENCIES[idx], frequencies):
        raise ConfigurationError("iso226_spl evaluates at tabulated anchor frequencies only")
    return spl[idx]


@dataclass(frozen=True)
class LoudnessContour:
    """An equal-loudness contour sampled at anchor frequencies.

    ``anchor_frequencies`` must be ascending and cover [20, 12500] Hz;
    ``contour_spl`` holds the SPL in dB needed at each anchor to match the
    loudness of a ``phon_level`` dB tone at 1 kHz.
    """

    phon_level: float = 50.0
    anchor_frequencies: np.ndarray = field(default=None, repr=False)
    contour_spl: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.anchor_frequencies is None:
            object.__setattr__(self, "anchor_frequencies", ISO226_FREQUENCIES.copy())
            object.__setattr__(self, "contour_spl", iso226_spl(self.phon_level))
        freqs = np.asarray(self.anchor_frequencies, dtype=np.float64)
        spl = np.asarray(self.contour_spl, dtype=np.float64)
        object.__setattr__(self, "anchor_frequencies", freqs)
        object.__setattr__(self, "contour_spl", spl)
        if freqs.shape != spl.shape or freqs.ndim != 1:
            raise ConfigurationError("anchor and SPL arrays must be 1-d and equal length")
        if not np.all(np.diff(freqs) > 0):
            raise ConfigurationError("anchor frequencies must be ascending")
        if freqs[0] > 20.0 or freqs[-1] < 12500.0:
            raise ConfigurationError("contour must cover [20, 12500] Hz")
        freqs.setflags(write=False)
        spl.setflags(write=False)

    def gain(self, frequencies: np.ndarray) -> np.ndarray:
        """Linear power gain per frequency: 1.0 at 1 kHz, 0.0 outside the domain."""
        freqs = np.asarray(frequencies, dtype=np.float64)
        interp = PchipInterpolator(np.log(self.anchor_frequencies), self.contour_spl)
        spl_1k = float(interp(np.log(1000.0)))
        inside = (freqs >= self.anchor_frequencies[0]) & (freqs <= self.anchor_frequencies[-1])
        gains = np.zeros_like(freqs)
        spl = interp(np.log(np.where(inside, freqs, 1000.0)))
        gains[inside] = 10.0 ** ((spl_1k - spl[inside]) / 10.0)
        return gains


def apply_equal_loudness_weighting(spectrum: Spectrum,
                                   contour: LoudnessContour | None = None) -> Spectrum:
    """Weight a raw power spectrum by the equal-loudness contour gain.

    The gain is multiplicative per bin and normalised to exactly 0 dB at
    1 kHz; bins outside the contour domain are floored to zero power.
    """
    if contour is None:
        contour = LoudnessContour()
    if spectrum.kind != "raw":
        raise ConfigurationError(f"weighting expects a raw spectrum, got {spectrum.kind!r}")
    gains = contour.gain(spectrum.bin_frequencies)
    return spectrum.replace(bin_powers=spectrum.bin_powers * gains, kind="weighted")
