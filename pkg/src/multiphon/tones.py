"""Core tone-domain types and frequency/pitch-name arithmetic.

Pitch names use scientific pitch notation (C4 is middle C) with a signed
cent offset in [-50, +50).  The tuning reference defaults to A4 = 440 Hz and
can be overridden per call.  All types are immutable and safe to share
between threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from multiphon.errors import InvalidFrequencyError, InvalidPitchError

A4_HZ = 440.0

PITCH_CLASSES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")
_CLASS_INDEX = {name: i for i, name in enumerate(PITCH_CLASSES)}

# `C-1-20ct` parses as class C, octave -1, offset -20 cents; the mandatory
# `ct` suffix keeps the negative octave unambiguous.
_PITCH_RE = re.compile(
    r"^([A-G](?:#)?)(-?\d+)(?:([+-]\d+(?:\.\d+)?)ct)?$"
)


def _check_frequency(value: float, name: str = "frequency") -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise InvalidFrequencyError(f"{name} must be finite and positive, got {value!r}")
    return value


@dataclass(frozen=True)
class PitchName:
    """Equal-temperament pitch class + octave with a signed cent offset.

    Invariants: ``pitch_class`` is one of the twelve sharp-spelled classes,
    ``cents`` lies in [-50, +50).
    """

    pitch_class: str
    octave: int
    cents: float = 0.0

    def __post_init__(self):
        if self.pitch_class not in _CLASS_INDEX:
            raise InvalidPitchError(f"unknown pitch class {self.pitch_class!r}")
        if not (-50.0 <= self.cents < 50.0):
            raise InvalidPitchError(f"cent offset {self.cents} outside [-50, +50)")

    @property
    def midi(self) -> int:
        """Integer MIDI note number of the named pitch (A4 = 69)."""
        return 12 * (self.octave + 1) + _CLASS_INDEX[self.pitch_class]

    def as_text(self, decimals: int = 1) -> str:
        """Render as ``<class><octave>[+/-<cents>ct]``, e.g. ``A#3+21.5ct``."""
        base = f"{self.pitch_class}{self.octave}"
        cents = round(self.cents, decimals)
        if cents == 0.0:
            return base
        return f"{base}{cents:+.{decimals}f}ct"

    def sort_key(self) -> tuple[int, float]:
        return (self.midi, self.cents)

    def __str__(self) -> str:
        return self.as_text()


def parse_pitch(text: str) -> PitchName:
    """Parse the ``A#3+21.5ct`` text form; accepts the ♯ glyph for #."""
    cleaned = text.strip().replace("♯", "#")
    m = _PITCH_RE.match(cleaned)
    if m is None:
        raise InvalidPitchError(f"cannot parse pitch name {text!r}")
    klass, octave, cents = m.group(1), int(m.group(2)), m.group(3)
    return PitchName(klass, octave, float(cents) if cents else 0.0)


def pitch_to_freq(pitch: PitchName, reference: float = A4_HZ) -> float:
    """Frequency in Hz of a named pitch under the given A4 reference."""
    reference = _check_frequency(reference, "reference")
    total_cents = 100.0 * (pitch.midi - 69) + pitch.cents
    return reference * 2.0 ** (total_cents / 1200.0)


def freq_to_pitch(frequency: float, reference: float = A4_HZ) -> PitchName:
    """Nearest equal-temperament pitch with a signed cent offset in [-50, +50).

    An exact half-semitone resolves to the upper pitch name at -50 cents,
    which keeps the offset inside the half-open interval.
    """
    frequency = _check_frequency(frequency)
    reference = _check_frequency(reference, "reference")
    total_cents = 1200.0 * math.log2(frequency / reference)
    semis = math.floor(total_cents / 100.0 + 0.5)
    cents = total_cents - 100.0 * semis
    midi = 69 + semis
    return PitchName(PITCH_CLASSES[midi % 12], midi // 12 - 1, cents)


def cents_between(a: float, b: float) -> float:
    """Signed interval from ``a`` to ``b`` in cents: 1200 * log2(b / a)."""
    a = _check_frequency(a, "a")
    b = _check_frequency(b, "b")
    return 1200.0 * math.log2(b / a)


def fold_cents(interval_cents: float) -> float:
    """Fold an interval to the octave-equivalent offset in [-600, +600)."""
    c = interval_cents % 1200.0
    return c - 1200.0 if c >= 600.0 else c


@dataclass(frozen=True)
class Partial:
    """One spectral peak: interpolated frequency, linear power and, once a
    harmonic series has been fitted, the assigned harmonic index."""

    frequency: float
    power: float
    harmonic_index: int | None = None

    def __post_init__(self):
        _check_frequency(self.frequency)
        if self.power < 0:
            raise InvalidFrequencyError(f"partial power must be >= 0, got {self.power}")
        if self.harmonic_index is not None and self.harmonic_index < 1:
            raise InvalidPitchError(f"harmonic index must be >= 1, got {self.harmonic_index}")

    @property
    def power_db(self) -> float:
        return 10.0 * math.log10(self.power) if self.power > 0 else -math.inf


SPECTRUM_KINDS = ("raw", "weighted", "smoothed")


@dataclass(frozen=True)
class Spectrum:
    """Discrete power spectrum with its analysis metadata.

    ``bin_frequencies`` must be strictly ascending and the power array must
    be the same length with no negative entries.  ``kind`` records which
    processing stage produced the spectrum.
    """

    bin_frequencies: np.ndarray = field(repr=False)
    bin_powers: np.ndarray = field(repr=False)
    sample_rate: float
    window_length: int
    kind: str = "raw"

    def __post_init__(self):
        freqs = np.asarray(self.bin_frequencies, dtype=np.float64)
        powers = np.asarray(self.bin_powers, dtype=np.float64)
        object.__setattr__(self, "bin_frequencies", freqs)
        object.__setattr__(self, "bin_powers", powers)
        if self.kind not in SPECTRUM_KINDS:
            raise InvalidPitchError(f"unknown spectrum kind {self.kind!r}")
        if freqs.ndim != 1 or freqs.shape != powers.shape:
            raise InvalidFrequencyError("bin arrays must be 1-d and equal length")
        if len(freqs) >= 2 and not np.all(np.diff(freqs) > 0):
            raise InvalidFrequencyError("bin frequencies must be strictly ascending")
        if np.any(powers < 0):
            raise InvalidFrequencyError("bin powers must be non-negative")
        freqs.setflags(write=False)
        powers.setflags(write=False)

    def __len__(self) -> int:
        return len(self.bin_frequencies)

    @property
    def bin_spacing(self) -> float:
        if len(self.bin_frequencies) < 2:
            return 0.0
        return float(self.bin_frequencies[1] - self.bin_frequencies[0])

    @property
    def total_power(self) -> float:
        return float(np.sum(self.bin_powers))

    def replace(self, *, bin_powers: np.ndarray, kind: str) -> "Spectrum":
        return Spectrum(self.bin_frequencies, bin_powers, self.sample_rate,
                        self.window_length, kind)
