"""Tone generators and additive resynthesis.

Every generator is deterministic for a given spec and seed, peak-normalises
to -3 dBFS, and fails loudly on Nyquist violations instead of aliasing.
The waveshaper used for distortion is an odd-symmetric tanh stage, so
even-order products appear only when the asymmetry flag is set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from multiphon.errors import InvalidToneSpecError
from multiphon.tones import Partial

PEAK_DBFS = -3.0
_PEAK_LINEAR = 10.0 ** (PEAK_DBFS / 20.0)

TONE_KINDS = ("harmonic", "odd-harmonic", "power-chord", "fm", "partials")

# highest intended partial must leave this much headroom below Nyquist so
# that waveshaping products stay clean
NYQUIST_GUARD = 3.0


def _normalize(samples: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(samples))
    if peak == 0.0:
        return samples
    return samples * (_PEAK_LINEAR / peak)


def _time_axis(duration: float, rate: float) -> np.ndarray:
    if duration <= 0:
        raise InvalidToneSpecError(f"duration must be positive, got {duration}")
    if rate <= 0:
        raise InvalidToneSpecError(f"sample rate must be positive, got {rate}")
    return np.arange(int(round(duration * rate))) / rate


def _guard_nyquist(highest_hz: float, rate: float, *, expanded: bool) -> None:
    limit = rate / 2.0
    margin = NYQUIST_GUARD if expanded else 1.0
    if highest_hz * margin >= limit:
        raise InvalidToneSpecError(
            f"highest partial {highest_hz:.1f} Hz (x{margin:g} guard) exceeds "
            f"Nyquist {limit:.1f} Hz")


def waveshape(samples: np.ndarray, drive: float, asymmetry: float = 0.0) -> np.ndarray:
    """Saturating tanh waveshaper.

    ``drive`` 0 bypasses the stage.  A nonzero ``asymmetry`` biases the
    transfer curve, introducing even-order intermodulation products.
    """
    if drive < 0:
        raise InvalidToneSpecError(f"drive must be >= 0, got {drive}")
    if drive == 0:
        return samples
    shaped = np.tanh(drive * (samples + asymmetry)) - math.tanh(drive * asymmetry)
    return shaped / math.tanh(drive)


@dataclass(frozen=True)
class PartialSet:
    """Explicit additive description: (frequency, power, phase) triples."""

    partials: tuple[tuple[float, float, float], ...]

    @classmethod
    def from_partials(cls, partials: list[Partial], phases=None) -> "PartialSet":
        if phases is None:
            phases = [0.0] * len(partials)
        return cls(tuple((p.frequency, p.power, ph) for p, ph in zip(partials, phases)))


def resynthesize_partials(ps: PartialSet, duration: float, rate: float) -> np.ndarray:
    """Sum of sinusoids at the given frequencies, powers and phases.

    Power is linear; amplitudes are its square root.  An empty set gives
    silence.  Frequencies at or above Nyquist are rejected.
    """
    t = _time_axis(duration, rate)
    if not ps.partials:
        return np.zeros_like(t)
    out = np.zeros_like(t)
    for freq, power, phase in ps.partials:
        if freq >= rate / 2.0:
            raise InvalidToneSpecError(f"partial at {freq} Hz is above Nyquist")
        if freq <= 0:
            raise InvalidToneSpecError(f"partial frequency must be positive, got {freq}")
        if power < 0:
            raise InvalidToneSpecError(f"partial power must be >= 0, got {power}")
        out += math.sqrt(power) * np.cos(2.0 * math.pi * freq * t + phase)
    return _normalize(out)


def _rolloff_amplitudes(harmonics: np.ndarray, rolloff_db_per_oct: float) -> np.ndarray:
    # amplitude rolloff per octave above the first partial
    return 10.0 ** (-rolloff_db_per_oct * np.log2(harmonics) / 20.0)


def generate_harmonic_tone(f0: float, n: int, rolloff_db_per_oct: float = 3.0,
                           duration: float = 1.0, rate: float = 48000.0,
                           phases: np.ndarray | None = None) -> np.ndarray:
    """Harmonic complex tone: partials at exactly k*f0 for k = 1..n."""
    if n < 1:
        raise InvalidToneSpecError(f"harmonic count must be >= 1, got {n}")
    if f0 <= 0:
        raise InvalidToneSpecError(f"f0 must be positive, got {f0}")
    _guard_nyquist(n * f0, rate, expanded=False)
    t = _time_axis(duration, rate)
    k = np.arange(1, n + 1)
    amps = _rolloff_amplitudes(k.astype(float), rolloff_db_per_oct)
    if phases is None:
        phases = np.zeros(n)
    out = np.zeros_like(t)
    for kk, amp, ph in zip(k, amps, phases):
        out += amp * np.cos(2.0 * math.pi * kk * f0 * t + ph)
    return _normalize(out)


def generate_odd_harmonic_tone(f0: float, n_odd: int, rolloff_db_per_oct: float = 3.0,
                               duration: float = 1.0, rate: float = 48000.0,
                               ) -> np.ndarray:
    """Tone with odd harmonics only: partials at (2k-1)*f0, k = 1..n_odd."""
    if n_odd < 1:
        raise InvalidToneSpecError(f"odd-harmonic count must be >= 1, got {n_odd}")
    if f0 <= 0:
        raise InvalidToneSpecError(f"f0 must be positive, got {f0}")
    _guard_nyquist((2 * n_odd - 1) * f0, rate, expanded=False)
    t = _time_axis(duration, rate)
    k = 2 * np.arange(1, n_odd + 1) - 1
    amps = _rolloff_amplitudes(k.astype(float), rolloff_db_per_oct)
    out = np.zeros_like(t)
    for kk, amp in zip(k, amps):
        out += amp * np.cos(2.0 * math.pi * kk * f0 * t)
    return _normalize(out)


FIFTH_RATIO = 1.5
OCTAVE_RATIO = 2.0


def generate_power_chord(root: float, add_octave: bool = False, drive: float = 2.0,
                         duration: float = 1.0, rate: float = 48000.0,
                         asymmetry: float = 0.0) -> np.ndarray:
    """Root + perfect fifth (3/2), optional octave, through the waveshaper.

    With drive > 0 intermodulation creates combination tones; the strongest
    low product lands at root/2 (the missing fundamental of the chord).
    """
    if root <= 0:
        raise InvalidToneSpecError(f"root must be positive, got {root}")
    highest = root * (OCTAVE_RATIO if add_octave else FIFTH_RATIO)
    _guard_nyquist(highest, rate, expanded=drive > 0)
    t = _time_axis(duration, rate)
    out = np.sin(2.0 * math.pi * root * t) + np.sin(2.0 * math.pi * root * FIFTH_RATIO * t)
    if add_octave:
        out += np.sin(2.0 * math.pi * root * OCTAVE_RATIO * t)
    return _normalize(waveshape(out / np.max(np.abs(out)), drive, asymmetry))


def generate_fm_tone(carrier: float, modulator: float, index: float = 2.0,
                     drive: float = 0.0, duration: float = 1.0,
                     rate: float = 48000.0, asymmetry: float = 0.0) -> np.ndarray:
    """Frequency-modulated sinusoid, optionally waveshaped.

    The linear (drive 0) spectrum has components at carrier +/- k*modulator
    with Bessel-weighted amplitudes.
    """
    if carrier <= 0 or modulator <= 0:
        raise InvalidToneSpecError("carrier and modulator must be positive")
    if index < 0:
        raise InvalidToneSpecError(f"index must be >= 0, got {index}")
    _guard_nyquist(carrier + (index + 2.0) * modulator, rate, expanded=drive > 0)
    t = _time_axis(duration, rate)
    out = np.cos(2.0 * math.pi * carrier * t + index * np.sin(2.0 * math.pi * modulator * t))
    return _normalize(waveshape(out, drive, asymmetry))


@dataclass(frozen=True)
class ToneSpec:
    """Declarative tone description, JSON-round-trippable.

    ``kind`` selects the generator; ``params`` carries its arguments.  The
    extra ``partials`` kind resynthesises an explicit component list (used
    for inharmonic sideband mixes that no closed-form generator covers).
    """

    kind: str
    params: dict = field(default_factory=dict)
    duration: float = 1.0
    rate: float = 48000.0
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in TONE_KINDS:
            raise InvalidToneSpecError(
                f"kind must be one of {TONE_KINDS}, got {self.kind!r}")


def render_tone(spec: ToneSpec) -> np.ndarray:
    """Render a ToneSpec to audio samples (mono float, -3 dBFS peak)."""
    kind, p = spec.kind, dict(spec.params)
    common = dict(duration=spec.duration, rate=spec.rate)
    try:
        if kind == "harmonic":
            phases = None
            if spec.seed is not None:
                rng = np.random.default_rng(spec.seed)
                phases = rng.uniform(0.0, 2.0 * math.pi, int(p["n"]))
            return generate_harmonic_tone(
                float(p["f0"]), int(p["n"]),
                float(p.get("rolloff_db_per_oct", 3.0)), phases=phases, **common)
        if kind == "odd-harmonic":
            return generate_odd_harmonic_tone(
                float(p["f0"]), int(p["n_odd"]),
                float(p.get("rolloff_db_per_oct", 3.0)), **common)
        if kind == "power-chord":
            return generate_power_chord(
                float(p["root"]), bool(p.get("add_octave", False)),
                float(p.get("drive", 2.0)), asymmetry=float(p.get("asymmetry", 0.0)),
                **common)
        if kind == "fm":
            return generate_fm_tone(
                float(p["carrier"]), float(p["modulator"]),
                float(p.get("index", 2.0)), float(p.get("drive", 0.0)),
                asymmetry=float(p.get("asymmetry", 0.0)), **common)
        # kind == "partials"
        triples = tuple(
            (float(item["frequency_hz"]), float(item["power"]),
             float(item.get("phase", 0.0)))
            for item in p["partials"])
        return resynthesize_partials(PartialSet(triples), **common)
    except KeyError as missing:
        raise InvalidToneSpecError(f"tone spec {kind!r} is missing field {missing}") from None


def tonespec_to_json(spec: ToneSpec) -> str:
    doc = {"kind": spec.kind, "params": spec.params,
           "duration": spec.duration, "rate": spec.rate}
    if spec.seed is not None:
        doc["seed"] = spec.seed
    return json.dumps(doc, sort_keys=True)


def tonespec_from_json(text: str) -> ToneSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise InvalidToneSpecError(f"tone spec is not valid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise InvalidToneSpecError("tone spec must be a JSON object")
    unknown = set(doc) - {"kind", "params", "duration", "rate", "seed"}
    if unknown:
        raise InvalidToneSpecError(f"unknown tone spec fields: {sorted(unknown)}")
    if "kind" not in doc:
        raise InvalidToneSpecError("tone spec is missing 'kind'")
    return ToneSpec(
        kind=doc["kind"],
        params=doc.get("params", {}),
        duration=float(doc.get("duration", 1.0)),
        rate=float(doc.get("rate", 48000.0)),
        seed=doc.get("seed"),
    )
