"""Ingestion and aggregation of external monophonic pitch-tracker traces.

Traces arrive as ``time_s,freq_hz,confidence`` CSV.  Frames below the
voicing threshold are kept but marked unvoiced; all aggregation runs over
voiced frames only, confidence-weighted by default.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from multiphon.errors import FormatError, InsufficientDataError
from multiphon.harmonicity import HarmonicFit
from multiphon.perception import PerceptionAggregate, PitchAssociation, associate_perceived_pitch
from multiphon.tones import Partial, PitchName, freq_to_pitch, parse_pitch

TRACE_HEADER = ("time_s", "freq_hz", "confidence")
VOICING_THRESHOLD = 0.5
OCTAVE_JUMP_TOLERANCE_CENTS = 50.0


@dataclass(frozen=True)
class TraceFrame:
    time: float
    frequency: float
    confidence: float
    voiced: bool


@dataclass(frozen=True)
class TrackerTrace:
    tracker_name: str
    frames: tuple[TraceFrame, ...]

    @property
    def voiced_frames(self) -> tuple[TraceFrame, ...]:
        return tuple(f for f in self.frames if f.voiced)


def load_tracker_trace(source, tracker_name: str,
                       voicing_threshold: float = VOICING_THRESHOLD) -> TrackerTrace:
    """Read a tracker trace from CSV (path, file object, or text).

    Times must be non-decreasing and voiced frames must carry positive
    frequencies; violations raise FormatError naming the first offending row.
    """
    if hasattr(source, "read"):
        stream = source
    elif isinstance(source, str) and "\n" in source:
        stream = io.StringIO(source)
    else:
        stream = open(source, newline="")
    try:
        reader = csv.reader(stream)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TRACE_HEADER:
            raise FormatError(f"header must be exactly {','.join(TRACE_HEADER)}, got {header!r}")
        frames = []
        prev_time = None
        for row_index, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise FormatError(f"expected 3 fields, got {len(row)}", row=row_index)
            try:
                time, freq, conf = (float(cell) for cell in row)
            except ValueError:
                raise FormatError(f"non-numeric value in {row!r}", row=row_index) from None
            if prev_time is not None and time < prev_time:
                raise FormatError(f"time {time} decreases from {prev_time}", row=row_index)
            prev_time = time
            if not 0.0 <= conf <= 1.0:
                raise FormatError(f"confidence {conf} outside [0, 1]", row=row_index)
            voiced = conf >= voicing_threshold
            if conf > 0.0 and freq <= 0.0:
                raise FormatError(f"non-positive frequency {freq} with confidence {conf}",
                                  row=row_index)
            frames.append(TraceFrame(time, freq, conf, voiced))
        return TrackerTrace(tracker_name, tuple(frames))
    finally:
        if stream is not source and not isinstance(stream, io.StringIO):
            stream.close()


@dataclass(frozen=True)
class TraceMode:
    """One semitone bin of the aggregated distribution."""

    pitch: PitchName          # bin pitch with the mass-weighted mean cent offset
    mass: float               # fraction of (weighted) voiced mass in the bin
    mean_frequency_hz: float


@dataclass(frozen=True)
class TraceDistribution:
    tracker_name: str
    modes: tuple[TraceMode, ...]  # ranked by descending mass
    voiced_fraction: float


def aggregate_trace_distribution(trace: TrackerTrace,
                                 confidence_weighted: bool = True) -> TraceDistribution | None:
    """Histogram the voiced frames over semitone bins.

    Mass is confidence-weighted by default; each bin retains the weighted
    mean cent offset of its frames.  Returns None when the trace has no
    voiced frames (no-data).
    """
    voiced = trace.voiced_frames
    if not voiced:
        return None
    masses: dict[tuple[str, int], float] = {}
    cent_sums: dict[tuple[str, int], float] = {}
    freq_sums: dict[tuple[str, int], float] = {}
    for frame in voiced:
        weight = frame.confidence if confidence_weighted else 1.0
        pitch = freq_to_pitch(frame.frequency)
        key = (pitch.pitch_class, pitch.octave)
        masses[key] = masses.get(key, 0.0) + weight
        cent_sums[key] = cent_sums.get(key, 0.0) + weight * pitch.cents
        freq_sums[key] = freq_sums.get(key, 0.0) + weight * frame.frequency
    total = sum(masses.values())
    modes = []
    for key, mass in masses.items():
        mean_cents = cent_sums[key] / mass
        modes.append(TraceMode(
            pitch=PitchName(key[0], key[1], mean_cents),
            mass=mass / total,
            mean_frequency_hz=freq_sums[key] / mass,
        ))
    modes.sort(key=lambda m: (-m.mass, m.pitch.midi))
    return TraceDistribution(trace.tracker_name, tuple(modes),
                             voiced_fraction=len(voiced) / len(trace.frames))


@dataclass(frozen=True)
class OctaveJumpEvent:
    time: float
    from_pitch: PitchName
    to_pitch: PitchName
    interval_cents: float


def detect_octave_jumps(trace: TrackerTrace,
                        jump_tolerance_cents: float = OCTAVE_JUMP_TOLERANCE_CENTS,
                        ) -> list[OctaveJumpEvent]:
    """Octave jumps between consecutive voiced frames.

    An event fires when the interval lies within the tolerance of a nonzero
    multiple of 1200 cents; uniform transposition of the trace leaves the
    result unchanged.
    """
    voiced = trace.voiced_frames
    if len(voiced) < 2:
        raise InsufficientDataError("octave-jump detection needs at least 2 voiced frames")
    events = []
    for prev, cur in zip(voiced, voiced[1:]):
        interval = 1200.0 * np.log2(cur.frequency / prev.frequency)
        octaves = round(interval / 1200.0)
        if octaves != 0 and abs(interval - 1200.0 * octaves) <= jump_tolerance_cents:
            events.append(OctaveJumpEvent(
                time=cur.time,
                from_pitch=freq_to_pitch(prev.frequency),
                to_pitch=freq_to_pitch(cur.frequency),
                interval_cents=float(interval),
            ))
    return events


@dataclass(frozen=True)
class ModeComparison:
    pitch: str
    mass: float
    association: PitchAssociation


@dataclass(frozen=True)
class TrackerComparison:
    """Tracker distribution set against perception and harmonic analysis."""

    tracker_name: str
    modes: tuple[ModeComparison, ...]
    overlap: float | None  # fraction of tracker mass on listener-perceived pitches


def compare_distributions(trace_dist: TraceDistribution,
                          perception: PerceptionAggregate | None,
                          fit: HarmonicFit,
                          partials: list[Partial] | None = None,
                          ) -> TrackerComparison:
    """Associate each tracker mode with the tone and score listener overlap.

    Overlap is the fraction of tracker mass landing on pitches (class and
    octave) reported by at least one listener; None when no perception data
    is supplied.  Modes reuse the perceived-pitch association machinery, so
    tracker output and listener reports are measured with the same ruler.
    """
    perceived: set[tuple[str, int]] = set()
    if perception is not None:
        for bin_ in perception.bins:
            for text in bin_.pitches:
                name = parse_pitch(text)  # bin labels are cent-free semitone names
                perceived.add((name.pitch_class, name.octave))

    modes = []
    overlap_mass = 0.0
    for mode in trace_dist.modes:
        assoc = associate_perceived_pitch(mode.pitch, fit, partials)
        modes.append(ModeComparison(mode.pitch.as_text(), mode.mass, assoc))
        if (mode.pitch.pitch_class, mode.pitch.octave) in perceived:
            overlap_mass += mode.mass
    overlap = overlap_mass if perception is not None else None
    return TrackerComparison(trace_dist.tracker_name, tuple(modes), overlap)
