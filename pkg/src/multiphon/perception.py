"""Listening-report ingestion, certainty-weighted pitch counts, and
association of perceived pitches with analysed tone structure.

The association distance follows the figure protocol: 0 for the fundamental,
1 for an upper partial (assigned harmonic or salient unassigned partial),
plus 1 per octave transposition, searched up to two octaves either way.
Labels read ``f0``, ``h5``, ``h5-2`` (harmonic 5, two octaves below), or the
partial's pitch name for targets without a harmonic number.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from multiphon.errors import FormatError
from multiphon.harmonicity import HarmonicFit
from multiphon.tones import (Partial, PitchName, cents_between, freq_to_pitch,
                             parse_pitch, pitch_to_freq)

REPORT_HEADER = ("sample_id", "listener_id", "pitch", "certainty", "tuning")
TUNING_FLAGS = ("in-tune", "too-low", "too-high")

MATCH_TOLERANCE_CENTS = 50.0
LOW_REGISTER_LIMIT_HZ = 45.0
LOW_REGISTER_TOLERANCE_CENTS = 200.0
MAX_OCTAVE_SHIFT = 2


@dataclass(frozen=True)
class ListenerReport:
    """One perceived pitch from one listener for one sample."""

    sample_id: str
    listener_id: str
    pitch: PitchName
    certainty: float
    tuning: str = "in-tune"

    def __post_init__(self):
        if not 0.0 <= self.certainty <= 1.0:
            raise FormatError(f"certainty {self.certainty} outside [0, 1]")
        if self.tuning not in TUNING_FLAGS:
            raise FormatError(f"tuning flag must be one of {TUNING_FLAGS}, got {self.tuning!r}")


def load_reports(source) -> list[ListenerReport]:
    """Read listener reports from CSV (path, file object, or text).

    The header must match ``sample_id,listener_id,pitch,certainty,tuning``
    exactly.  Any malformed row raises FormatError carrying its 1-based data
    row index.
    """
    if hasattr(source, "read"):
        return _parse_reports(source)
    if isinstance(source, str) and "\n" in source:
        return _parse_reports(io.StringIO(source))
    with open(source, newline="") as fh:
        return _parse_reports(fh)


def _parse_reports(stream) -> list[ListenerReport]:
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != REPORT_HEADER:
        raise FormatError(
            f"header must be exactly {','.join(REPORT_HEADER)}, got {header!r}")
    reports = []
    for row_index, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(REPORT_HEADER):
            raise FormatError(f"expected {len(REPORT_HEADER)} fields, got {len(row)}",
                              row=row_index)
        sample_id, listener_id, pitch_text, certainty_text, tuning = (
            cell.strip() for cell in row)
        try:
            pitch = parse_pitch(pitch_text)
        except Exception as err:
            raise FormatError(f"bad pitch {pitch_text!r}: {err}", row=row_index) from None
        try:
            certainty = float(certainty_text)
        except ValueError:
            raise FormatError(f"certainty {certainty_text!r} is not a number",
                              row=row_index) from None
        try:
            reports.append(ListenerReport(sample_id, listener_id, pitch, certainty, tuning))
        except FormatError as err:
            raise FormatError(str(err), row=row_index) from None
    return reports


def weighted_pitch_count(reports: list[ListenerReport], sample_id: str) -> float | None:
    """Certainty-weighted number of perceived pitches for one sample.

    Each listener's certainties are summed, then the sums are averaged over
    the listeners who reported on the sample.  Returns None when the sample
    has no reports.
    """
    per_listener: dict[str, float] = {}
    for report in reports:
        if report.sample_id != sample_id:
            continue
        per_listener[report.listener_id] = (
            per_listener.get(report.listener_id, 0.0) + report.certainty)
    if not per_listener:
        return None
    return sum(per_listener.values()) / len(per_listener)


@dataclass(frozen=True)
class PitchAssociation:
    """Association of a perceived pitch with the analysed tone.

    ``distance_d`` is None (and ``target`` is "none") when nothing matches
    within two octave shifts.
    """

    pitch: PitchName
    target: str  # "f0" | "harmonic" | "partial" | "none"
    octave_shift: int = 0
    distance_d: int | None = None
    harmonic: int | None = None
    target_frequency_hz: float | None = None
    label: str = "none"


def _shift_suffix(shift: int) -> str:
    return f"{shift:+d}" if shift else ""


def _candidate_targets(fit: HarmonicFit, partials: list[Partial]):
    """(frequency, base_d, kind, harmonic, power, label_base) tuples."""
    assigned_index = {a.partial_index: a.harmonic for a in fit.assignments}
    fundamental_power = 0.0
    for a in fit.assignments:
        if a.harmonic == 1:
            fundamental_power = fit.partial_powers[a.partial_index]
    yield (fit.f0, 0, "f0", None, fundamental_power, "f0")
    for a in fit.assignments:
        if a.harmonic == 1:
            continue  # harmonic 1 is the fundamental target itself
        yield (fit.partial_frequencies[a.partial_index], 1, "harmonic",
               a.harmonic, fit.partial_powers[a.partial_index], f"h{a.harmonic}")
    for i, partial in enumerate(partials):
        if i in assigned_index:
            continue
        name = freq_to_pitch(partial.frequency).as_text(decimals=0)
        yield (partial.frequency, 1, "partial", None, partial.power, name)


def associate_perceived_pitch(pitch: PitchName, fit: HarmonicFit,
                              partials: list[Partial] | None = None,
                              match_tolerance_cents: float = MATCH_TOLERANCE_CENTS,
                              ) -> PitchAssociation:
    """Minimal-distance association of a perceived pitch.

    Targets are the fitted f0 (d=0), assigned harmonics and salient
    unassigned partials (d=1), each also tried at octave shifts up to +/-2
    adding 1 per octave.  Perceived pitches below 45 Hz use a widened
    200-cent window (auditory frequency resolution is coarse down there).
    Among equal-distance candidates an unshifted target wins over a shifted
    one, then the louder target partial.
    """
    if partials is None:
        partials = []
    pitch_freq = pitch_to_freq(pitch)
    tolerance = (LOW_REGISTER_TOLERANCE_CENTS if pitch_freq < LOW_REGISTER_LIMIT_HZ
                 else match_tolerance_cents)

    best = None
    best_key = None
    for freq, base_d, kind, harmonic, power, label_base in _candidate_targets(fit, partials):
        for shift in range(-MAX_OCTAVE_SHIFT, MAX_OCTAVE_SHIFT + 1):
            offset = cents_between(freq * 2.0**shift, pitch_freq)
            if abs(offset) > tolerance:
                continue
            d = base_d + abs(shift)
            key = (d, abs(shift), -power, freq)
            if best_key is None or key < best_key:
                best_key = key
                best = PitchAssociation(
                    pitch=pitch,
                    target=kind,
                    octave_shift=shift,
                    distance_d=d,
                    harmonic=harmonic,
                    target_frequency_hz=freq,
                    label=f"{label_base}{_shift_suffix(shift)}",
                )
    if best is None:
        return PitchAssociation(pitch=pitch, target="none")
    return best


@dataclass(frozen=True)
class PerceptionBin:
    """One bar of the aggregate: a pitch (or merged low-register group)."""

    label: str
    pitches: tuple[str, ...]
    count: int
    total_certainty: float
    association_class: str  # "d0" | "d1" | "d2" | "none"
    association_label: str
    min_distance: int | None


@dataclass(frozen=True)
class PerceptionAggregate:
    sample_id: str
    bins: tuple[PerceptionBin, ...]
    per_listener_counts: dict[str, float] = field(default_factory=dict)
    mean_weighted_count: float | None = None
    duplicate_reports: int = 0

    @property
    def total_reports(self) -> int:
        return sum(b.count for b in self.bins)


def _association_class(d: int | None) -> str:
    if d is None:
        return "none"
    return f"d{min(d, 2)}"


def aggregate_perception(reports: list[ListenerReport], fit: HarmonicFit,
                         partials: list[Partial] | None = None,
                         match_tolerance_cents: float = MATCH_TOLERANCE_CENTS,
                         ) -> PerceptionAggregate:
    """Tally reports per pitch with association classes for the bar graph.

    All reports must belong to one sample.  Pitches are binned at semitone
    resolution; bins below 45 Hz are chained into one bar when adjacent bins
    sit within 200 cents, mirroring the low-register merging used in the
    figures.  Bin colour class is the best (minimum) distance among member
    reports.  Tallies sum to the number of input reports; duplicate
    (listener, pitch) pairs are kept and counted in ``duplicate_reports``.
    """
    sample_ids = {r.sample_id for r in reports}
    if len(sample_ids) > 1:
        raise FormatError(f"reports span multiple samples: {sorted(sample_ids)}")
    sample_id = sample_ids.pop() if sample_ids else ""

    per_pitch: dict[tuple[str, int], list[tuple[ListenerReport, PitchAssociation]]] = {}
    seen_pairs = set()
    duplicates = 0
    for report in reports:
        assoc = associate_perceived_pitch(report.pitch, fit, partials,
                                          match_tolerance_cents)
        key = (report.pitch.pitch_class, report.pitch.octave)
        per_pitch.setdefault(key, []).append((report, assoc))
        pair = (report.listener_id, key)
        if pair in seen_pairs:
            duplicates += 1
        seen_pairs.add(pair)

    # order by pitch height, then chain-merge low-register neighbours
    ordered = sorted(per_pitch.items(), key=lambda kv: PitchName(*kv[0]).midi)
    groups: list[list[tuple[tuple[str, int], list]]] = []
    for key, members in ordered:
        name = PitchName(*key)
        freq = pitch_to_freq(name)
        if groups:
            prev_key = groups[-1][-1][0]
            prev_name = PitchName(*prev_key)
            close = (name.midi - prev_name.midi) * 100.0 <= LOW_REGISTER_TOLERANCE_CENTS
            if freq < LOW_REGISTER_LIMIT_HZ and pitch_to_freq(prev_name) < LOW_REGISTER_LIMIT_HZ and close:
                groups[-1].append((key, members))
                continue
        groups.append([(key, members)])

    bins = []
    for group in groups:
        names = [PitchName(*key) for key, _ in group]
        members = [entry for _, entries in group for entry in entries]
        best = min((a for _, a in members),
                   key=lambda a: (a.distance_d is None, a.distance_d if a.distance_d is not None else 0))
        bins.append(PerceptionBin(
            label="/".join(n.as_text(decimals=0) for n in names),
            pitches=tuple(n.as_text(decimals=0) for n in names),
            count=len(members),
            total_certainty=sum(r.certainty for r, _ in members),
            association_class=_association_class(best.distance_d),
            association_label=best.label,
            min_distance=best.distance_d,
        ))

    per_listener: dict[str, float] = {}
    for report in reports:
        per_listener[report.listener_id] = (
            per_listener.get(report.listener_id, 0.0) + report.certainty)
    mean = weighted_pitch_count(reports, sample_id) if reports else None
    return PerceptionAggregate(
        sample_id=sample_id,
        bins=tuple(bins),
        per_listener_counts=per_listener,
        mean_weighted_count=mean,
        duplicate_reports=duplicates,
    )
