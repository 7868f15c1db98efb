"""End-to-end analysis pipeline and report serialisation.

``analyze_samples`` runs the complete chain: raw spectrum, loudness
weighting, smoothing, partial extraction, temporal and spectral f0,
harmonicity classification and carrier/modulation decomposition, and bundles
everything into an AnalysisReport.  Serialisation is deterministic: same
input and configuration produce byte-identical JSON.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from multiphon import __version__
from multiphon.errors import DegenerateFitError, InsufficientDataError
from multiphon.harmonicity import (CarrierModulation, ClassifierThresholds,
                                   HarmonicAssignment, HarmonicFit, HarmonicityClass,
                                   classify_harmonicity, decompose_carrier_modulation,
                                   default_fit_search, fit_least_deviating_series)
from multiphon.loudness import LoudnessContour, apply_equal_loudness_weighting
from multiphon.spectral import (PeakConfig, WindowConfig, compute_power_spectrum,
                                extract_partials, smooth_spectrum)
from multiphon.temporal import (F0Estimate, SpacingProfile, approximate_gcd,
                                autocorrelation_f0, partial_spacings)
from multiphon.tones import Partial, Spectrum, freq_to_pitch

REPORT_SCHEMA_ID = "multiphon.analysis-report.v1"

# temporal analysis reads at most this much audio, for bounded runtime
MAX_ACF_SECONDS = 4.0


@dataclass(frozen=True)
class AnalysisConfig:
    """Every knob of the analysis chain; echoed in full into each report."""

    window: WindowConfig = field(default_factory=WindowConfig)
    peak: PeakConfig = field(default_factory=PeakConfig)
    thresholds: ClassifierThresholds = field(default_factory=ClassifierThresholds)
    phon_level: float = 50.0
    f0_search: tuple[float, float] = (20.0, 2000.0)
    modulation_search: tuple[float, float] = (8.0, 120.0)
    carrier_search: tuple[float, float] = (50.0, 5000.0)
    smoothing_bandwidth_hz: float = 96.0
    assignment_tolerance_cents: float = 35.0
    gcd_tolerance_cents: float = 35.0
    average_frames: bool = False

    def to_dict(self) -> dict:
        return {
            "window": asdict(self.window),
            "peak": asdict(self.peak),
            "thresholds": asdict(self.thresholds),
            "phon_level": self.phon_level,
            "f0_search": list(self.f0_search),
            "modulation_search": list(self.modulation_search),
            "carrier_search": list(self.carrier_search),
            "smoothing_bandwidth_hz": self.smoothing_bandwidth_hz,
            "assignment_tolerance_cents": self.assignment_tolerance_cents,
            "gcd_tolerance_cents": self.gcd_tolerance_cents,
            "average_frames": self.average_frames,
        }

    @classmethod
    def from_mapping(cls, doc: dict) -> "AnalysisConfig":
        cfg = cls()
        kwargs = {}
        if "window" in doc:
            kwargs["window"] = WindowConfig(**{**asdict(cfg.window), **doc["window"]})
        if "peak" in doc:
            kwargs["peak"] = PeakConfig(**{**asdict(cfg.peak), **doc["peak"]})
        if "thresholds" in doc:
            kwargs["thresholds"] = ClassifierThresholds(
                **{**asdict(cfg.thresholds), **doc["thresholds"]})
        for key in ("phon_level", "smoothing_bandwidth_hz", "assignment_tolerance_cents",
                    "gcd_tolerance_cents", "average_frames"):
            if key in doc:
                kwargs[key] = doc[key]
        for key in ("f0_search", "modulation_search", "carrier_search"):
            if key in doc:
                kwargs[key] = tuple(doc[key])
        return replace(cfg, **kwargs)


@dataclass(frozen=True)
class AnalysisReport:
    """Full per-tone analysis bundle, ready for JSON serialisation."""

    sample_id: str
    sample_rate: float
    num_samples: int
    config: AnalysisConfig
    raw: Spectrum
    weighted: Spectrum
    smoothed: Spectrum
    partials: list[Partial]
    temporal_f0: F0Estimate | None
    spacing_profile: SpacingProfile | None
    spacing_gcd: F0Estimate | None
    fit: HarmonicFit | None
    classification: HarmonicityClass | None
    carrier_modulation: CarrierModulation | None
    warnings: tuple[str, ...]
    source_path: str | None = None


def analyze_samples(samples: np.ndarray, rate: float,
                    config: AnalysisConfig | None = None,
                    sample_id: str = "", source_path: str | None = None,
                    ) -> AnalysisReport:
    """Run the full analysis chain over one audio frame.

    Partial extraction runs on the loudness-weighted spectrum, so the
    partial list reflects what listeners hear.  Degenerate stages (too few
    partials, no fit at the optimum) degrade to None plus a warning rather
    than failing the whole report.
    """
    if config is None:
        config = AnalysisConfig()
    samples = np.asarray(samples, dtype=np.float64)
    warnings: list[str] = []

    contour = LoudnessContour(phon_level=config.phon_level)
    raw = compute_power_spectrum(samples, rate, config.window,
                                 average_frames=config.average_frames)
    weighted = apply_equal_loudness_weighting(raw, contour)
    smoothed = smooth_spectrum(weighted, config.smoothing_bandwidth_hz)
    partials = extract_partials(weighted, config.peak, refine_on=raw)
    if not partials:
        warnings.append("no partials above the extraction floor")

    acf_frame = samples[: int(MAX_ACF_SECONDS * rate)]
    try:
        temporal = autocorrelation_f0(acf_frame, rate, config.f0_search)
    except InsufficientDataError as err:
        temporal = None
        warnings.append(f"temporal f0 unavailable: {err}")

    profile = None
    gcd = None
    if len(partials) >= 2:
        profile = partial_spacings(partials)
        gcd = approximate_gcd(profile.spacings, config.gcd_tolerance_cents)

    fit = None
    classification = None
    if len(partials) >= 2:
        try:
            fit = fit_least_deviating_series(
                partials, default_fit_search(partials, config.f0_search),
                config.assignment_tolerance_cents)
        except DegenerateFitError as err:
            warnings.append(f"degenerate harmonic fit: {err}")
        if fit is not None and profile is not None:
            classification = classify_harmonicity(fit, profile, config.thresholds)
    else:
        warnings.append("harmonic fit needs at least 2 partials")

    try:
        carrier_mod = decompose_carrier_modulation(
            samples, rate, config.window, config.smoothing_bandwidth_hz,
            peak_cfg=config.peak,
            modulation_search=config.modulation_search,
            carrier_search=config.carrier_search)
    except InsufficientDataError as err:
        carrier_mod = None
        warnings.append(f"carrier/modulation decomposition unavailable: {err}")

    return AnalysisReport(
        sample_id=sample_id,
        sample_rate=float(rate),
        num_samples=len(samples),
        config=config,
        raw=raw,
        weighted=weighted,
        smoothed=smoothed,
        partials=partials,
        temporal_f0=temporal,
        spacing_profile=profile,
        spacing_gcd=gcd,
        fit=fit,
        classification=classification,
        carrier_modulation=carrier_mod,
        warnings=tuple(warnings),
        source_path=source_path,
    )


def _pitch_text(frequency: float | None) -> str | None:
    if frequency is None or frequency <= 0:
        return None
    return freq_to_pitch(frequency).as_text()


def _f0_dict(est: F0Estimate | None) -> dict | None:
    if est is None:
        return None
    return {
        "frequency_hz": est.frequency,
        "salience": est.salience,
        "method": est.method,
        "pitch": _pitch_text(est.frequency),
    }


def _spectrum_summary(s: Spectrum) -> dict:
    return {
        "kind": s.kind,
        "bins": len(s),
        "bin_spacing_hz": s.bin_spacing,
        "total_power": s.total_power,
        "window_length": s.window_length,
    }


def report_to_dict(report: AnalysisReport) -> dict:
    fit = report.fit
    fit_doc = None
    if fit is not None:
        fit_doc = {
            "f0_hz": fit.f0,
            "f0_pitch": _pitch_text(fit.f0),
            "rms_deviation_cents": fit.rms_deviation_cents,
            "assignments": [
                {"partial_index": a.partial_index, "harmonic": a.harmonic,
                 "deviation_cents": a.deviation_cents}
                for a in fit.assignments
            ],
            "unassigned_partials": list(fit.unassigned_partials),
        }

    classification_doc = None
    if report.classification is not None:
        classification_doc = {
            "label": report.classification.label,
            "evidence": asdict(report.classification.evidence),
        }

    carrier_doc = None
    if report.carrier_modulation is not None:
        cm = report.carrier_modulation
        carrier_doc = {
            "carrier": _f0_dict(cm.carrier),
            "modulation": _f0_dict(cm.modulation),
            "sideband_spacing_hz": cm.sideband_spacing,
        }

    profile = report.spacing_profile
    assigned = {a.partial_index: a.harmonic for a in fit.assignments} if fit else {}
    # the perception and tracker sections are filled in by the CLI when
    # listener reports / tracker traces accompany the audio
    return {
        "schema": REPORT_SCHEMA_ID,
        "toolkit_version": __version__,
        "perception": None,
        "tracker_comparisons": None,
        "sample": {
            "sample_id": report.sample_id,
            "source_path": report.source_path,
            "sample_rate": report.sample_rate,
            "num_samples": report.num_samples,
            "duration_s": report.num_samples / report.sample_rate,
        },
        "config": report.config.to_dict(),
        "spectra": {
            "raw": _spectrum_summary(report.raw),
            "weighted": _spectrum_summary(report.weighted),
            "smoothed": _spectrum_summary(report.smoothed),
        },
        "partials": [
            {
                "index": i,
                "frequency_hz": p.frequency,
                "power": p.power,
                "power_db": p.power_db if p.power > 0 else None,
                "harmonic": assigned.get(i),
                "pitch": _pitch_text(p.frequency),
            }
            for i, p in enumerate(report.partials)
        ],
        "temporal_f0": _f0_dict(report.temporal_f0),
        "spacing_profile": None if profile is None else {
            "spacings_hz": [float(s) for s in profile.spacings],
            "center_hz": profile.center,
            "dispersion_hz": profile.dispersion,
        },
        "spacing_gcd": _f0_dict(report.spacing_gcd),
        "harmonic_fit": fit_doc,
        "classification": classification_doc,
        "carrier_modulation": carrier_doc,
        "warnings": list(report.warnings),
    }


def report_to_json(report: AnalysisReport) -> str:
    import json

    return json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n"


def aggregate_to_dict(aggregate) -> dict:
    """Serialise a PerceptionAggregate to its JSON form."""
    return {
        "sample_id": aggregate.sample_id,
        "mean_weighted_count": aggregate.mean_weighted_count,
        "per_listener_counts": dict(sorted(aggregate.per_listener_counts.items())),
        "duplicate_reports": aggregate.duplicate_reports,
        "bins": [
            {"label": b.label, "pitches": list(b.pitches), "count": b.count,
             "total_certainty": b.total_certainty,
             "association_class": b.association_class,
             "association_label": b.association_label,
             "min_distance": b.min_distance}
            for b in aggregate.bins
        ],
    }


def tracker_record_to_dict(name: str, dist, comparison, jumps) -> dict:
    """Serialise one tracker's distribution/comparison/jump results."""
    if dist is None:
        return {"tracker": name, "no_data": True}
    return {
        "tracker": name,
        "no_data": False,
        "voiced_fraction": dist.voiced_fraction,
        "modes": [
            {"pitch": m.pitch, "mass": m.mass,
             "association_label": m.association.label,
             "distance_d": m.association.distance_d}
            for m in comparison.modes
        ],
        "octave_jumps": [
            {"time_s": j.time, "from": j.from_pitch.as_text(),
             "to": j.to_pitch.as_text(), "interval_cents": j.interval_cents}
            for j in jumps
        ],
        "jump_count": len(jumps),
        "overlap": comparison.overlap,
    }


def write_sidecars(report: AnalysisReport, directory, stem: str) -> list[str]:
    """Write per-panel plot data as CSV files next to the report.

    One file per figure panel: the three spectra, the partial dots (sized by
    their share of total partial energy), the spacing profile, and the f0
    markers.  Returns the written paths.
    """
    import os

    from multiphon.spectral import spectrum_to_csv

    os.makedirs(directory, exist_ok=True)
    written = []

    def _put(name: str, text: str) -> None:
        path = os.path.join(directory, f"{stem}.{name}.csv")
        with open(path, "w", newline="") as fh:
            fh.write(text)
        written.append(path)

    _put("spectrum_raw", spectrum_to_csv(report.raw))
    _put("spectrum_weighted", spectrum_to_csv(report.weighted))
    _put("spectrum_smoothed", spectrum_to_csv(report.smoothed))

    total = sum(p.power for p in report.partials) or 1.0
    assigned = ({a.partial_index: a.harmonic for a in report.fit.assignments}
                if report.fit else {})
    lines = ["freq_hz,power_db,energy_share,harmonic,pitch"]
    for i, p in enumerate(report.partials):
        db = p.power_db if p.power > 0 else float("-inf")
        harmonic = assigned.get(i, "")
        lines.append(f"{p.frequency!r},{db!r},{p.power / total!r},{harmonic},"
                     f"{_pitch_text(p.frequency)}")
    _put("partials", "\n".join(lines) + "\n")

    lines = ["index,spacing_hz"]
    if report.spacing_profile is not None:
        for i, s in enumerate(report.spacing_profile.spacings):
            lines.append(f"{i},{float(s)!r}")
    _put("spacings", "\n".join(lines) + "\n")

    lines = ["marker,frequency_hz,salience,pitch"]

    def _marker(name: str, est: F0Estimate | None) -> None:
        if est is not None and est.frequency is not None:
            lines.append(f"{name},{est.frequency!r},{est.salience!r},"
                         f"{_pitch_text(est.frequency)}")

    _marker("temporal_f0", report.temporal_f0)
    if report.fit is not None:
        lines.append(f"spectral_f0,{report.fit.f0!r},,{_pitch_text(report.fit.f0)}")
    _marker("spacing_gcd", report.spacing_gcd)
    if report.carrier_modulation is not None:
        _marker("carrier", report.carrier_modulation.carrier)
        _marker("modulation", report.carrier_modulation.modulation)
    _put("f0_markers", "\n".join(lines) + "\n")
    return written


def fit_from_report_dict(doc: dict) -> tuple[HarmonicFit, list[Partial]]:
    """Rebuild the HarmonicFit and partial list from a serialised report.

    The perception and tracker commands consume analysis reports from disk;
    this is their loading path.
    """
    partial_docs = doc.get("partials", [])
    partials = [Partial(p["frequency_hz"], p["power"]) for p in partial_docs]
    fit_doc = doc.get("harmonic_fit")
    if fit_doc is None:
        raise InsufficientDataError("analysis report carries no harmonic fit")
    assignments = tuple(
        HarmonicAssignment(a["partial_index"], a["harmonic"], a["deviation_cents"])
        for a in fit_doc["assignments"]
    )
    fit = HarmonicFit(
        f0=fit_doc["f0_hz"],
        assignments=assignments,
        rms_deviation_cents=fit_doc["rms_deviation_cents"],
        unassigned_partials=tuple(fit_doc["unassigned_partials"]),
        partial_frequencies=tuple(p["frequency_hz"] for p in partial_docs),
        partial_powers=tuple(p["power"] for p in partial_docs),
    )
    return fit, partials
