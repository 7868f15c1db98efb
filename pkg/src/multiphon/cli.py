"""Command-line interface.

Subcommands: ``analyze`` (WAV to analysis-report JSON plus plot-data
sidecars), ``synth`` (tone spec JSON to WAV), ``perception`` (listener
reports against an analysis report), ``trackers`` (pitch-tracker traces
against an analysis report) and ``fixtures`` (regenerate the fixture
corpus).

Exit codes: 0 success (possibly with warnings), 2 input error, 3
configuration error, 4 internal error.  Errors print one line to stderr
with a machine-parsable prefix (``multiphon: E_INPUT: ...``).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from multiphon import __version__
from multiphon.audio_io import read_wav, write_wav
from multiphon.errors import (ConfigurationError, FormatError, InsufficientDataError,
                              InvalidFrequencyError, InvalidPitchError,
                              InvalidToneSpecError, MultiphonError)
from multiphon.pipeline import (AnalysisConfig, aggregate_to_dict, analyze_samples,
                                fit_from_report_dict, report_to_dict,
                                tracker_record_to_dict, write_sidecars)
from multiphon.spectral import WindowConfig

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3
EXIT_INTERNAL = 4

CONFIG_ENV_VAR = "MULTIPHON_CONFIG"

_INPUT_ERRORS = (FormatError, InsufficientDataError, InvalidToneSpecError,
                 InvalidPitchError, InvalidFrequencyError, FileNotFoundError,
                 IsADirectoryError, PermissionError, json.JSONDecodeError)


def _fail(code: int, label: str, message: str) -> int:
    print(f"multiphon: {label}: {message}", file=sys.stderr)
    return code


def _load_config(args) -> AnalysisConfig:
    doc = {}
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    if path:
        with open(path) as fh:
            doc = json.load(fh)
    config = AnalysisConfig.from_mapping(doc)

    window_overrides = {}
    for flag, field_name in (("window_length", "window_length"), ("hop", "hop"),
                             ("zero_pad", "zero_pad_factor"),
                             ("window_shape", "window_shape")):
        value = getattr(args, flag, None)
        if value is not None:
            window_overrides[field_name] = value
    if window_overrides:
        config = replace(config, window=WindowConfig(
            **{**config.window.__dict__, **window_overrides}))
    if getattr(args, "phon", None) is not None:
        config = replace(config, phon_level=args.phon)
    if getattr(args, "smoothing_bandwidth", None) is not None:
        config = replace(config, smoothing_bandwidth_hz=args.smoothing_bandwidth)
    f0_min = getattr(args, "f0_min", None)
    f0_max = getattr(args, "f0_max", None)
    if f0_min is not None or f0_max is not None:
        lo, hi = config.f0_search
        config = replace(config, f0_search=(f0_min if f0_min is not None else lo,
                                            f0_max if f0_max is not None else hi))
    if getattr(args, "average_frames", False):
        config = replace(config, average_frames=True)
    return config


def _trace_records(trace_paths, fit, partials, perception, args) -> list[dict]:
    from multiphon.trackers import (aggregate_trace_distribution, compare_distributions,
                                    detect_octave_jumps, load_tracker_trace)

    records = []
    for path in trace_paths:
        name = os.path.splitext(os.path.basename(path))[0]
        trace = load_tracker_trace(path, name,
                                   voicing_threshold=getattr(args, "voicing_threshold", 0.5))
        dist = aggregate_trace_distribution(
            trace, confidence_weighted=not getattr(args, "unweighted", False))
        if dist is None:
            records.append(tracker_record_to_dict(name, None, None, []))
            continue
        try:
            jumps = detect_octave_jumps(trace, getattr(args, "jump_tolerance", 50.0))
        except InsufficientDataError:
            jumps = []
        comparison = compare_distributions(dist, perception, fit, partials)
        records.append(tracker_record_to_dict(name, dist, comparison, jumps))
    return records


def _cmd_analyze(args) -> int:
    from multiphon.perception import aggregate_perception, load_reports

    config = _load_config(args)
    multiple = len(args.audio) > 1
    if multiple and args.out and not os.path.isdir(args.out):
        os.makedirs(args.out, exist_ok=True)
    listener_reports = load_reports(args.reports) if args.reports else None
    for path in args.audio:
        wav = read_wav(path)
        stem = os.path.splitext(os.path.basename(path))[0]
        sample_id = args.sample_id if (args.sample_id and not multiple) else stem
        report = analyze_samples(wav.samples, wav.sample_rate, config,
                                 sample_id=sample_id, source_path=path)
        doc = report_to_dict(report)
        perception = None
        if listener_reports is not None and report.fit is not None:
            report_ids = {r.sample_id for r in listener_reports}
            if report_ids and report_ids != {sample_id}:
                raise FormatError(
                    f"sample-id mismatch: reports cover {sorted(report_ids)}, "
                    f"audio is {sample_id!r}")
            perception = aggregate_perception(listener_reports, report.fit,
                                              report.partials)
            doc["perception"] = aggregate_to_dict(perception)
        if args.traces and report.fit is not None:
            doc["tracker_comparisons"] = _trace_records(
                args.traces, report.fit, report.partials, perception, args)
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
        if args.out:
            out_path = (os.path.join(args.out, f"{stem}.report.json")
                        if multiple or os.path.isdir(args.out) else args.out)
            with open(out_path, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if args.sidecar_dir:
            write_sidecars(report, args.sidecar_dir, stem)
    return EXIT_OK


def _cmd_synth(args) -> int:
    from multiphon.synthesis import render_tone, tonespec_from_json, tonespec_to_json

    with open(args.spec) as fh:
        spec = tonespec_from_json(fh.read())
    samples = render_tone(spec)
    write_wav(args.out, samples, int(spec.rate), bits=args.bits,
              comment=tonespec_to_json(spec))
    return EXIT_OK


def _load_report(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _cmd_perception(args) -> int:
    from multiphon.perception import aggregate_perception, load_reports

    reports = load_reports(args.reports)
    report_doc = _load_report(args.analysis)
    fit, partials = fit_from_report_dict(report_doc)
    report_sample = report_doc["sample"]["sample_id"]
    sample_ids = {r.sample_id for r in reports}
    if sample_ids and sample_ids != {report_sample}:
        raise FormatError(
            f"sample-id mismatch: reports cover {sorted(sample_ids)}, "
            f"analysis is {report_sample!r}")

    aggregate = aggregate_perception(reports, fit, partials,
                                     match_tolerance_cents=args.tolerance)
    doc = {"schema": "multiphon.perception-aggregate.v1",
           "toolkit_version": __version__}
    doc.update(aggregate_to_dict(aggregate))
    doc["sample_id"] = report_sample
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.bar_csv:
        lines = ["pitch,count,total_certainty,association_class,association_label"]
        for b in aggregate.bins:
            lines.append(f"{b.label},{b.count},{b.total_certainty!r},"
                         f"{b.association_class},{b.association_label}")
        with open(args.bar_csv, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_trackers(args) -> int:
    from multiphon.perception import aggregate_perception, load_reports

    report_doc = _load_report(args.analysis)
    fit, partials = fit_from_report_dict(report_doc)
    perception = None
    if args.reports:
        reports = load_reports(args.reports)
        perception = aggregate_perception(reports, fit, partials)

    records = _trace_records(args.traces, fit, partials, perception, args)
    doc = {
        "schema": "multiphon.tracker-comparison.v1",
        "toolkit_version": __version__,
        "sample_id": report_doc["sample"]["sample_id"],
        "trackers": records,
    }
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_fixtures(args) -> int:
    from multiphon.fixtures import regenerate

    for path in regenerate(args.out_dir):
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multiphon",
        description="Pitch analysis toolkit for multiphonic tones")
    parser.add_argument("--version", action="version", version=f"multiphon {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analyse WAV files into report JSON")
    p.add_argument("audio", nargs="+", help="input WAV path(s)")
    p.add_argument("--out", help="output file (single input) or directory")
    p.add_argument("--sidecar-dir", help="directory for plot-data CSV sidecars")
    p.add_argument("--sample-id", help="sample id recorded in the report")
    p.add_argument("--config", help=f"JSON config file (default from ${CONFIG_ENV_VAR})")
    p.add_argument("--window-length", type=int, dest="window_length")
    p.add_argument("--hop", type=int)
    p.add_argument("--zero-pad", type=int, dest="zero_pad")
    p.add_argument("--window-shape", dest="window_shape")
    p.add_argument("--phon", type=float, help="equal-loudness contour level")
    p.add_argument("--smoothing-bandwidth", type=float, dest="smoothing_bandwidth")
    p.add_argument("--f0-min", type=float, dest="f0_min")
    p.add_argument("--f0-max", type=float, dest="f0_max")
    p.add_argument("--average-frames", action="store_true", dest="average_frames")
    p.add_argument("--reports", help="listener-report CSV to embed as the "
                                     "report's perception section")
    p.add_argument("--trace", action="append", default=[], dest="traces",
                   help="tracker trace CSV to embed (repeatable)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("synth", help="render a tone spec JSON to WAV")
    p.add_argument("spec", help="tone spec JSON path")
    p.add_argument("out", help="output WAV path")
    p.add_argument("--bits", type=int, choices=(16, 32), default=32)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("perception", help="aggregate listener reports against an analysis")
    p.add_argument("reports", help="listener-report CSV")
    p.add_argument("analysis", help="analysis report JSON")
    p.add_argument("--out", help="output JSON path (default stdout)")
    p.add_argument("--bar-csv", dest="bar_csv", help="bar-graph CSV path")
    p.add_argument("--tolerance", type=float, default=50.0,
                   help="association tolerance in cents")
    p.set_defaults(func=_cmd_perception)

    p = sub.add_parser("trackers", help="compare tracker traces against an analysis")
    p.add_argument("traces", nargs="+", help="tracker trace CSV path(s)")
    p.add_argument("analysis", help="analysis report JSON")
    p.add_argument("--reports", help="optional listener-report CSV for overlap scores")
    p.add_argument("--out", help="output JSON path (default stdout)")
    p.add_argument("--voicing-threshold", type=float, default=0.5,
                   dest="voicing_threshold")
    p.add_argument("--jump-tolerance", type=float, default=50.0, dest="jump_tolerance")
    p.add_argument("--unweighted", action="store_true",
                   help="ignore confidence weights when aggregating")
    p.set_defaults(func=_cmd_trackers)

    p = sub.add_parser("fixtures", help="regenerate the fixture corpus")
    p.add_argument("--out-dir", default="fixtures/generated", dest="out_dir")
    p.set_defaults(func=_cmd_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as err:
        return _fail(EXIT_INPUT, "E_INPUT", str(err))
    except ConfigurationError as err:
        return _fail(EXIT_CONFIG, "E_CONFIG", str(err))
    except MultiphonError as err:
        return _fail(EXIT_INTERNAL, "E_INTERNAL", str(err))


if __name__ == "__main__":
    sys.exit(main())
