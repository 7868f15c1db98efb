import numpy as np
import pytest

from multiphon.errors import FormatError, InsufficientDataError
from multiphon.harmonicity import assign_harmonic_numbers
from multiphon.perception import ListenerReport, aggregate_perception, load_reports
from multiphon.tones import Partial, PitchName
from multiphon.trackers import (aggregate_trace_distribution, compare_distributions,
                                detect_octave_jumps, load_tracker_trace)

F2 = 87.3070578583
F3 = 2 * F2
TRACES = "fixtures/traces"


def trace_text(rows):
    return "time_s,freq_hz,confidence\n" + "\n".join(
        f"{t},{f},{c}" for t, f, c in rows) + "\n"


def make_fit(pairs, f0):
    parts = [Partial(f, p) for f, p in pairs]
    return assign_harmonic_numbers(parts, f0, 35.0), parts


class TestLoadTrackerTrace:
    def test_constant_trace(self):
        trace = load_tracker_trace(
            trace_text([(0.00, 440.0, 0.9), (0.01, 440.0, 0.9), (0.02, 440.0, 0.9)]),
            "crepe")
        assert len(trace.voiced_frames) == 3
        assert trace.tracker_name == "crepe"

    def test_zero_confidence_zero_frequency_accepted(self):
        trace = load_tracker_trace(
            trace_text([(0.00, 440.0, 0.9), (0.01, 0.0, 0.0)]), "t")
        assert len(trace.frames) == 2
        assert len(trace.voiced_frames) == 1

    def test_shuffled_times_name_first_offender(self):
        text = trace_text([(0.00, 440.0, 0.9), (0.02, 440.0, 0.9), (0.01, 440.0, 0.9)])
        with pytest.raises(FormatError, match="row 3"):
            load_tracker_trace(text, "t")

    def test_negative_frequency_on_voiced_frame(self):
        with pytest.raises(FormatError, match="row 1"):
            load_tracker_trace(trace_text([(0.0, -10.0, 0.9)]), "t")

    def test_header_mismatch(self):
        with pytest.raises(FormatError, match="header"):
            load_tracker_trace("time,freq,conf\n0,440,1\n", "t")

    def test_file_path_input(self):
        trace = load_tracker_trace(f"{TRACES}/pesto_like_f2.csv", "pesto")
        assert len(trace.frames) == 40


class TestAggregateTraceDistribution:
    def test_constant_trace_single_mode(self):
        trace = load_tracker_trace(
            trace_text([(i * 0.01, 440.0, 0.9) for i in range(10)]), "t")
        dist = aggregate_trace_distribution(trace)
        assert len(dist.modes) == 1
        assert dist.modes[0].mass == pytest.approx(1.0, abs=1e-9)
        assert (dist.modes[0].pitch.pitch_class, dist.modes[0].pitch.octave) == ("A", 4)

    def test_octave_alternation_splits_mass_evenly(self):
        trace = load_tracker_trace(f"{TRACES}/crepe_like_f2f3.csv", "crepe")
        dist = aggregate_trace_distribution(trace)
        assert len(dist.modes) == 2
        labels = {(m.pitch.pitch_class, m.pitch.octave): m.mass for m in dist.modes}
        assert labels[("F", 2)] == pytest.approx(0.5, abs=1e-6)
        assert labels[("F", 3)] == pytest.approx(0.5, abs=1e-6)

    def test_outlier_mass_closed_form(self):
        # 10% of frames at confidence 0.1 vs 90% at 0.9:
        # outlier mass = 0.1*0.1 / (0.1*0.1 + 0.9*0.9)
        rows = [(i * 0.01, 220.0 if i % 10 else 660.0, 0.9 if i % 10 else 0.1)
                for i in range(100)]
        trace = load_tracker_trace(trace_text(rows), "t", voicing_threshold=0.05)
        dist = aggregate_trace_distribution(trace, confidence_weighted=True)
        outlier = [m for m in dist.modes if m.pitch.pitch_class == "E"][0]
        assert outlier.mass == pytest.approx(0.1 * 0.1 / (0.1 * 0.1 + 0.9 * 0.9),
                                             abs=1e-9)

    def test_unweighted_flag(self):
        rows = [(i * 0.01, 220.0 if i % 10 else 660.0, 0.9 if i % 10 else 0.1)
                for i in range(100)]
        trace = load_tracker_trace(trace_text(rows), "t", voicing_threshold=0.05)
        dist = aggregate_trace_distribution(trace, confidence_weighted=False)
        outlier = [m for m in dist.modes if m.pitch.pitch_class == "E"][0]
        assert outlier.mass == pytest.approx(0.1, abs=1e-9)

    def test_mass_conservation(self):
        rng = np.random.default_rng(12)
        rows = [(i * 0.01, float(rng.uniform(60, 2000)), float(rng.uniform(0.5, 1)))
                for i in range(200)]
        dist = aggregate_trace_distribution(load_tracker_trace(trace_text(rows), "t"))
        assert sum(m.mass for m in dist.modes) == pytest.approx(1.0, abs=1e-6)

    def test_all_unvoiced_is_no_data(self):
        trace = load_tracker_trace(
            trace_text([(0.0, 100.0, 0.2), (0.01, 100.0, 0.1)]), "t")
        assert aggregate_trace_distribution(trace) is None


class TestDetectOctaveJumps:
    def test_constant_trace_no_jumps(self):
        trace = load_tracker_trace(f"{TRACES}/pesto_like_f2.csv", "pesto")
        assert detect_octave_jumps(trace) == []

    def test_alternating_trace_jumps_every_frame(self):
        trace = load_tracker_trace(f"{TRACES}/crepe_like_f2f3.csv", "crepe")
        events = detect_octave_jumps(trace)
        assert len(events) == len(trace.voiced_frames) - 1
        # fixture frequencies are stored at 4 decimals, hence the tolerance
        assert events[0].interval_cents == pytest.approx(1200.0, abs=0.01)

    def test_semitone_glide_is_not_a_jump(self):
        # 440 -> 466 Hz is 99.3 cents, nowhere near an octave
        trace = load_tracker_trace(
            trace_text([(0.0, 440.0, 0.9), (0.01, 466.0, 0.9)]), "t")
        assert detect_octave_jumps(trace, 50.0) == []

    def test_transposition_invariance(self):
        rows = [(i * 0.01, f, 0.9) for i, f in enumerate([100, 200, 100, 400, 100])]
        shifted = [(t, f * 1.3, c) for t, f, c in rows]
        a = detect_octave_jumps(load_tracker_trace(trace_text(rows), "t"))
        b = detect_octave_jumps(load_tracker_trace(trace_text(shifted), "t"))
        assert len(a) == len(b)
        for ea, eb in zip(a, b):
            assert ea.interval_cents == pytest.approx(eb.interval_cents, abs=1e-6)

    def test_double_octave_counts(self):
        trace = load_tracker_trace(
            trace_text([(0.0, 100.0, 0.9), (0.01, 400.0, 0.9)]), "t")
        events = detect_octave_jumps(trace)
        assert len(events) == 1
        assert events[0].interval_cents == pytest.approx(2400.0, abs=1e-6)

    def test_needs_two_voiced_frames(self):
        trace = load_tracker_trace(trace_text([(0.0, 100.0, 0.9)]), "t")
        with pytest.raises(InsufficientDataError):
            detect_octave_jumps(trace)


class TestCompareDistributions:
    def test_full_overlap(self):
        fit, parts = make_fit([(F2, 1.0), (2 * F2, 0.5)], F2)
        trace = load_tracker_trace(f"{TRACES}/pesto_like_f2.csv", "pesto")
        dist = aggregate_trace_distribution(trace)
        reports = [ListenerReport("s", "L1", PitchName("F", 2), 1.0)]
        perception = aggregate_perception(reports, fit, parts)
        cmp = compare_distributions(dist, perception, fit, parts)
        assert cmp.overlap == pytest.approx(1.0)
        assert cmp.modes[0].association.label == "f0"

    def test_half_overlap_when_f3_unreported(self):
        fit, parts = make_fit([(F2, 1.0), (2 * F2, 0.5)], F2)
        trace = load_tracker_trace(f"{TRACES}/crepe_like_f2f3.csv", "crepe")
        dist = aggregate_trace_distribution(trace)
        reports = [ListenerReport("s", "L1", PitchName("F", 2), 1.0)]
        perception = aggregate_perception(reports, fit, parts)
        cmp = compare_distributions(dist, perception, fit, parts)
        assert cmp.overlap == pytest.approx(0.5, abs=1e-6)

    def test_committed_missing_fundamental_fixture(self):
        # tracker follows the missing fundamental (60% of mass on E1) while
        # listeners report only upper structure; hand oracle: overlap = 0.4
        fit, parts = make_fit([(82.4069, 0.8), (123.6103, 1.0), (164.8138, 0.7),
                               (206.0172, 0.6), (247.2207, 0.5)], 41.2034)
        trace = load_tracker_trace(f"{TRACES}/crepe_like_e1e2.csv", "crepe")
        dist = aggregate_trace_distribution(trace)
        reports = load_reports("fixtures/listeners/powerchord_e2_reports.csv")
        perception = aggregate_perception(reports, fit, parts)
        cmp = compare_distributions(dist, perception, fit, parts)
        assert cmp.overlap == pytest.approx(0.4, abs=1e-6)
        by_pitch = {m.pitch: m for m in cmp.modes}
        assert by_pitch["E1"].association.label == "f0"
        assert by_pitch["E2"].association.label == "h2"

    def test_overlap_monotone_in_listener_set(self):
        fit, parts = make_fit([(F2, 1.0), (2 * F2, 0.5)], F2)
        trace = load_tracker_trace(f"{TRACES}/crepe_like_f2f3.csv", "crepe")
        dist = aggregate_trace_distribution(trace)
        small = [ListenerReport("s", "L1", PitchName("F", 2), 1.0)]
        grown = small + [ListenerReport("s", "L2", PitchName("F", 3), 0.5)]
        o1 = compare_distributions(
            dist, aggregate_perception(small, fit, parts), fit, parts).overlap
        o2 = compare_distributions(
            dist, aggregate_perception(grown, fit, parts), fit, parts).overlap
        assert o2 >= o1

    def test_no_perception_gives_none_overlap(self):
        fit, parts = make_fit([(F2, 1.0), (2 * F2, 0.5)], F2)
        trace = load_tracker_trace(f"{TRACES}/pesto_like_f2.csv", "pesto")
        dist = aggregate_trace_distribution(trace)
        cmp = compare_distributions(dist, None, fit, parts)
        assert cmp.overlap is None
