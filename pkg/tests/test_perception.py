import io
import json
import math

import numpy as np
import pytest

from multiphon.errors import FormatError
from multiphon.fixtures import CELLO_LIKE_POWERS, F2_HZ
from multiphon.harmonicity import assign_harmonic_numbers
from multiphon.perception import (ListenerReport, aggregate_perception,
                                  associate_perceived_pitch, load_reports,
                                  weighted_pitch_count)
from multiphon.tones import Partial, PitchName, pitch_to_freq

FIXTURES = "fixtures/listeners"


def make_fit(freq_power_pairs, f0):
    parts = [Partial(f, p) for f, p in freq_power_pairs]
    return assign_harmonic_numbers(parts, f0, 35.0), parts


@pytest.fixture
def cello_like_fit():
    pairs = [(n * F2_HZ, p) for n, p in sorted(CELLO_LIKE_POWERS.items())]
    return make_fit(pairs, F2_HZ)


class TestLoadReports:
    def test_valid_row(self):
        rows = load_reports("sample_id,listener_id,pitch,certainty,tuning\n"
                            "cello_f2,L1,F2,1.0,in-tune\n")
        assert len(rows) == 1
        assert rows[0].pitch == PitchName("F", 2)
        assert rows[0].certainty == 1.0

    def test_certainty_out_of_range_names_row(self):
        text = ("sample_id,listener_id,pitch,certainty,tuning\n"
                "s,L1,F2,0.5,in-tune\n"
                "s,L1,F3,1.3,in-tune\n")
        with pytest.raises(FormatError, match="row 2"):
            load_reports(text)

    def test_empty_file_with_header(self):
        assert load_reports("sample_id,listener_id,pitch,certainty,tuning\n") == []

    def test_header_mismatch_hard_fails(self):
        with pytest.raises(FormatError, match="header"):
            load_reports("sample,listener,pitch,certainty,tuning\ns,L,F2,1,in-tune\n")

    def test_malformed_pitch_names_row(self):
        text = ("sample_id,listener_id,pitch,certainty,tuning\n"
                "s,L1,H9,1.0,in-tune\n")
        with pytest.raises(FormatError, match="row 1"):
            load_reports(text)

    def test_unknown_tuning_flag(self):
        text = ("sample_id,listener_id,pitch,certainty,tuning\n"
                "s,L1,F2,1.0,sharp\n")
        with pytest.raises(FormatError, match="row 1"):
            load_reports(text)

    def test_accepts_file_object(self):
        stream = io.StringIO("sample_id,listener_id,pitch,certainty,tuning\n"
                             "s,L1,A#3+21.5ct,0.5,too-low\n")
        rows = load_reports(stream)
        assert rows[0].pitch.cents == pytest.approx(21.5)


class TestWeightedPitchCount:
    def test_single_listener_sums(self):
        reports = [ListenerReport("s", "L1", PitchName("F", 2), 1.0),
                   ListenerReport("s", "L1", PitchName("F", 3), 0.5)]
        assert weighted_pitch_count(reports, "s") == pytest.approx(1.5)

    def test_mean_over_listeners(self):
        reports = [ListenerReport("s", "L1", PitchName("F", 2), 1.0),
                   ListenerReport("s", "L2", PitchName("F", 2), 1.0),
                   ListenerReport("s", "L2", PitchName("F", 3), 1.0)]
        assert weighted_pitch_count(reports, "s") == pytest.approx(1.5)

    def test_no_reports_is_none(self):
        assert weighted_pitch_count([], "s") is None

    def test_order_invariant(self):
        rng = np.random.default_rng(3)
        reports = [ListenerReport("s", f"L{i%4}", PitchName("C", 3), float(c))
                   for i, c in enumerate(rng.uniform(0, 1, 20))]
        expected = weighted_pitch_count(reports, "s")
        for _ in range(5):
            perm = list(rng.permutation(len(reports)))
            assert weighted_pitch_count([reports[i] for i in perm], "s") == \
                pytest.approx(expected)

    def test_equals_count_when_all_certainties_one(self):
        reports = [ListenerReport("s", "L1", PitchName("C", 3), 1.0),
                   ListenerReport("s", "L1", PitchName("E", 3), 1.0),
                   ListenerReport("s", "L1", PitchName("G", 3), 1.0)]
        assert weighted_pitch_count(reports, "s") == 3.0

    def test_bounded_by_max_reports_per_listener(self):
        rng = np.random.default_rng(77)
        classes = ["C", "D", "E", "F", "G", "A", "B"]
        reports = [
            ListenerReport("s", f"L{int(rng.integers(1, 5))}",
                           PitchName(classes[int(rng.integers(0, 7))],
                                     int(rng.integers(1, 6))),
                           float(rng.uniform(0.0, 1.0)))
            for _ in range(40)
        ]
        count = weighted_pitch_count(reports, "s")
        per_listener = {}
        for r in reports:
            per_listener[r.listener_id] = per_listener.get(r.listener_id, 0) + 1
        assert 0.0 <= count <= max(per_listener.values())

    def test_committed_fixture_matches_hand_oracle(self):
        reports = load_reports(f"{FIXTURES}/control_f2_reports.csv")
        with open(f"{FIXTURES}/control_f2_expected.json") as fh:
            expected = json.load(fh)
        got = weighted_pitch_count(reports, "control_f2")
        assert got == pytest.approx(expected["mean_weighted_count"], abs=1e-9)
        # spreadsheet arithmetic, written out: per-listener sums then mean
        sums = [1.0, 1.4, 1.25, 0.8, 1.6, 1.0, 1.0, 2.5, 0.9, 1.4]
        assert got == pytest.approx(sum(sums) / len(sums))


def brute_force_min_d(pitch, fit, partials, tolerance=50.0):
    """Exhaustive enumeration of every target at every octave shift."""
    pitch_freq = pitch_to_freq(pitch)
    tol = 200.0 if pitch_freq < 45.0 else tolerance
    assigned = {a.partial_index: a.harmonic for a in fit.assignments}
    targets = [(fit.f0, 0)]
    targets += [(fit.partial_frequencies[a.partial_index], 1)
                for a in fit.assignments if a.harmonic != 1]
    targets += [(p.frequency, 1) for i, p in enumerate(partials) if i not in assigned]
    best = None
    for freq, base in targets:
        for shift in (-2, -1, 0, 1, 2):
            interval = 1200.0 * math.log2(pitch_freq / (freq * 2.0 ** shift))
            if abs(interval) <= tol:
                d = base + abs(shift)
                best = d if best is None else min(best, d)
    return best


class TestAssociatePerceivedPitch:
    def test_f0_is_distance_zero(self, cello_like_fit):
        fit, parts = cello_like_fit
        assoc = associate_perceived_pitch(PitchName("F", 2), fit, parts)
        assert assoc.distance_d == 0
        assert assoc.label == "f0"
        assert assoc.octave_shift == 0

    def test_harmonic_two_is_distance_one(self, cello_like_fit):
        fit, parts = cello_like_fit
        assoc = associate_perceived_pitch(PitchName("F", 3), fit, parts)
        assert assoc.distance_d == 1
        assert assoc.label == "h2"

    def test_c5_prefers_salient_h12_one_octave_below(self, cello_like_fit):
        # harmonic 6 is absent; C5 ties at d=2 between h3+1 and h12-1 and the
        # louder h12 partial wins
        fit, parts = cello_like_fit
        assoc = associate_perceived_pitch(PitchName("C", 5), fit, parts)
        assert assoc.distance_d == 2
        assert assoc.label == "h12-1"
        assert assoc.octave_shift == -1

    def test_no_match_returns_none_association(self, cello_like_fit):
        fit, parts = cello_like_fit
        assoc = associate_perceived_pitch(PitchName("F#", 2, 45.0), fit, parts)
        assert assoc.target == "none"
        assert assoc.distance_d is None
        assert assoc.label == "none"

    def test_unassigned_partial_matches_by_pitch_name(self):
        fit, parts = make_fit([(100.0, 1.0), (200.0, 0.8), (317.0, 0.9)], 100.0)
        # 317 Hz is ~63.9 cents above E4's harmonic slot, unassigned at 35 ct
        assert fit.unassigned_partials == (2,)
        target = PitchName("D#", 4)  # 311.1 Hz, ~33 cents below the partial
        assoc = associate_perceived_pitch(target, fit, parts)
        assert assoc.target == "partial"
        assert assoc.distance_d == 1

    def test_low_register_widened_window(self):
        fit, parts = make_fit([(37.8, 1.0), (75.6, 0.5)], 37.8)
        # D1 = 36.71 Hz is 51 cents below 37.8: outside the standard window,
        # inside the widened low-register window
        assoc = associate_perceived_pitch(PitchName("D", 1), fit, parts)
        assert assoc.distance_d == 0

    def test_minimal_d_matches_brute_force_on_50_pairs(self, cello_like_fit):
        fits = [cello_like_fit,
                make_fit([(82.41, 0.8), (123.47, 1.0), (164.81, 0.7),
                          (206.0, 0.6), (247.0, 0.5)], 41.2),
                make_fit([(55.0, 1.0), (165.0, 0.7), (275.0, 0.5), (385.0, 0.3)], 55.0)]
        rng = np.random.default_rng(50)
        checked = 0
        while checked < 50:
            fit, parts = fits[int(rng.integers(0, len(fits)))]
            midi = int(rng.integers(24, 96))
            pitch = PitchName(
                ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"][midi % 12],
                midi // 12 - 1)
            expected = brute_force_min_d(pitch, fit, parts)
            got = associate_perceived_pitch(pitch, fit, parts)
            assert got.distance_d == expected, f"pitch {pitch}"
            checked += 1


class TestAggregatePerception:
    def test_empty_reports(self):
        fit, parts = make_fit([(100.0, 1.0), (200.0, 0.5)], 100.0)
        agg = aggregate_perception([], fit, parts)
        assert agg.bins == ()
        assert agg.mean_weighted_count is None

    def test_fixture_aggregate(self, cello_like_fit):
        fit, parts = cello_like_fit
        reports = load_reports(f"{FIXTURES}/cello_like_f2_reports.csv")
        agg = aggregate_perception(reports, fit, parts)
        assert agg.total_reports == len(reports)
        by_label = {b.label: b for b in agg.bins}
        assert by_label["F2"].association_label == "f0"
        assert by_label["F2"].association_class == "d0"
        assert by_label["F3"].association_label == "h2"
        assert by_label["F3"].association_class == "d1"
        assert by_label["C5"].association_label == "h12-1"
        assert by_label["C5"].association_class == "d2"

    def test_low_register_merging(self):
        fit, parts = make_fit([(37.8, 1.0), (75.6, 0.5)], 37.8)
        reports = load_reports(f"{FIXTURES}/lowreg_378_reports.csv")
        agg = aggregate_perception(reports, fit, parts)
        assert len(agg.bins) == 1
        assert agg.bins[0].label == "C1/D1"
        assert agg.bins[0].count == 2
        assert agg.total_reports == 2

    def test_mid_register_pitches_not_merged(self):
        fit, parts = make_fit([(220.0, 1.0), (440.0, 0.5)], 220.0)
        reports = [ListenerReport("s", "L1", PitchName("A", 3), 1.0),
                   ListenerReport("s", "L2", PitchName("B", 3), 1.0)]
        agg = aggregate_perception(reports, fit, parts)
        assert len(agg.bins) == 2

    def test_duplicates_kept_and_flagged(self):
        fit, parts = make_fit([(100.0, 1.0), (200.0, 0.5)], 100.0)
        reports = [ListenerReport("s", "L1", PitchName("G", 2), 0.9),
                   ListenerReport("s", "L1", PitchName("G", 2), 0.4)]
        agg = aggregate_perception(reports, fit, parts)
        assert agg.total_reports == 2
        assert agg.duplicate_reports == 1

    def test_mixed_samples_rejected(self):
        fit, parts = make_fit([(100.0, 1.0), (200.0, 0.5)], 100.0)
        reports = [ListenerReport("a", "L1", PitchName("C", 3), 1.0),
                   ListenerReport("b", "L1", PitchName("C", 3), 1.0)]
        with pytest.raises(FormatError):
            aggregate_perception(reports, fit, parts)

    def test_tallies_sum_to_report_count(self, cello_like_fit):
        fit, parts = cello_like_fit
        rng = np.random.default_rng(8)
        reports = [
            ListenerReport("s", f"L{int(rng.integers(1, 6))}",
                           PitchName(["F", "C", "A"][int(rng.integers(0, 3))],
                                     int(rng.integers(2, 6))),
                           float(rng.uniform(0, 1)))
            for _ in range(30)
        ]
        agg = aggregate_perception(reports, fit, parts)
        assert agg.total_reports == 30
