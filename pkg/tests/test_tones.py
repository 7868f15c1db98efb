import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiphon.errors import InvalidFrequencyError, InvalidPitchError
from multiphon.tones import (PitchName, cents_between, fold_cents, freq_to_pitch,
                             parse_pitch, pitch_to_freq)


class TestFreqToPitch:
    def test_reference_maps_to_itself(self):
        p = freq_to_pitch(440.0)
        assert (p.pitch_class, p.octave) == ("A", 4)
        assert p.cents == pytest.approx(0.0, abs=1e-9)

    def test_f2_closed_form(self):
        # 440 * 2^(-28/12) = 87.307 Hz
        p = freq_to_pitch(440.0 * 2.0 ** (-28.0 / 12.0))
        assert (p.pitch_class, p.octave) == ("F", 2)
        assert p.cents == pytest.approx(0.0, abs=0.1)

    def test_236_hz_is_sharp_a_sharp_3(self):
        # 1200*log2(236/233.082) = +21.5 cents
        p = freq_to_pitch(236.0)
        assert (p.pitch_class, p.octave) == ("A#", 3)
        assert p.cents == pytest.approx(21.5, abs=0.1)

    @pytest.mark.parametrize("bad", [0.0, -5.0, math.inf, math.nan])
    def test_rejects_bad_input(self, bad):
        with pytest.raises(InvalidFrequencyError):
            freq_to_pitch(bad)

    def test_custom_reference(self):
        p = freq_to_pitch(442.0, reference=442.0)
        assert (p.pitch_class, p.octave, p.cents) == ("A", 4, 0.0)


class TestPitchToFreq:
    def test_a4(self):
        assert pitch_to_freq(PitchName("A", 4)) == pytest.approx(440.0)

    def test_octave_halving(self):
        assert pitch_to_freq(PitchName("A", 3)) == pytest.approx(220.0)

    def test_e1_closed_form(self):
        # 440 * 2^(-41/12) = 41.203 Hz
        assert pitch_to_freq(PitchName("E", 1)) == pytest.approx(41.2034, abs=1e-3)

    def test_cent_offset(self):
        f = pitch_to_freq(PitchName("A", 4, 50.0 - 1e-9))
        assert f == pytest.approx(440.0 * 2 ** (50.0 / 1200.0), rel=1e-9)


class TestCentsBetween:
    def test_zero(self):
        assert cents_between(440.0, 440.0) == 0.0

    def test_octave(self):
        assert cents_between(220.0, 440.0) == pytest.approx(1200.0)

    def test_closed_form(self):
        assert cents_between(233.082, 236.0) == pytest.approx(21.5, abs=0.1)

    @given(st.floats(20.0, 8000.0), st.floats(20.0, 8000.0))
    def test_antisymmetric(self, a, b):
        assert cents_between(a, b) == pytest.approx(-cents_between(b, a), abs=1e-9)

    def test_rejects_nonpositive(self):
        with pytest.raises(InvalidFrequencyError):
            cents_between(-1.0, 440.0)


class TestRoundTrip:
    def test_round_trip_10000_random_frequencies(self):
        rng = np.random.default_rng(1234)
        freqs = rng.uniform(20.0, 8000.0, 10000)
        for f in freqs:
            back = pitch_to_freq(freq_to_pitch(float(f)))
            assert abs(back - f) / f < 1e-6

    @given(st.floats(20.0, 8000.0))
    @settings(max_examples=300)
    def test_round_trip_property(self, f):
        assert pitch_to_freq(freq_to_pitch(f)) == pytest.approx(f, rel=1e-6)

    def test_cents_stay_in_half_open_interval(self):
        rng = np.random.default_rng(99)
        for f in rng.uniform(20.0, 8000.0, 2000):
            p = freq_to_pitch(float(f))
            assert -50.0 <= p.cents < 50.0

    def test_exact_half_semitone_resolves_upward(self):
        f = 440.0 * 2 ** (50.0 / 1200.0)  # halfway between A4 and A#4
        p = freq_to_pitch(f)
        assert (p.pitch_class, p.octave) == ("A#", 4)
        assert p.cents == pytest.approx(-50.0, abs=1e-9)


class TestMonotonicity:
    def test_pitch_order_follows_frequency_order(self):
        rng = np.random.default_rng(7)
        freqs = np.sort(rng.uniform(20.0, 8000.0, 500))
        keys = [freq_to_pitch(float(f)).sort_key() for f in freqs]
        assert keys == sorted(keys)


class TestTextFormat:
    @pytest.mark.parametrize("text,klass,octave,cents", [
        ("A#3+21.5ct", "A#", 3, 21.5),
        ("A♯3+21.5ct", "A#", 3, 21.5),
        ("F2", "F", 2, 0.0),
        ("C-1", "C", -1, 0.0),
        ("B1-13.25ct", "B", 1, -13.25),
    ])
    def test_parse(self, text, klass, octave, cents):
        p = parse_pitch(text)
        assert (p.pitch_class, p.octave) == (klass, octave)
        assert p.cents == pytest.approx(cents)

    def test_format_round_trip(self):
        p = PitchName("A#", 3, 21.5)
        assert p.as_text() == "A#3+21.5ct"
        assert parse_pitch(p.as_text()) == p

    def test_zero_cents_omitted(self):
        assert PitchName("F", 2).as_text() == "F2"

    @pytest.mark.parametrize("bad", ["H2", "A4+ct", "", "A#", "Cb3", "A4++3ct"])
    def test_parse_rejects(self, bad):
        with pytest.raises(InvalidPitchError):
            parse_pitch(bad)

    def test_pitchname_invariants(self):
        with pytest.raises(InvalidPitchError):
            PitchName("A", 4, 50.0)
        with pytest.raises(InvalidPitchError):
            PitchName("X", 4, 0.0)


class TestFoldCents:
    @pytest.mark.parametrize("interval,folded", [
        (0.0, 0.0), (1200.0, 0.0), (-2400.0, 0.0),
        (1250.0, 50.0), (-1250.0, -50.0), (599.0, 599.0), (601.0, -599.0),
    ])
    def test_examples(self, interval, folded):
        assert fold_cents(interval) == pytest.approx(folded)
