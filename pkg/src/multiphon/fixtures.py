"""The committed fixture corpus: one desk-scale analogue per tone family.

``multiphon fixtures`` renders these specs to WAV deterministically; the
test suite analyses them end to end.  All numbers are frozen literals so a
regenerated corpus is byte-identical run to run.
"""

from __future__ import annotations

import os

from multiphon.audio_io import write_wav
from multiphon.synthesis import ToneSpec, render_tone, tonespec_to_json

F2_HZ = 87.3070578583
E2_HZ = 82.4068892282
E4_HZ = 329.6275569129

# Inharmonic sideband mix around a 236 Hz carrier, nominal 37.8 Hz spacing
# with a couple of percent positional scatter; the positions are not integer
# multiples of the spacing.
FIRE_SIDEBANDS = [
    {"frequency_hz": 123.17, "power": 0.0625},
    {"frequency_hz": 161.60, "power": 0.25},
    {"frequency_hz": 198.62, "power": 0.7225},
    {"frequency_hz": 236.00, "power": 1.0},
    {"frequency_hz": 273.50, "power": 0.7225},
    {"frequency_hz": 312.73, "power": 0.25},
    {"frequency_hz": 347.16, "power": 0.0625},
]

# Five-partial strongly inharmonic set in the style of a prepared-piano
# multiphonic; positions do not sit on any common harmonic grid.
WALTER_PARTIALS = [
    {"frequency_hz": 125.0, "power": 0.5},
    {"frequency_hz": 185.0, "power": 1.0},
    {"frequency_hz": 252.0, "power": 0.8},
    {"frequency_hz": 319.0, "power": 0.6},
    {"frequency_hz": 390.0, "power": 0.4},
]

# Cello-like F2 tone for the listening-report fixtures: harmonics 1..12 with
# harmonic 6 absent and harmonic 12 salient, so a perceived C5 associates one
# octave below the loud C6 partial rather than with the missing harmonic 6.
CELLO_LIKE_POWERS = {1: 0.55, 2: 0.8, 3: 0.1, 4: 0.35, 5: 0.45,
                     7: 0.3, 8: 0.2, 9: 0.12, 10: 0.3, 11: 0.18, 12: 0.9}
CELLO_LIKE_PARTIALS = [
    {"frequency_hz": n * F2_HZ, "power": p} for n, p in sorted(CELLO_LIKE_POWERS.items())
]

FIXTURE_SPECS: dict[str, ToneSpec] = {
    "control_f2": ToneSpec("harmonic", {"f0": F2_HZ, "n": 12, "rolloff_db_per_oct": 3.0}),
    "odd55_bass": ToneSpec("odd-harmonic", {"f0": 55.0, "n_odd": 6, "rolloff_db_per_oct": 2.0}),
    "powerchord_e2": ToneSpec("power-chord", {"root": E2_HZ, "drive": 2.0}),
    "fm_dist_bass": ToneSpec("fm", {"carrier": E4_HZ, "modulator": E2_HZ,
                                    "index": 1.5, "drive": 1.0}),
    "fm_carrier236": ToneSpec("fm", {"carrier": 236.0, "modulator": 32.0, "index": 2.0}),
    "sideband_mix_378": ToneSpec("partials", {"partials": FIRE_SIDEBANDS}),
    "inharmonic_piano": ToneSpec("partials", {"partials": WALTER_PARTIALS}),
    "cello_like_f2": ToneSpec("partials", {"partials": CELLO_LIKE_PARTIALS}),
}


def regenerate(out_dir: str) -> list[str]:
    """Render the corpus: a tonespec JSON and a float32 WAV per fixture."""
    spec_dir = os.path.join(out_dir, "tonespecs")
    audio_dir = os.path.join(out_dir, "audio")
    os.makedirs(spec_dir, exist_ok=True)
    os.makedirs(audio_dir, exist_ok=True)
    written = []
    for name in sorted(FIXTURE_SPECS):
        spec = FIXTURE_SPECS[name]
        spec_path = os.path.join(spec_dir, f"{name}.json")
        with open(spec_path, "w") as fh:
            fh.write(tonespec_to_json(spec) + "\n")
        written.append(spec_path)
        wav_path = os.path.join(audio_dir, f"{name}.wav")
        samples = render_tone(spec)
        write_wav(wav_path, samples, int(spec.rate), bits=32,
                  comment=tonespec_to_json(spec))
        written.append(wav_path)
    return written
