"""multiphon: pitch analysis for multiphonic tones.

Submodules
----------
tones        core types and pitch-name arithmetic
spectral     power spectra, smoothing, partial extraction
loudness     equal-loudness (ISO 226) spectrum weighting
temporal     autocorrelation f0, spacing statistics, approximate GCD
harmonicity  harmonic-series fitting and quasi-harmonic classification
synthesis    tone generators and additive resynthesis
perception   listening-report ingestion and pitch association
trackers     pitch-tracker trace aggregation and comparison
pipeline     full analysis chain and report serialisation
cli          command-line entry points
"""

__version__ = "0.1.0"

from multiphon.tones import (  # noqa: E402,F401
    Partial, PitchName, Spectrum, cents_between, fold_cents, freq_to_pitch,
    parse_pitch, pitch_to_freq,
)
