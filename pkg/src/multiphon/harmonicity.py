"""Least-deviating harmonic series fitting and harmonicity classification.

The fitted series minimises the power-weighted RMS cent deviation of each
partial from its nearest harmonic position over a dense logarithmic f0 grid
(1-cent steps).  Exact subharmonic ambiguity (f0/2 fits whenever f0 does) is
resolved toward the highest f0 whose objective lies within a small slack of
the optimum, after which the fit is polished in closed form with the
harmonic numbers held fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from multiphon.errors import (ConfigurationError, DegenerateFitError,
                              InsufficientDataError)
from multiphon.kernels import harmonic_deviation_scan
from multiphon.spectral import (PeakConfig, WindowConfig, compute_power_spectrum,
                                extract_partials, smooth_spectrum, _parabolic_refine)
from multiphon.temporal import (F0Estimate, SpacingProfile,
                                envelope_autocorrelation_f0, partial_spacings)
from multiphon.tones import Partial, cents_between, fold_cents

DEFAULT_ASSIGNMENT_TOLERANCE_CENTS = 35.0

# The fitted series may start above the lowest partial (missing fundamental),
# but not deeper than harmonic 4: an unbounded search floor lets jittered
# inharmonic sets lock onto spurious deep subharmonics.
MAX_FUNDAMENTAL_SUBDIVISION = 4.05

_SLACK_ABS_CENTS = 0.5
_SLACK_REL = 0.05


@dataclass(frozen=True)
class HarmonicAssignment:
    partial_index: int
    harmonic: int
    deviation_cents: float


@dataclass(frozen=True)
class HarmonicFit:
    """A fitted harmonic series over a list of partials.

    ``assignments`` map partial indices to harmonic numbers (strictly
    increasing with frequency, unique per harmonic); partials that deviate
    beyond the assignment tolerance are listed in ``unassigned_partials``.
    The source partial frequencies and powers travel with the fit so that
    downstream association and serialisation need no second data path.
    """

    f0: float
    assignments: tuple[HarmonicAssignment, ...]
    rms_deviation_cents: float
    unassigned_partials: tuple[int, ...]
    partial_frequencies: tuple[float, ...]
    partial_powers: tuple[float, ...]

    @property
    def assigned_fraction(self) -> float:
        total = len(self.partial_frequencies)
        return len(self.assignments) / total if total else 0.0

    @property
    def harmonic_coverage(self) -> float:
        """Assigned-harmonic count over the highest assigned harmonic number."""
        if not self.assignments:
            return 0.0
        return len(self.assignments) / max(a.harmonic for a in self.assignments)

    def harmonic_frequency(self, n: int) -> float:
        return n * self.f0


def default_fit_search(partials: list[Partial],
                       base: tuple[float, float] = (20.0, 2000.0)) -> tuple[float, float]:
    """Search range for fitting: the configured range with its floor raised to
    lowest-partial / 4.05 so the fundamental sits at most 4 harmonics deep."""
    lo, hi = base
    if partials:
        lo = max(lo, min(p.frequency for p in partials) / MAX_FUNDAMENTAL_SUBDIVISION)
        hi = min(hi, max(p.frequency for p in partials) * 1.02)
    return lo, max(hi, lo * 1.01)


def _fit_weights(partials: list[Partial]) -> np.ndarray:
    powers = np.array([p.power for p in partials], dtype=np.float64)
    if np.all(powers <= 0):
        return np.ones(len(partials))
    return np.maximum(powers, 0.0)


def fit_least_deviating_series(partials: list[Partial],
                               search: tuple[float, float] = (20.0, 2000.0),
                               tolerance_cents: float = DEFAULT_ASSIGNMENT_TOLERANCE_CENTS,
                               ) -> HarmonicFit:
    """Fit the f0 whose harmonic grid deviates least from the partials.

    The objective is the power-weighted RMS cent deviation from nearest
    harmonics; ties toward subharmonics are broken by preferring the largest
    f0 within slack of the optimum.  Raises InsufficientDataError for fewer
    than two partials and DegenerateFitError when no partial can be assigned
    at the optimum.
    """
    if len(partials) < 2:
        raise InsufficientDataError("harmonic fit needs at least 2 partials")
    f_min, f_max = float(search[0]), float(search[1])
    if not 0.0 < f_min < f_max:
        raise ConfigurationError(f"invalid f0 search range [{f_min}, {f_max}]")

    freqs = np.array([p.frequency for p in partials], dtype=np.float64)
    weights = _fit_weights(partials)

    n_cand = int(np.ceil(1200.0 * np.log2(f_max / f_min))) + 1
    grid = f_min * 2.0 ** (np.arange(n_cand) / 1200.0)
    objective = harmonic_deviation_scan(freqs, weights, grid)

    j_star = float(objective.min())
    slack = max(_SLACK_ABS_CENTS, _SLACK_REL * j_star)
    f0 = float(grid[np.nonzero(objective <= j_star + slack)[0].max()])

    # polish with harmonic numbers frozen: the cents objective is minimised by
    # the weighted geometric mean of partial/harmonic ratios
    for _ in range(3):
        n = np.maximum(np.floor(freqs / f0 + 0.5), 1.0)
        f0 = float(np.exp(np.sum(weights * np.log(freqs / n)) / np.sum(weights)))

    fit = assign_harmonic_numbers(partials, f0, tolerance_cents)
    if not fit.assignments:
        raise DegenerateFitError(
            f"no partial within {tolerance_cents} cents of a harmonic of {f0:.2f} Hz")
    return fit


def assign_harmonic_numbers(partials: list[Partial], f0: float,
                            tolerance_cents: float = DEFAULT_ASSIGNMENT_TOLERANCE_CENTS,
                            ) -> HarmonicFit:
    """Assign each partial to its nearest harmonic of ``f0`` within tolerance.

    Harmonic numbers are unique: when two partials round to the same
    harmonic, the closer one wins and the other joins the unassigned list.
    """
    if f0 <= 0:
        raise ConfigurationError(f"f0 must be positive, got {f0}")
    freqs = np.array([p.frequency for p in partials], dtype=np.float64)
    weights = _fit_weights(partials)

    by_harmonic: dict[int, tuple[int, float]] = {}
    for i, f in enumerate(freqs):
        n = max(1, int(np.floor(f / f0 + 0.5)))
        dev = cents_between(n * f0, f)
        if abs(dev) > tolerance_cents:
            continue
        held = by_harmonic.get(n)
        if held is None or abs(dev) < abs(held[1]):
            by_harmonic[n] = (i, dev)

    taken = {i for i, _ in by_harmonic.values()}
    assignments = tuple(
        HarmonicAssignment(i, n, dev)
        for n, (i, dev) in sorted(by_harmonic.items())
    )
    unassigned = tuple(i for i in range(len(partials)) if i not in taken)

    if assignments:
        idx = np.array([a.partial_index for a in assignments])
        devs = np.array([a.deviation_cents for a in assignments])
        w = weights[idx]
        rms = float(np.sqrt(np.sum(w * devs**2) / np.sum(w)))
    else:
        rms = float("inf")
    return HarmonicFit(
        f0=float(f0),
        assignments=assignments,
        rms_deviation_cents=rms,
        unassigned_partials=unassigned,
        partial_frequencies=tuple(float(f) for f in freqs),
        partial_powers=tuple(float(p.power) for p in partials),
    )


@dataclass(frozen=True)
class ClassifierThresholds:
    """Decision thresholds for the quasi-harmonic / inharmonic rule."""

    min_assigned_fraction: float = 0.8
    max_rms_deviation_cents: float = 25.0
    max_spacing_fold_cents: float = 50.0
    min_harmonic_coverage: float = 0.5  # exclusive: coverage must exceed this


@dataclass(frozen=True)
class HarmonicityEvidence:
    assigned_fraction: float
    rms_deviation_cents: float
    spacing_center_hz: float
    spacing_vs_f0_folded_cents: float
    spacing_vs_first_partial_ratio: float
    harmonic_coverage: float


@dataclass(frozen=True)
class HarmonicityClass:
    """Classification label plus the evidence that produced it."""

    label: str  # "quasi-harmonic" or "inharmonic"
    evidence: HarmonicityEvidence


def classify_harmonicity(fit: HarmonicFit, profile: SpacingProfile,
                         thresholds: ClassifierThresholds | None = None,
                         ) -> HarmonicityClass:
    """Label a tone quasi-harmonic or inharmonic from fit and spacing evidence.

    Inharmonic when any of: the assigned fraction falls below 0.8, the RMS
    assignment deviation exceeds 25 cents, the spacing centre disagrees with
    the fitted f0 by more than 50 cents after octave folding (odd-harmonic
    tones fold onto the fundamental), or the assigned harmonics cover no more
    than half of the series up to the highest assigned number (a sparse fit
    is no series at all).  The rule is a pure function of the evidence.
    """
    if thresholds is None:
        thresholds = ClassifierThresholds()
    fold = fold_cents(cents_between(fit.f0, profile.center))
    first = min(fit.partial_frequencies) if fit.partial_frequencies else float("nan")
    evidence = HarmonicityEvidence(
        assigned_fraction=fit.assigned_fraction,
        rms_deviation_cents=fit.rms_deviation_cents,
        spacing_center_hz=profile.center,
        spacing_vs_f0_folded_cents=fold,
        spacing_vs_first_partial_ratio=profile.center / first,
        harmonic_coverage=fit.harmonic_coverage,
    )
    inharmonic = (
        evidence.assigned_fraction < thresholds.min_assigned_fraction
        or evidence.rms_deviation_cents > thresholds.max_rms_deviation_cents
        or abs(evidence.spacing_vs_f0_folded_cents) > thresholds.max_spacing_fold_cents
        or evidence.harmonic_coverage <= thresholds.min_harmonic_coverage
    )
    return HarmonicityClass("inharmonic" if inharmonic else "quasi-harmonic", evidence)


@dataclass(frozen=True)
class CarrierModulation:
    """Carrier/modulation decomposition of a sideband-structured tone.

    ``carrier`` comes from the smoothed spectrum's envelope peak,
    ``modulation`` from complex-envelope autocorrelation of the raw frame,
    and ``sideband_spacing`` is the spacing-profile centre of the raw
    partials (None with fewer than two partials).
    """

    carrier: F0Estimate
    modulation: F0Estimate
    sideband_spacing: float | None


DEFAULT_MODULATION_SEARCH = (8.0, 120.0)
DEFAULT_CARRIER_SEARCH = (50.0, 5000.0)


def decompose_carrier_modulation(samples: np.ndarray, rate: float,
                                 cfg: WindowConfig | None = None,
                                 smoothing_bandwidth_hz: float = 96.0,
                                 *,
                                 peak_cfg: PeakConfig | None = None,
                                 modulation_search: tuple[float, float] = DEFAULT_MODULATION_SEARCH,
                                 carrier_search: tuple[float, float] = DEFAULT_CARRIER_SEARCH,
                                 ) -> CarrierModulation:
    """Split a tone into its spectral carrier and temporal modulation rate.

    The carrier is the parabolic-refined maximum of the smoothed raw
    spectrum inside ``carrier_search``; its salience is the fraction of
    smoothed power under the search window that the peak bin carries.  (The
    raw spectrum is used rather than the weighted one because the loudness
    gain slope pulls the smoothed maximum of a symmetric sideband cluster
    off its centre.)  An unmodulated tone yields a no-estimate modulation.
    When the envelope has no dominant peak the carrier is a no-estimate
    result.  If the estimates come out inverted (carrier at or below the
    modulation rate) the decomposition is ambiguous and the modulation is
    demoted to no-estimate.
    """
    if cfg is None:
        cfg = WindowConfig()
    raw = compute_power_spectrum(samples, rate, cfg)
    smoothed = smooth_spectrum(raw, smoothing_bandwidth_hz)

    lo = np.searchsorted(smoothed.bin_frequencies, carrier_search[0])
    hi = np.searchsorted(smoothed.bin_frequencies, carrier_search[1])
    window = smoothed.bin_powers[lo:hi]
    if len(window) == 0 or not np.any(window > 0):
        carrier = F0Estimate.none("smoothed-spectrum")
    else:
        k = lo + int(np.argmax(window))
        log_power = np.log(np.maximum(smoothed.bin_powers, np.max(window) * 1e-30))
        offset, _ = _parabolic_refine(log_power, k)
        freq = float(smoothed.bin_frequencies[k] + offset * smoothed.bin_spacing)
        salience = float(np.clip(smoothed.bin_powers[k] / np.sum(window), 0.0, 1.0))
        carrier = F0Estimate(freq, salience, "smoothed-spectrum")

    modulation = envelope_autocorrelation_f0(samples, rate, modulation_search)

    raw_partials = extract_partials(raw, peak_cfg)
    if len(raw_partials) >= 2:
        spacing = partial_spacings(raw_partials).center
    else:
        spacing = None

    if (carrier.frequency is not None and modulation.frequency is not None
            and carrier.frequency <= modulation.frequency):
        modulation = F0Estimate.none("envelope-autocorrelation")
    return CarrierModulation(carrier, modulation, spacing)
