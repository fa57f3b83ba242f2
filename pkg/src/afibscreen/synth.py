"""Seeded synthetic sinus-rhythm and AFib-like recordings.

Sinus rhythm is a respiratory sinusoid around a mean interval plus a little
Gaussian jitter, so neighbouring intervals are correlated. AFib intervals are
independent draws from a shifted gamma distribution with a much larger
spread ("irregularly irregular"). Waveforms put one pulse (PPG) or one
narrow spike (ECG) at every beat and keep the true beat times alongside.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidRate, InvalidSpec
from .preprocess import (
    MAX_INTERVAL_MS,
    MIN_INTERVAL_MS,
    IBISequence,
    RawRecording,
    SignalKind,
)

# AFib interval spread relative to the spec's variability
AFIB_SPREAD = 4.0
SINUS_JITTER = 0.25
# respiratory cycle length in beats
RESP_PERIOD_BEATS = (5.0, 7.0)

PULSE_FRACTION = 0.4  # PPG pulse half-width as a fraction of the nearest gap
PULSE_MAX_HALF_S = 0.15
SPIKE_WIDTH_S = 0.040  # full width of the ECG spike
DRIFT_HZ = 0.05

MIN_RATE = {SignalKind.PPG: 20.0, SignalKind.ECG: 100.0}


class Rhythm(enum.IntEnum):
    SINUS = 0
    AFIB = 1

    @classmethod
    def parse(cls, value) -> "Rhythm":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            return cls[value.upper()]
        return cls(int(value))


@dataclass(frozen=True)
class RhythmSpec:
    kind: Rhythm
    mean_ibi: float = 800.0
    variability: float = 30.0
    duration: float = 30.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Rhythm.parse(self.kind))
        if not self.duration > 0:
            raise InvalidSpec(f"duration must be positive, got {self.duration}")
        if not MIN_INTERVAL_MS <= self.mean_ibi <= MAX_INTERVAL_MS:
            raise InvalidSpec(f"mean_ibi {self.mean_ibi} outside [250, 3000] ms")
        if not self.variability >= 0:
            raise InvalidSpec(f"variability must be >= 0, got {self.variability}")


@dataclass(frozen=True)
class SyntheticRecording(RawRecording):
    """A :class:`RawRecording` that also carries the true pulse-peak times."""

    true_beats: np.ndarray | None = None


def random_spec(kind: Rhythm | str, seed: int, duration: float = 30.0) -> RhythmSpec:
    """Draw a plausible per-subject spec; the cohort harness uses one seed per subject."""
    kind = Rhythm.parse(kind)
    rng = np.random.default_rng([seed, 1])
    if kind is Rhythm.SINUS:
        mean_ibi = rng.uniform(650.0, 1100.0)
        variability = rng.uniform(15.0, 45.0)
    else:
        mean_ibi = rng.uniform(500.0, 900.0)
        variability = rng.uniform(25.0, 50.0)
    return RhythmSpec(kind, mean_ibi, variability, duration, seed)


def _fit_duration(intervals: np.ndarray, duration: float) -> np.ndarray:
    keep = np.cumsum(intervals) <= duration * 1000.0
    return intervals[keep]


def gen_ibis(spec: RhythmSpec) -> IBISequence:
    rng = np.random.default_rng([spec.seed, 0])
    n = int(math.ceil(spec.duration * 1000.0 / MIN_INTERVAL_MS)) + 1
    v = spec.variability

    if spec.kind is Rhythm.SINUS:
        period = rng.uniform(*RESP_PERIOD_BEATS)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        j = np.arange(n)
        intervals = spec.mean_ibi + v * np.sin(2.0 * np.pi * j / period + phase)
        intervals = intervals + rng.normal(0.0, SINUS_JITTER * v, n) if v > 0 else intervals
    else:
        sd = AFIB_SPREAD * v
        excess = spec.mean_ibi - MIN_INTERVAL_MS
        if sd == 0 or excess <= 0:
            intervals = np.full(n, spec.mean_ibi)
        else:
            scale = sd**2 / excess
            intervals = MIN_INTERVAL_MS + rng.gamma(excess / scale, scale, n)

    intervals = np.clip(intervals, MIN_INTERVAL_MS, MAX_INTERVAL_MS)
    intervals = _fit_duration(intervals, spec.duration)
    if intervals.size == 0:
        raise InvalidSpec("duration too short to hold a single interval")
    return IBISequence.from_intervals(intervals)


def _sample_times(total_s: float, rate: float, jitter: float, rng) -> np.ndarray:
    n = int(math.floor(total_s * rate + 1e-9)) + 1
    t = np.arange(n) / rate
    if jitter > 0 and n > 2:
        t[1:-1] += rng.uniform(-jitter, jitter, n - 2) / rate
    return t


def gen_waveform(
    I: IBISequence,
    kind: SignalKind | str = SignalKind.PPG,
    rate: float = 30.0,
    snr_db: float | None = None,
    drift: float = 0.0,
    jitter: float = 0.0,
    seed: int = 0,
) -> SyntheticRecording:
    """Render a waveform whose duration equals the sum of ``I``'s intervals.

    Beats are placed at ``I``'s relative beat times, offset by half the
    shorter end interval so that the first pulse is not cut by the recording
    start; any beat falling past the end is not rendered. ``snr_db=None``
    means no noise. ``jitter`` perturbs sample times by up to that fraction
    of a sample period.
    """
    kind = SignalKind.parse(kind)
    if rate < MIN_RATE[kind]:
        raise InvalidRate(f"{kind.name} needs rate >= {MIN_RATE[kind]:g} Hz, got {rate:g}")
    if not 0 <= jitter < 0.5:
        raise ValueError("jitter must be in [0, 0.5)")
    rng = np.random.default_rng([seed, 2])

    ivals = I.intervals / 1000.0
    total = float(ivals.sum())
    offset = 0.5 * min(ivals[0], ivals[-1])
    peaks = I.beat_times - I.beat_times[0] + offset
    peaks = peaks[peaks < total]

    t = _sample_times(total, rate, jitter, rng)
    x = np.zeros_like(t)
    if kind is SignalKind.PPG:
        gaps = np.diff(peaks)
        before = np.concatenate([[gaps[0] if gaps.size else offset], gaps])
        after = np.concatenate([gaps, [before[-1]]])
        half_widths = np.minimum(PULSE_FRACTION * np.minimum(before, after), PULSE_MAX_HALF_S)
        for p, w in zip(peaks, half_widths):
            d = np.abs(t - p)
            near = d < w
            x[near] += 0.5 * (1.0 + np.cos(np.pi * d[near] / w))
    else:
        half = SPIKE_WIDTH_S / 2.0
        for p in peaks:
            d = np.abs(t - p)
            near = d < half
            x[near] += 1.0 - d[near] / half

    if snr_db is not None:
        power = float(np.var(x))
        sigma = math.sqrt(power / 10.0 ** (snr_db / 10.0))
        x = x + rng.normal(0.0, sigma, t.size)
    if drift:
        x = x + drift * np.sin(2.0 * np.pi * DRIFT_HZ * t + rng.uniform(0, 2 * np.pi))

    return SyntheticRecording(t, x, kind, float(rate), true_beats=peaks)


def gen_cohort(
    n_per_class: int, first_seed: int = 1, duration: float = 30.0
) -> list[tuple[RhythmSpec, IBISequence]]:
    """``n_per_class`` sinus subjects then ``n_per_class`` AFib subjects, consecutive seeds."""
    out = []
    for offset, kind in enumerate((Rhythm.SINUS, Rhythm.AFIB)):
        for k in range(n_per_class):
            seed = first_seed + offset * n_per_class + k
            spec = random_spec(kind, seed, duration)
            out.append((spec, gen_ibis(spec)))
    return out
