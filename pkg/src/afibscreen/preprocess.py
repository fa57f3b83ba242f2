"""Waveform cleanup and beat detection.

Raw ECG or PPG samples go through ``resample_uniform`` ->
``detrend_and_filter`` -> ``standardize`` -> ``detect_beats`` ->
``intervals_from_beats``; :func:`beats_from_recording` runs the whole chain.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, signal

from .errors import (
    EmptyRecording,
    InvalidBand,
    NonMonotonicTime,
    TooFewBeats,
    ZeroVariance,
)

REFRACTORY_S = 0.250
MIN_INTERVAL_MS = 250.0
MAX_INTERVAL_MS = 3000.0

# rolling-median window and MAD multiplier of the PPG peak threshold
PPG_WINDOW_S = 2.0
PPG_MAD_K = 2.0
PPG_MIN_RELATIVE_HEIGHT = 0.4

# Pan-Tompkins style integration window and R-peak search half-width
ECG_MWI_S = 0.150
ECG_SEARCH_S = 0.075


class SignalKind(str, enum.Enum):
    ECG = "ecg"
    PPG = "ppg"

    @classmethod
    def parse(cls, value: "SignalKind | str") -> "SignalKind":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


DEFAULT_BANDS = {
    SignalKind.ECG: (0.5, 40.0),
    SignalKind.PPG: (0.5, 8.0),
}
DEFAULT_RATES = {
    SignalKind.ECG: 250.0,
    SignalKind.PPG: 30.0,
}


@dataclass(frozen=True)
class RawRecording:
    """Possibly irregularly sampled waveform as ``(time [s], value)`` pairs."""

    times: np.ndarray
    values: np.ndarray
    kind: SignalKind = SignalKind.PPG
    nominal_rate: float = 30.0

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).ravel()
        values = np.asarray(self.values, dtype=float).ravel()
        if times.shape != values.shape:
            raise EmptyRecording("times and values differ in length")
        if times.size < 2:
            raise EmptyRecording(f"need at least 2 samples, got {times.size}")
        if np.any(np.diff(times) <= 0):
            raise NonMonotonicTime("sample times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", SignalKind.parse(self.kind))

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])


@dataclass(frozen=True)
class SampledSignal:
    values: np.ndarray
    rate: float
    start: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        if values.size < 2:
            raise EmptyRecording("a sampled signal needs at least 2 values")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.start + np.arange(self.values.size) / self.rate

    @property
    def duration(self) -> float:
        return (self.values.size - 1) / self.rate


@dataclass(frozen=True)
class IBISequence:
    """Inter-beat intervals in ms together with the beat times in seconds.

    ``intervals[j]`` is the gap between ``beat_times[j]`` and
    ``beat_times[j + 1]``. Use :meth:`from_intervals` when only the intervals
    are known.
    """

    intervals: np.ndarray
    beat_times: np.ndarray

    def __post_init__(self):
        intervals = np.asarray(self.intervals, dtype=float).ravel()
        beat_times = np.asarray(self.beat_times, dtype=float).ravel()
        if beat_times.size != intervals.size + 1:
            raise ValueError("beat_times must have one more entry than intervals")
        if np.any(~np.isfinite(intervals)) or np.any(intervals <= 0):
            raise ValueError("intervals must be finite and positive")
        if not np.allclose(np.diff(beat_times) * 1000.0, intervals, rtol=0, atol=1e-9):
            raise ValueError("intervals disagree with beat_times")
        object.__setattr__(self, "intervals", intervals)
        object.__setattr__(self, "beat_times", beat_times)

    @classmethod
    def from_intervals(cls, intervals, start: float = 0.0) -> "IBISequence":
        intervals = np.asarray(intervals, dtype=float).ravel()
        beat_times = start + np.concatenate([[0.0], np.cumsum(intervals)]) / 1000.0
        return cls(intervals, beat_times)

    def __len__(self) -> int:
        return self.intervals.size


def _as_ibi(I) -> IBISequence:
    if isinstance(I, IBISequence):
        return I
    return IBISequence.from_intervals(I)


def resample_uniform(rec: RawRecording, target_rate: float) -> SampledSignal:
    """Linearly interpolate ``rec`` onto a uniform grid starting at its first sample."""
    if not target_rate > 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    duration = rec.duration
    if duration * target_rate < 1.0 - 1e-9:
        raise EmptyRecording("recording shorter than one output sample period")
    n = int(math.floor(duration * target_rate + 1e-9)) + 1
    grid = rec.times[0] + np.arange(n) / target_rate
    values = np.interp(grid, rec.times, rec.values)
    return SampledSignal(values, float(target_rate), start=float(rec.times[0]))


def detrend_and_filter(
    sig: SampledSignal, low: float, high: float, order: int = 2
) -> SampledSignal:
    """Remove the least-squares line, then zero-phase Butterworth bandpass."""
    nyquist = sig.rate / 2.0
    if not 0 < low < high < nyquist:
        raise InvalidBand(
            f"need 0 < low < high < {nyquist:g} Hz, got low={low:g} high={high:g}"
        )
    x = signal.detrend(sig.values, type="linear")
    sos = signal.butter(order, [low, high], btype="bandpass", fs=sig.rate, output="sos")
    padlen = min(3 * (2 * len(sos) + 1), x.size - 1)
    y = signal.sosfiltfilt(sos, x, padlen=padlen)
    return SampledSignal(y, sig.rate, sig.start)


def standardize(sig: SampledSignal) -> SampledSignal:
    x = sig.values
    mean = x.mean()
    centered = x - mean
    std = math.sqrt(float(np.mean(centered**2)))
    if std == 0.0 or std < 1e-300:
        raise ZeroVariance("cannot standardize a flat signal")
    z = centered / std
    # one correction pass pins mean/variance to ~1e-16
    z -= z.mean()
    z /= math.sqrt(float(np.mean(z**2)))
    return SampledSignal(z, sig.rate, sig.start)


def _parabolic_offset(y: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Sub-sample vertex offset of the parabola through ``y[idx-1:idx+2]``."""
    inner = (idx > 0) & (idx < y.size - 1)
    offset = np.zeros(idx.size)
    i = idx[inner]
    left, mid, right = y[i - 1], y[i], y[i + 1]
    denom = left - 2.0 * mid + right
    with np.errstate(divide="ignore", invalid="ignore"):
        off = np.where(denom < 0, 0.5 * (left - right) / denom, 0.0)
    offset[inner] = np.clip(off, -0.5, 0.5)
    return offset


def _local_maxima(x: np.ndarray) -> np.ndarray:
    # rising edge into the sample, non-rising edge out of it (first sample of a plateau)
    return np.flatnonzero((x[1:-1] > x[:-2]) & (x[1:-1] >= x[2:])) + 1


def _enforce_refractory(idx: np.ndarray, strength: np.ndarray, min_gap: float) -> np.ndarray:
    """Keep the strongest peaks so that no two kept peaks are closer than ``min_gap``."""
    if idx.size == 0:
        return idx
    order = np.argsort(-strength, kind="stable")
    taken = np.zeros(idx.size, dtype=bool)
    kept_positions: list[float] = []
    for k in order:
        pos = idx[k]
        if any(abs(pos - p) < min_gap for p in kept_positions):
            continue
        kept_positions.append(pos)
        taken[k] = True
    return idx[taken]


def _ppg_peaks(x: np.ndarray, rate: float) -> np.ndarray:
    window = max(3, int(round(PPG_WINDOW_S * rate)) | 1)
    med = ndimage.median_filter(x, size=window, mode="reflect")
    mad = ndimage.median_filter(np.abs(x - med), size=window, mode="reflect")
    threshold = med + PPG_MAD_K * mad
    cand = _local_maxima(x)
    cand = cand[x[cand] > threshold[cand]]
    min_gap = int(math.ceil(REFRACTORY_S * rate))
    peaks = np.sort(_enforce_refractory(cand, x[cand], min_gap))
    if peaks.size >= 3:
        # noise maxima that clear the rolling threshold are still far below real pulses
        height = x[peaks] - med[peaks]
        peaks = peaks[height >= PPG_MIN_RELATIVE_HEIGHT * np.median(height)]
    return peaks


def _ecg_peaks(x: np.ndarray, rate: float) -> np.ndarray:
    deriv = np.gradient(x) * rate
    energy = deriv**2
    width = max(1, int(round(ECG_MWI_S * rate)))
    mwi = ndimage.uniform_filter1d(energy, size=width, mode="nearest")
    cand = _local_maxima(mwi)
    if cand.size == 0:
        return cand
    min_gap = int(math.ceil(REFRACTORY_S * rate))

    # learning phase on the first 2 s
    learn = cand[cand < int(2 * rate)]
    if learn.size == 0:
        learn = cand
    spki = 0.25 * float(mwi[learn].max())
    npki = 0.5 * float(np.mean(mwi))

    accepted: list[int] = []
    for pos in cand:
        peak = float(mwi[pos])
        threshold = npki + 0.25 * (spki - npki)
        if peak > threshold:
            if accepted and pos - accepted[-1] < min_gap:
                if peak > mwi[accepted[-1]]:
                    accepted[-1] = pos
                continue
            accepted.append(pos)
            spki = 0.125 * peak + 0.875 * spki
        else:
            npki = 0.125 * peak + 0.875 * npki

    # search back for beats missed in long gaps, at half the final threshold
    threshold2 = 0.5 * (npki + 0.25 * (spki - npki))
    if len(accepted) >= 2:
        rr = np.diff(accepted)
        mean_rr = float(np.median(rr))
        extra = []
        for a, b in zip(accepted[:-1], accepted[1:]):
            if b - a > 1.66 * mean_rr:
                inner = cand[(cand > a + min_gap) & (cand < b - min_gap)]
                inner = inner[mwi[inner] > threshold2]
                if inner.size:
                    extra.append(int(inner[np.argmax(mwi[inner])]))
        accepted = sorted(accepted + extra)

    # move each integration peak onto the R wave itself
    half = max(1, int(round(ECG_SEARCH_S * rate)))
    peaks = []
    for pos in accepted:
        lo, hi = max(0, pos - half), min(x.size, pos + half + 1)
        r = lo + int(np.argmax(x[lo:hi]))
        if 0 < r < x.size - 1 and x[r] > x[r - 1] and x[r] >= x[r + 1]:
            peaks.append(r)
    peaks = np.unique(np.asarray(peaks, dtype=int))
    return np.sort(_enforce_refractory(peaks, x[peaks], min_gap))


def detect_beats(sig: SampledSignal, kind: SignalKind | str) -> np.ndarray:
    """Beat times in seconds for a cleaned ECG or PPG signal.

    The signal is re-standardized internally, so the result does not depend
    on amplitude scale. PPG beats are local maxima above a rolling
    ``median + 2 * MAD`` threshold; ECG beats come from a derivative,
    squaring, moving-window-integration chain with adaptive thresholds,
    refined onto the R-wave maximum. Both enforce a 250 ms refractory
    period and report parabola-refined peak times.
    """
    kind = SignalKind.parse(kind)
    if sig.duration < 2.0:
        raise TooFewBeats(f"need at least 2 s of signal, got {sig.duration:.3f} s")
    try:
        x = standardize(sig).values
    except ZeroVariance:
        raise TooFewBeats("flat signal contains no beats") from None

    if kind is SignalKind.PPG:
        idx = _ppg_peaks(x, sig.rate)
    else:
        idx = _ecg_peaks(x, sig.rate)
    if idx.size < 2:
        raise TooFewBeats(f"found {idx.size} beat(s), need at least 2")
    times = sig.start + (idx + _parabolic_offset(x, idx)) / sig.rate
    # refinement may pull two peaks slightly inside the refractory period
    times = np.sort(_enforce_refractory(times, x[idx], REFRACTORY_S))
    if times.size < 2:
        raise TooFewBeats(f"found {times.size} beat(s), need at least 2")
    return times


def intervals_from_beats(
    beat_times,
    min_ms: float = MIN_INTERVAL_MS,
    max_ms: float = MAX_INTERVAL_MS,
) -> IBISequence:
    """Difference beat times into intervals, rejecting implausible ones.

    A beat arriving less than ``min_ms`` after the last kept beat is dropped
    (it is taken to be spurious). A gap longer than ``max_ms`` cannot be
    repaired by dropping beats, so the sequence is cut there and the longest
    contiguous plausible run is returned.
    """
    t = np.asarray(beat_times, dtype=float).ravel()
    if t.size < 3:
        raise TooFewBeats(f"need at least 3 beat times, got {t.size}")
    if np.any(np.diff(t) <= 0):
        raise NonMonotonicTime("beat times must be strictly increasing")

    kept = [t[0]]
    for tk in t[1:]:
        if (tk - kept[-1]) * 1000.0 >= min_ms:
            kept.append(tk)
    kept = np.asarray(kept)

    gaps = np.diff(kept) * 1000.0
    breaks = np.flatnonzero(gaps > max_ms)
    if breaks.size:
        bounds = np.concatenate([[-1], breaks, [gaps.size]])
        # run r covers beats bounds[r]+1 .. bounds[r+1]
        lengths = np.diff(bounds)
        r = int(np.argmax(lengths))
        kept = kept[bounds[r] + 1 : bounds[r + 1] + 1]

    if kept.size < 3:
        raise TooFewBeats(f"only {kept.size} plausible beat(s) remain")
    return IBISequence(np.diff(kept) * 1000.0, kept)


def beats_from_recording(
    rec: RawRecording,
    rate: float | None = None,
    band: tuple[float, float] | None = None,
) -> np.ndarray:
    """Full chain from raw samples to beat times."""
    kind = rec.kind
    rate = DEFAULT_RATES[kind] if rate is None else rate
    low, high = DEFAULT_BANDS[kind] if band is None else band
    sig = resample_uniform(rec, rate)
    sig = detrend_and_filter(sig, low, high)
    sig = standardize(sig)
    return detect_beats(sig, kind)


def ibis_from_recording(rec: RawRecording, rate: float | None = None, band=None) -> IBISequence:
    return intervals_from_beats(beats_from_recording(rec, rate, band))
