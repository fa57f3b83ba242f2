import numpy as np
import pytest

from afibscreen.errors import InvalidRate, InvalidSpec
from afibscreen.features import f1_sd_derivative
from afibscreen.preprocess import beats_from_recording
from afibscreen.synth import (
    Rhythm,
    RhythmSpec,
    gen_cohort,
    gen_ibis,
    gen_waveform,
    random_spec,
)


def lag1_autocorr(x):
    x = x - x.mean()
    return float(x[:-1] @ x[1:] / (x @ x))


def test_zero_variability_sinus_is_constant():
    I = gen_ibis(RhythmSpec(Rhythm.SINUS, mean_ibi=850.0, variability=0.0))
    assert np.all(I.intervals == 850.0)
    assert I.intervals.sum() <= 30_000


def test_deterministic():
    spec = random_spec("afib", 17)
    a, b = gen_ibis(spec), gen_ibis(spec)
    assert a.intervals.tobytes() == b.intervals.tobytes()
    wa = gen_waveform(a, "ppg", 30.0, snr_db=10, drift=0.3, seed=17)
    wb = gen_waveform(b, "ppg", 30.0, snr_db=10, drift=0.3, seed=17)
    assert wa.values.tobytes() == wb.values.tobytes()
    assert wa.times.tobytes() == wb.times.tobytes()


def test_intervals_within_plausible_bounds():
    for seed in range(200):
        for kind in Rhythm:
            spec = RhythmSpec(kind, mean_ibi=400.0 + 10 * seed, variability=80.0, seed=seed)
            x = gen_ibis(spec).intervals
            assert x.min() >= 250.0 and x.max() <= 3000.0
            assert x.sum() <= 30_000


def test_class_statistics():
    sinus = [gen_ibis(random_spec("sinus", s)).intervals for s in range(1, 201)]
    afib = [gen_ibis(random_spec("afib", s)).intervals for s in range(201, 401)]
    assert np.mean([f1_sd_derivative(x) for x in afib]) > np.mean([f1_sd_derivative(x) for x in sinus])
    assert -0.2 < np.mean([lag1_autocorr(x) for x in afib]) < 0.2
    assert np.mean([lag1_autocorr(x) for x in sinus]) > 0.3


def test_afib_spread_is_wider():
    rng_sd_sinus = np.std(gen_ibis(RhythmSpec("sinus", 800.0, 30.0, 600.0, seed=1)).intervals)
    rng_sd_afib = np.std(gen_ibis(RhythmSpec("afib", 800.0, 30.0, 600.0, seed=1)).intervals)
    assert rng_sd_afib > 4 * 30.0 * 0.8
    assert rng_sd_afib > 2 * rng_sd_sinus


@pytest.mark.parametrize("kwargs", [dict(duration=0.0), dict(mean_ibi=200.0), dict(variability=-1.0)])
def test_invalid_spec(kwargs):
    with pytest.raises(InvalidSpec):
        RhythmSpec(Rhythm.SINUS, **kwargs)


def test_invalid_rate():
    I = gen_ibis(random_spec("sinus", 1))
    with pytest.raises(InvalidRate):
        gen_waveform(I, "ppg", 15.0)
    with pytest.raises(InvalidRate):
        gen_waveform(I, "ecg", 60.0)


@pytest.mark.parametrize("kind,rate", [("ppg", 30.0), ("ecg", 250.0)])
def test_duration_matches_interval_sum(kind, rate):
    I = gen_ibis(random_spec("afib", 5))
    rec = gen_waveform(I, kind, rate, jitter=0.2, seed=5)
    assert abs(rec.duration - I.intervals.sum() / 1000) <= 1 / rate


@pytest.mark.parametrize("kind,rate", [("ppg", 30.0), ("ecg", 250.0)])
def test_noise_free_beats_recovered(kind, rate):
    for seed in range(1, 21):
        rhythm = "sinus" if seed % 2 else "afib"
        rec = gen_waveform(gen_ibis(random_spec(rhythm, seed)), kind, rate, seed=seed)
        beats = beats_from_recording(rec)
        assert beats.size == rec.true_beats.size
        assert np.max(np.abs(beats - rec.true_beats)) <= 1 / rate + 1e-9


def test_cohort_layout():
    cohort = gen_cohort(3, first_seed=10)
    assert [s.seed for s, _ in cohort] == list(range(10, 16))
    assert [s.kind for s, _ in cohort] == [Rhythm.SINUS] * 3 + [Rhythm.AFIB] * 3
