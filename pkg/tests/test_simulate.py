import numpy as np
import pytest

from trendcsc.simulate import (
    JERK_SLOW_FRACTION,
    SyntheticParams,
    _jerk_wave,
    _pendular_wave,
    gen_nystagmus,
    gen_signal,
    gen_trend,
)


def test_same_seed_reproduces_everything():
    a_sig, a_truth = gen_signal(SyntheticParams(seed=11))
    b_sig, b_truth = gen_signal(SyntheticParams(seed=11))
    assert np.array_equal(a_sig.samples, b_sig.samples)
    assert np.array_equal(a_truth.pattern, b_truth.pattern)
    assert np.array_equal(a_truth.saccade_times, b_truth.saccade_times)
    c_sig, _ = gen_signal(SyntheticParams(seed=12))
    assert not np.array_equal(a_sig.samples, c_sig.samples)


def test_components_sum_to_signal():
    sig, truth = gen_signal(SyntheticParams(seed=13))
    total = truth.trend.values + truth.nystagmus + truth.noise
    assert np.array_equal(sig.samples, total)
    clean, clean_truth = gen_signal(SyntheticParams(seed=13, noise_std=0.0))
    assert np.all(clean_truth.noise == 0.0)
    assert np.array_equal(
        clean.samples, clean_truth.trend.values + clean_truth.nystagmus
    )


def test_default_signal_shape():
    params = SyntheticParams()
    assert params.n_samples == 10000
    sig, truth = gen_signal(params)
    assert len(sig) == 10000
    assert sig.sample_rate == 1000.0
    assert truth.pattern.size == int(round(params.sample_rate / truth.frequency))


def test_pendular_wave_closed_form():
    n, rate = 500, 1000.0
    wave = _pendular_wave(4.0, 2.5, n, rate)
    t = np.arange(n) / rate
    assert np.array_equal(wave, 2.5 * np.sin(2.0 * np.pi * 4.0 * t))


def test_jerk_wave_shape():
    n, rate = 1000, 1000.0
    wave = _jerk_wave(5.0, 3.0, n, rate)
    assert abs(wave.mean()) <= 1e-12
    # slow quadratic rise occupies the slow fraction of each cycle
    rising = np.diff(wave[:200]) > 0
    assert abs(rising.mean() - JERK_SLOW_FRACTION) <= 0.05
    assert wave.max() - wave.min() == pytest.approx(3.0, rel=1e-9)


def test_wave_opens_with_its_pattern():
    pend_sig, pend = gen_signal(SyntheticParams(seed=14, nystagmus_kind="pendular"))
    p = pend.pattern.size
    assert np.array_equal(pend.nystagmus[:p], pend.pattern)
    _, jerk = gen_signal(SyntheticParams(seed=15, nystagmus_kind="jerk"))
    p = jerk.pattern.size
    # same waveform, centered over the recording vs over one period
    offset = jerk.nystagmus[:p] - jerk.pattern
    assert np.ptp(offset) <= 1e-12 * max(1.0, jerk.amplitude)


def test_draw_ranges():
    for seed in range(40):
        params = SyntheticParams(seed=seed)
        _, truth = gen_signal(params)
        assert 2.5 <= truth.frequency <= 7.5
        assert 1.5 <= truth.amplitude <= 4.5
        assert np.all(truth.saccade_times >= 0)
        assert np.all(truth.saccade_times < params.n_samples)
        assert np.all(np.diff(truth.saccade_times) >= 0)


def test_saccade_count_matches_rate():
    counts = []
    for seed in range(150):
        _, idx = gen_trend(SyntheticParams(), np.random.default_rng(seed))
        counts.append(len(idx))
    mean = np.mean(counts)
    assert 8.5 <= mean <= 11.5, mean


def test_noise_scale():
    _, truth = gen_signal(SyntheticParams(seed=16))
    assert 0.45 <= np.std(truth.noise) <= 0.55


def test_parameter_validation():
    for bad in (
        dict(duration_s=0.0),
        dict(sample_rate=-1.0),
        dict(saccade_rate=0.0),
        dict(noise_std=-0.1),
        dict(nystagmus_kind="circular"),
        dict(duration_s=0.001),
    ):
        with pytest.raises(ValueError):
            SyntheticParams(**bad)
    with pytest.raises(ValueError):
        gen_nystagmus(
            SyntheticParams(nystagmus_freq_mean=1000.0), np.random.default_rng(0)
        )


def test_from_mapping_round_trip():
    params = SyntheticParams.from_mapping(
        {"seed": "9", "nystagmus_kind": "jerk", "noise_std": "0.25"}
    )
    assert params.seed == 9
    assert params.nystagmus_kind == "jerk"
    assert params.noise_std == 0.25
    with pytest.raises(ValueError):
        SyntheticParams.from_mapping({"color": "blue"})
