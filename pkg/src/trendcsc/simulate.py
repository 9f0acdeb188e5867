"""Synthetic eye-trajectory generator with known ground truth.

A generated recording is the sum of three parts:

* a voluntary-gaze trend: a few slow sinusoids plus abrupt-but-smooth
  logistic steps at Poisson-distributed saccade instants,
* a nystagmus waveform, either pendular (a sinusoid) or jerk (a
  quadratic slow phase followed by a linear fast return each cycle),
* white Gaussian noise.

Every stochastic choice flows through one seeded generator in a fixed
draw order, so a parameter set fully determines the output, and the
emitted ground truth stores each component so the sum can be checked
bit for bit.
"""

from dataclasses import dataclass, fields

import numpy as np

from .model import Signal, Trend

__all__ = [
    "GroundTruth",
    "SyntheticParams",
    "gen_nystagmus",
    "gen_signal",
    "gen_trend",
]

NYSTAGMUS_KINDS = ("pendular", "jerk")

# Fraction of each jerk cycle spent in the slow drift phase; the
# remainder is the fast linear return.
JERK_SLOW_FRACTION = 0.8

# Logistic saccade transition spans ~20 ms, i.e. a 5 ms time constant.
SACCADE_TAU_S = 0.005

# The slow gaze component sums three sinusoids whose amplitudes are
# drawn so their total stays within +-10 degrees.
GAZE_N_COMPONENTS = 3
GAZE_FREQ_RANGE_HZ = (0.05, 0.4)
GAZE_TOTAL_AMP_DEG = 10.0


@dataclass(frozen=True)
class SyntheticParams:
    """Knobs of the generator; defaults mirror the benchmark setting."""

    duration_s: float = 10.0
    sample_rate: float = 1000.0
    saccade_rate: float = 1.0
    saccade_amp_mean: float = 20.0
    nystagmus_kind: str = "pendular"
    nystagmus_freq_mean: float = 5.0
    nystagmus_amp_mean: float = 3.0
    noise_std: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in (
            "duration_s",
            "sample_rate",
            "saccade_rate",
            "saccade_amp_mean",
            "nystagmus_freq_mean",
            "nystagmus_amp_mean",
        ):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value}")
        if not (np.isfinite(self.noise_std) and self.noise_std >= 0):
            raise ValueError(f"noise_std must be finite and >= 0, got {self.noise_std}")
        kind = str(self.nystagmus_kind).lower()
        if kind not in NYSTAGMUS_KINDS:
            raise ValueError(
                f"nystagmus_kind must be one of {NYSTAGMUS_KINDS}, got "
                f"{self.nystagmus_kind!r}"
            )
        object.__setattr__(self, "nystagmus_kind", kind)
        object.__setattr__(self, "seed", int(self.seed))
        if self.n_samples < 4:
            raise ValueError("duration times sample rate must give at least 4 samples")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.sample_rate))

    @classmethod
    def from_mapping(cls, mapping) -> "SyntheticParams":
        known = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in mapping.items():
            if key not in known:
                raise ValueError(f"unknown generator parameter {key!r}")
            if key == "nystagmus_kind":
                kwargs[key] = str(raw)
            elif key == "seed":
                kwargs[key] = int(raw)
            else:
                kwargs[key] = float(raw)
        return cls(**kwargs)


@dataclass(frozen=True)
class GroundTruth:
    """Every component of a generated signal, stored exactly."""

    trend: Trend
    nystagmus: np.ndarray
    noise: np.ndarray
    pattern: np.ndarray
    saccade_times: np.ndarray
    frequency: float
    amplitude: float

    def __post_init__(self):
        n = len(self.trend.values)
        if self.nystagmus.shape != (n,) or self.noise.shape != (n,):
            raise ValueError("component lengths disagree")
        if self.pattern.ndim != 1 or self.pattern.size < 2:
            raise ValueError("pattern must hold at least one full period")


def _logistic(u: np.ndarray) -> np.ndarray:
    # Numerically stable logistic; avoids overflow for large |u|.
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    e = np.exp(u[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def gen_trend(params: SyntheticParams, rng) -> tuple:
    """Slow gaze component plus logistic saccade steps.

    Returns the trend and the saccade instants as sample indices.
    """
    n = params.n_samples
    t = np.arange(n) / params.sample_rate
    lo, hi = GAZE_FREQ_RANGE_HZ
    freqs = rng.uniform(lo, hi, GAZE_N_COMPONENTS)
    amps = rng.uniform(0.0, GAZE_TOTAL_AMP_DEG / GAZE_N_COMPONENTS, GAZE_N_COMPONENTS)
    phases = rng.uniform(0.0, 2.0 * np.pi, GAZE_N_COMPONENTS)
    values = np.zeros(n)
    for f, a, ph in zip(freqs, amps, phases):
        values += a * np.sin(2.0 * np.pi * f * t + ph)

    n_saccades = int(rng.poisson(params.saccade_rate * params.duration_s))
    instants = np.sort(rng.uniform(0.0, params.duration_s, n_saccades))
    signs = np.where(rng.random(n_saccades) < 0.5, -1.0, 1.0)
    magnitudes = rng.uniform(0.5, 1.5, n_saccades) * params.saccade_amp_mean
    for instant, sign, mag in zip(instants, signs, magnitudes):
        values += sign * mag * _logistic((t - instant) / SACCADE_TAU_S)

    indices = np.minimum(
        np.round(instants * params.sample_rate).astype(np.int64), n - 1
    )
    return Trend(values), indices


def _pendular_wave(frequency: float, amplitude: float, n: int, rate: float):
    t = np.arange(n) / rate
    return amplitude * np.sin(2.0 * np.pi * frequency * t)


def _jerk_wave(frequency: float, amplitude: float, n: int, rate: float):
    # Phase in [0, 1): quadratic rise over the slow fraction, linear
    # return over the rest, continuous across cycle boundaries, then
    # centered so the waveform oscillates around zero.
    phase = (frequency * (np.arange(n) / rate)) % 1.0
    slow = phase < JERK_SLOW_FRACTION
    values = np.empty(n)
    values[slow] = amplitude * (phase[slow] / JERK_SLOW_FRACTION) ** 2
    values[~slow] = amplitude * (
        1.0 - (phase[~slow] - JERK_SLOW_FRACTION) / (1.0 - JERK_SLOW_FRACTION)
    )
    return values - values.mean()


def gen_nystagmus(params: SyntheticParams, rng) -> tuple:
    """Nystagmus waveform over the full recording.

    Frequency and amplitude are drawn uniformly within +-50% of their
    means.  Returns (waveform, one-period pattern, frequency,
    amplitude).
    """
    frequency = float(rng.uniform(0.5, 1.5) * params.nystagmus_freq_mean)
    amplitude = float(rng.uniform(0.5, 1.5) * params.nystagmus_amp_mean)
    period = params.sample_rate / frequency
    if period < 4:
        raise ValueError(
            f"frequency {frequency} Hz leaves fewer than 4 samples per period"
        )
    n = params.n_samples
    period_samples = int(round(period))
    if params.nystagmus_kind == "pendular":
        wave = _pendular_wave(frequency, amplitude, n, params.sample_rate)
        pattern = _pendular_wave(
            frequency, amplitude, period_samples, params.sample_rate
        )
    else:
        wave = _jerk_wave(frequency, amplitude, n, params.sample_rate)
        pattern = _jerk_wave(frequency, amplitude, period_samples, params.sample_rate)
    return wave, pattern, frequency, amplitude


def gen_signal(params: SyntheticParams) -> tuple:
    """Full seeded recording: trend + nystagmus + noise.

    Returns (Signal, GroundTruth).  The draw order is fixed (trend,
    then waveform, then noise) so outputs are reproducible from the
    seed alone.
    """
    rng = np.random.default_rng(params.seed)
    trend, saccade_idx = gen_trend(params, rng)
    wave, pattern, frequency, amplitude = gen_nystagmus(params, rng)
    noise = rng.normal(0.0, params.noise_std, params.n_samples)
    samples = np.asarray(trend.values) + wave + noise
    signal = Signal(samples, sample_rate=params.sample_rate)
    truth = GroundTruth(
        trend=trend,
        nystagmus=wave,
        noise=noise,
        pattern=pattern,
        saccade_times=saccade_idx,
        frequency=frequency,
        amplitude=amplitude,
    )
    return signal, truth
