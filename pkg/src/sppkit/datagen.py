"""Synthetic clean/noise/mixture generation at controlled SNR, and
training-pair export.

The speech stand-in alternates silences with harmonic "syllables": 5-10
equal-amplitude harmonics on an f0 drawn from 100-300 Hz, syllable-rate
amplitude modulation, and short raised-cosine onsets/offsets.  Noise kinds:
white (i.i.d. Gaussian), pink (1/f-shaped), and modulated (white under a
1-4 Hz random amplitude envelope, the non-stationary case).  Everything is
deterministic under a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dumps import PairRecord
from .errors import DomainError, InvalidConfigError
from .frontend import (AudioBuffer, NormStats, SAMPLE_RATE, StftConfig,
                       feature_stats, log_power, normalize, stft)
from .spp import target_map

NOISE_KINDS = ("white", "pink", "modulated")

# syllable/gap timing (seconds); the draw keeps measured silence coverage
# inside the 0.2-0.5 band on multi-second utterances
_GAP_RANGE = (0.08, 0.28)
_SYLLABLE_RANGE = (0.15, 0.40)
_AM_DEPTH = 0.10
_AM_RATE_RANGE = (3.0, 5.0)
_RAMP_S = 0.004
_PEAK = 0.5
_NOISE_SCALE = 0.1


@dataclass(frozen=True)
class MixSpec:
    snr_db: float
    seed: int
    duration_s: float
    clean_kind: str = "speechlike"
    noise_kind: str = "white"

    def __post_init__(self):
        if not (self.duration_s > 0):
            raise InvalidConfigError("duration_s must be > 0")
        if self.noise_kind not in NOISE_KINDS:
            raise InvalidConfigError(f"unknown noise kind {self.noise_kind!r}")


def synth_mixture(spec: MixSpec):
    """Build the (noisy, clean, scaled_noise) triple a MixSpec describes.

    Clean and noise draw from decorrelated streams derived from the seed.
    """
    if spec.clean_kind != "speechlike":
        raise InvalidConfigError(f"unknown clean kind {spec.clean_kind!r}")
    clean = synth_speechlike(spec.duration_s, seed=(spec.seed, 0))
    noise = synth_noise(spec.noise_kind, spec.duration_s, seed=(spec.seed, 1))
    noisy, scaled = mix_at_snr(clean, noise, spec.snr_db)
    return noisy, clean, scaled


def synth_speechlike(duration_s: float, seed: int) -> AudioBuffer:
    """Deterministic harmonic-complex speech stand-in with inserted silences."""
    if duration_s < 0.5:
        raise InvalidConfigError("speechlike synthesis needs at least 0.5 s")
    rng = np.random.default_rng(seed)
    total = int(duration_s * SAMPLE_RATE)
    x = np.zeros(total)
    pos = 0
    while pos < total:
        pos += int(rng.uniform(*_GAP_RANGE) * SAMPLE_RATE)
        if pos >= total:
            break
        length = min(int(rng.uniform(*_SYLLABLE_RANGE) * SAMPLE_RATE), total - pos)
        f0 = rng.uniform(100.0, 300.0)
        # equal-amplitude harmonics, capped below 4 kHz
        harmonics = int(rng.integers(5, 11))
        harmonics = min(harmonics, int(3800.0 // f0))
        t = np.arange(length) / SAMPLE_RATE
        tone = np.zeros(length)
        for h in range(1, harmonics + 1):
            tone += np.sin(2.0 * np.pi * f0 * h * t + rng.uniform(0.0, 2.0 * np.pi))
        ramp = max(1, int(_RAMP_S * SAMPLE_RATE))
        envelope = np.ones(length)
        if 2 * ramp <= length:
            edge = 0.5 * (1.0 - np.cos(np.pi * np.arange(ramp) / ramp))
            envelope[:ramp] = edge
            envelope[-ramp:] = edge[::-1]
        am = 1.0 + _AM_DEPTH * np.sin(
            2.0 * np.pi * rng.uniform(*_AM_RATE_RANGE) * t + rng.uniform(0.0, 2.0 * np.pi))
        x[pos:pos + length] = tone * envelope * am
        pos += length
    peak = np.max(np.abs(x))
    if peak > 0:
        x *= _PEAK / peak
    return AudioBuffer(x)


def _pink(rng: np.random.Generator, total: int) -> np.ndarray:
    white = rng.standard_normal(total)
    spectrum = np.fft.rfft(white)
    freq = np.fft.rfftfreq(total, d=1.0 / SAMPLE_RATE)
    shaping = np.ones_like(freq)
    nonzero = freq > 0
    shaping[nonzero] = 1.0 / np.sqrt(freq[nonzero])
    shaping[0] = 0.0  # no DC build-up
    shaped = np.fft.irfft(spectrum * shaping, n=total)
    return shaped / np.std(shaped)


def synth_noise(kind: str, duration_s: float, seed: int) -> AudioBuffer:
    if kind not in NOISE_KINDS:
        raise InvalidConfigError(f"unknown noise kind {kind!r}")
    rng = np.random.default_rng(seed)
    total = int(duration_s * SAMPLE_RATE)
    if kind == "white":
        x = rng.standard_normal(total)
    elif kind == "pink":
        x = _pink(rng, total)
    else:  # modulated: white noise under a slow random amplitude envelope
        x = rng.standard_normal(total)
        rate = rng.uniform(1.0, 4.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        t = np.arange(total) / SAMPLE_RATE
        x *= 1.0 + 0.4 * np.sin(2.0 * np.pi * rate * t + phase)
    return AudioBuffer(x * _NOISE_SCALE)


def mix_at_snr(clean: AudioBuffer, noise: AudioBuffer, snr_db: float):
    """Scale noise so the full-utterance SNR is exactly ``snr_db``.

    Noise shorter than the clean signal is looped, longer noise truncated.
    Returns ``(noisy, scaled_noise)`` with ``noisy = clean + scaled_noise``
    exactly.
    """
    clean_power = float(np.mean(clean.samples ** 2))
    if clean_power <= 0.0:
        raise DomainError("clean signal is silent; SNR is undefined")
    n = noise.samples
    if len(n) < len(clean):
        reps = int(np.ceil(len(clean) / len(n)))
        n = np.tile(n, reps)
    n = n[:len(clean)]
    noise_power = float(np.mean(n ** 2))
    if noise_power <= 0.0:
        raise DomainError("noise signal is silent")
    gain = np.sqrt(clean_power / (noise_power * 10.0 ** (snr_db / 10.0)))
    scaled = AudioBuffer(gain * n, clean.sample_rate)
    noisy = AudioBuffer(clean.samples + scaled.samples, clean.sample_rate)
    return noisy, scaled


def make_training_pairs(clean: AudioBuffer, noise: AudioBuffer, snr_db: float,
                        stft_config: StftConfig | None = None,
                        norm_stats: NormStats | None = None,
                        seed: int = 0) -> PairRecord:
    """Build one normalized-feature / SPP-target pair record.

    When ``norm_stats`` is omitted the utterance's own feature statistics
    are used; dataset builders pass global statistics instead so every pair
    shares one scaling.
    """
    stft_config = stft_config or StftConfig()
    noisy, scaled_noise = mix_at_snr(clean, noise, snr_db)
    noisy_spec = stft(noisy, stft_config)
    clean_spec = stft(clean, stft_config)
    noise_spec = stft(scaled_noise, stft_config)

    features = log_power(noisy_spec)
    stats = norm_stats or feature_stats(features)
    normalized = normalize(features, stats)
    target = target_map(clean_spec, noise_spec, noisy_spec)
    return PairRecord(
        features=normalized.data.astype(np.float32),
        target=target.data.astype(np.float32),
        seed=seed,
        snr_db=float(snr_db),
        norm_mean=stats.mean,
        norm_std=stats.std,
    )
