"""STFT analysis/synthesis frontend and log-power feature extraction.

Fixed pipeline geometry: 16 kHz mono audio, 16 ms periodic Hamming window
(256 samples), 8 ms hop (128 samples), 256-point FFT, 129 frequency bins.
Frame l covers samples [l*hop, l*hop + window_len); there is no center
padding, so the first frame starts at sample 0 and round-trip guarantees
hold on the interior only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidConfigError, ShapeMismatchError

SAMPLE_RATE = 16000
DEFAULT_POWER_FLOOR = 1e-12


@dataclass
class AudioBuffer:
    """Mono audio at a known sample rate, amplitudes nominally in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise InvalidConfigError("AudioBuffer requires a 1-D sample array")
        if not np.all(np.isfinite(self.samples)):
            raise InvalidConfigError("AudioBuffer samples must be finite")

    def __len__(self):
        return len(self.samples)

    def require_pipeline_rate(self):
        if self.sample_rate != SAMPLE_RATE:
            raise InvalidConfigError(
                f"pipeline requires {SAMPLE_RATE} Hz audio, got {self.sample_rate} Hz"
            )


@dataclass(frozen=True)
class StftConfig:
    window_len: int = 256
    hop: int = 128
    fft_size: int = 256

    def __post_init__(self):
        if self.window_len < 2:
            raise InvalidConfigError("window_len must be >= 2")
        if self.hop != self.window_len // 2:
            raise InvalidConfigError("hop must equal window_len / 2")
        if self.fft_size != self.window_len:
            raise InvalidConfigError("fft_size must equal window_len")

    @property
    def num_bins(self) -> int:
        return self.fft_size // 2 + 1

    def num_frames(self, num_samples: int) -> int:
        if num_samples < self.window_len:
            return 0
        return (num_samples - self.window_len) // self.hop + 1


@dataclass
class ComplexSpectrogram:
    """K x L complex STFT coefficients."""

    data: np.ndarray
    config: StftConfig = field(default_factory=StftConfig)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.ndim != 2:
            raise ShapeMismatchError("spectrogram must be a 2-D array")
        if self.data.shape[0] != self.config.num_bins:
            raise ShapeMismatchError(
                f"expected {self.config.num_bins} bins, got {self.data.shape[0]}"
            )
        if not np.all(np.isfinite(self.data)):
            raise InvalidConfigError("spectrogram entries must be finite")

    @property
    def num_bins(self) -> int:
        return self.data.shape[0]

    @property
    def num_frames(self) -> int:
        return self.data.shape[1]

    def power(self) -> np.ndarray:
        """Per-bin periodogram |Y(k,l)|^2."""
        return np.abs(self.data) ** 2


@dataclass
class LogPowerFeatures:
    """K x L natural-log power matrix; ``normalized`` marks mean/std scaling."""

    data: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ShapeMismatchError("features must be a 2-D array")
        if not np.all(np.isfinite(self.data)):
            raise InvalidConfigError("features must be finite")


@dataclass(frozen=True)
class NormStats:
    """Global scalar mean/std of the training feature distribution."""

    mean: float
    std: float

    def __post_init__(self):
        if not (self.std > 0):
            raise InvalidConfigError("std must be strictly positive")


def hamming_window(length: int) -> np.ndarray:
    """Periodic Hamming window w[n] = 0.54 - 0.46 cos(2 pi n / length).

    The periodic convention (denominator ``length`` rather than
    ``length - 1``) keeps the 50%-overlap analysis/synthesis chain exactly
    invertible on the interior.
    """
    if length < 2:
        raise InvalidConfigError("window length must be >= 2")
    n = np.arange(length)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / length)


def stft(audio: AudioBuffer, config: StftConfig | None = None) -> ComplexSpectrogram:
    """Analyze audio into a K x L complex spectrogram.

    Raises an error naming the minimum length when the input is shorter
    than one window.
    """
    config = config or StftConfig()
    x = audio.samples
    if len(x) < config.window_len:
        raise DomainError(
            f"input has {len(x)} samples; stft needs at least {config.window_len}"
        )
    num_frames = config.num_frames(len(x))
    window = hamming_window(config.window_len)
    frames = np.empty((num_frames, config.window_len), dtype=np.float64)
    for l in range(num_frames):
        start = l * config.hop
        frames[l] = x[start:start + config.window_len]
    spec = np.fft.rfft(frames * window, n=config.fft_size, axis=1)
    return ComplexSpectrogram(spec.T, config)


def istft(spec: ComplexSpectrogram) -> AudioBuffer:
    """Weighted overlap-add synthesis.

    The synthesis window equals the analysis window; the overlapped sum is
    divided by the accumulated squared-window envelope, which makes
    ``istft(stft(x))`` match ``x`` on the interior (edge frames see partial
    window coverage and are excluded from that guarantee).
    """
    config = spec.config
    window = hamming_window(config.window_len)
    num_frames = spec.num_frames
    out_len = (num_frames - 1) * config.hop + config.window_len
    out = np.zeros(out_len)
    envelope = np.zeros(out_len)
    segments = np.fft.irfft(spec.data.T, n=config.fft_size, axis=1)
    for l in range(num_frames):
        start = l * config.hop
        out[start:start + config.window_len] += segments[l] * window
        envelope[start:start + config.window_len] += window ** 2
    covered = envelope > 1e-12
    out[covered] /= envelope[covered]
    return AudioBuffer(out)


def log_power(spec: ComplexSpectrogram, floor: float = DEFAULT_POWER_FLOOR) -> LogPowerFeatures:
    """Natural-log power features ln(max(|Y|^2, floor))."""
    if not (floor > 0):
        raise InvalidConfigError("power floor must be > 0")
    return LogPowerFeatures(np.log(np.maximum(spec.power(), floor)))


def normalize(features: LogPowerFeatures, stats: NormStats) -> LogPowerFeatures:
    """Apply global (x - mean) / std scaling and mark the result normalized."""
    return LogPowerFeatures((features.data - stats.mean) / stats.std, normalized=True)


def feature_stats(features_list) -> NormStats:
    """Global scalar mean/std over one or more feature matrices."""
    if isinstance(features_list, LogPowerFeatures):
        features_list = [features_list]
    stacked = np.concatenate([np.ravel(f.data) for f in features_list])
    std = float(np.std(stacked))
    if std == 0.0:
        std = 1.0  # constant features carry no scale information
    return NormStats(float(np.mean(stacked)), std)
