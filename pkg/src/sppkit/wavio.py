"""WAV reading/writing for the pipeline entry points.

Only mono 16 kHz files are accepted, as PCM 16-bit or IEEE float32; other
rates, channel layouts, or sample formats are rejected with a descriptive
error (the toolkit does not resample).
"""

from __future__ import annotations

import numpy as np
from scipy.io import wavfile

from .errors import FormatError
from .frontend import SAMPLE_RATE, AudioBuffer

_PCM16_SCALE = 32768.0


def read_wav(path) -> AudioBuffer:
    rate, data = wavfile.read(path)
    if data.ndim != 1:
        raise FormatError(f"{path}: expected mono audio, got {data.shape[1]} channels")
    if rate != SAMPLE_RATE:
        raise FormatError(f"{path}: expected {SAMPLE_RATE} Hz, got {rate} Hz (no resampling)")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / _PCM16_SCALE
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise FormatError(
            f"{path}: unsupported sample format {data.dtype}; use PCM 16-bit or float32"
        )
    return AudioBuffer(samples, rate)


def write_wav(path, audio: AudioBuffer, encoding: str = "pcm16") -> None:
    if encoding == "pcm16":
        scaled = np.round(np.clip(audio.samples, -1.0, 1.0) * _PCM16_SCALE)
        pcm = np.clip(scaled, -_PCM16_SCALE, _PCM16_SCALE - 1).astype(np.int16)
        wavfile.write(path, audio.sample_rate, pcm)
    elif encoding == "float32":
        wavfile.write(path, audio.sample_rate, audio.samples.astype(np.float32))
    else:
        raise FormatError(f"unsupported WAV encoding {encoding!r}")
