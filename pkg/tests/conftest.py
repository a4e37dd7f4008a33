import numpy as np
import pytest

from sppkit.frontend import SAMPLE_RATE, AudioBuffer


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


def sine(freq_hz: float, duration_s: float = 1.0, amplitude: float = 0.5) -> AudioBuffer:
    t = np.arange(int(duration_s * SAMPLE_RATE)) / SAMPLE_RATE
    return AudioBuffer(amplitude * np.sin(2.0 * np.pi * freq_hz * t))


def white(duration_s: float, seed: int, scale: float = 0.1) -> AudioBuffer:
    gen = np.random.default_rng(seed)
    return AudioBuffer(gen.standard_normal(int(duration_s * SAMPLE_RATE)) * scale)
