"""SPP-driven noise PSD estimation.

Two estimators share the conditional-mean building block
E[|N|^2 | Y] = (1-p) |Y|^2 + p * phi_prev:

* the smoothed ("optimal") tracker additionally low-passes that estimate
  with factor ``c``, following the unbiased-MMSE tracker of Gerkmann &
  Hendriks (2012);
* the unsmoothed ("sub-optimal") estimator keeps only the speech-absence
  branch (1-p) |Y|^2 of the current frame, with no temporal memory at all.

Initialization assumes the leading ``init_frames`` frames (0.1 s by
default) are noise-dominated and averages their periodograms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidConfigError

DEFAULT_SMOOTHING = 0.8
DEFAULT_INIT_FRAMES = 12
DEFAULT_PSD_FLOOR = 1e-10


@dataclass
class NoiseTrackerState:
    """Per-bin noise PSD estimate plus smoothing/initialization state."""

    phi_n_hat: np.ndarray
    c: float = DEFAULT_SMOOTHING
    init_frames: int = DEFAULT_INIT_FRAMES
    frames_seen: int = 0
    floor: float = DEFAULT_PSD_FLOOR

    def __post_init__(self):
        self.phi_n_hat = np.asarray(self.phi_n_hat, dtype=np.float64)
        if not (0.0 < self.c < 1.0):
            raise InvalidConfigError("smoothing factor c must lie in (0, 1)")
        if self.init_frames < 1:
            raise InvalidConfigError("init_frames must be >= 1")

    @classmethod
    def fresh(cls, num_bins: int, c: float = DEFAULT_SMOOTHING,
              init_frames: int = DEFAULT_INIT_FRAMES,
              floor: float = DEFAULT_PSD_FLOOR) -> "NoiseTrackerState":
        return cls(np.zeros(num_bins), c=c, init_frames=init_frames, floor=floor)

    @classmethod
    def from_psd(cls, phi_n: np.ndarray, c: float = DEFAULT_SMOOTHING,
                 floor: float = DEFAULT_PSD_FLOOR) -> "NoiseTrackerState":
        """Start from a known noise PSD (oracle or carry-over), already initialized."""
        state = cls(np.maximum(np.asarray(phi_n, dtype=np.float64), floor), c=c, floor=floor)
        state.frames_seen = state.init_frames
        return state

    @property
    def initialized(self) -> bool:
        return self.frames_seen >= self.init_frames


def init_noise_psd(state: NoiseTrackerState, y_pow_frame: np.ndarray) -> NoiseTrackerState:
    """Fold one leading frame into the running-mean initialization."""
    if state.initialized:
        raise DomainError("tracker already initialized")
    y = np.asarray(y_pow_frame, dtype=np.float64)
    n = state.frames_seen
    state.phi_n_hat = (state.phi_n_hat * n + y) / (n + 1)
    state.frames_seen = n + 1
    if state.initialized:
        state.phi_n_hat = np.maximum(state.phi_n_hat, state.floor)
    return state


def suboptimal_mmse(p_spp, y_pow, floor: float = DEFAULT_PSD_FLOOR):
    """Unsmoothed current-frame noise estimate max((1-p) |Y|^2, floor)."""
    p = np.asarray(p_spp, dtype=np.float64)
    y = np.asarray(y_pow, dtype=np.float64)
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise DomainError("SPP entries must lie in [0, 1]")
    if np.any(y < 0.0):
        raise DomainError("periodogram entries must be >= 0")
    out = np.maximum((1.0 - p) * y, floor)
    return out if out.ndim else float(out)


def optimal_mmse_step(state: NoiseTrackerState, p_spp: np.ndarray, y_pow: np.ndarray):
    """One smoothed-tracker update; returns ``(phi_n, state)``.

    The conditional mean blends the current periodogram with the previous
    estimate under the SPP, then the track is recursively smoothed with
    factor ``c``.
    """
    if not state.initialized:
        raise DomainError("noise tracker must be initialized before updates")
    p = np.asarray(p_spp, dtype=np.float64)
    y = np.asarray(y_pow, dtype=np.float64)
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise DomainError("SPP entries must lie in [0, 1]")
    cond_mean = (1.0 - p) * y + p * state.phi_n_hat
    state.phi_n_hat = np.maximum(
        state.c * state.phi_n_hat + (1.0 - state.c) * cond_mean, state.floor
    )
    return state.phi_n_hat.copy(), state
