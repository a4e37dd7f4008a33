"""A posteriori speech-presence-probability (SPP) math.

Under the usual complex-Gaussian model the observed coefficient Y is pure
noise (H0) or speech plus noise (H1).  The fixed-prior posterior follows
Gerkmann & Hendriks (2012): a fixed a priori SNR of 15 dB, uniform priors,
recursive smoothing of the posterior, and a stuck-protection clamp at 0.99.

The oracle target variant replaces the fixed prior and SNR with quantities
computed from the actual speech/noise powers: the prior becomes the Wiener
gain phi_x / (phi_x + phi_n), equivalently alpha = 1/xi, which drives the
posterior to zero when speech power vanishes.  It supplies the per-bin
learning targets for the neural estimator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidConfigError, ShapeMismatchError
from .frontend import ComplexSpectrogram

DEFAULT_XI_EPS = 1e-10


@dataclass(frozen=True)
class FixedPriorParams:
    """Fixed-prior posterior parameters; defaults follow the classic tuning."""

    xi_h1_db: float = 15.0     # fixed a priori SNR under H1
    alpha_prior: float = 1.0   # p(H0)/p(H1); 1.0 means uniform priors
    beta: float = 0.9          # posterior smoothing factor
    lambda_cap: float = 0.99   # stuck-protection cap

    def __post_init__(self):
        if not (0.0 < self.beta < 1.0):
            raise InvalidConfigError("beta must lie in (0, 1)")
        if not (0.0 < self.lambda_cap < 1.0):
            raise InvalidConfigError("lambda_cap must lie in (0, 1)")
        if not (self.alpha_prior > 0.0):
            raise InvalidConfigError("alpha_prior must be > 0")

    @property
    def xi_h1(self) -> float:
        return 10.0 ** (self.xi_h1_db / 10.0)


@dataclass
class SppSmootherState:
    """Recursively smoothed posterior, one entry per frequency bin."""

    p_smoothed: np.ndarray

    @classmethod
    def zeros(cls, num_bins: int) -> "SppSmootherState":
        return cls(np.zeros(num_bins))


@dataclass
class SppMap:
    """K x L matrix of speech presence probabilities."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ShapeMismatchError("SppMap must be a 2-D array")
        if np.any(self.data < 0.0) or np.any(self.data > 1.0):
            raise InvalidConfigError("SPP entries must lie in [0, 1]")


def _check_noise_power(phi_n):
    if np.any(np.asarray(phi_n) <= 0.0):
        raise DomainError("noise power must be strictly positive")


def likelihood_h0(y_pow, phi_n):
    """Complex-Gaussian likelihood of the observation under speech absence."""
    _check_noise_power(phi_n)
    y_pow = np.asarray(y_pow, dtype=np.float64)
    phi_n = np.asarray(phi_n, dtype=np.float64)
    return np.exp(-y_pow / phi_n) / (np.pi * phi_n)


def likelihood_h1(y_pow, phi_n, xi):
    """Likelihood under speech presence at a priori SNR ``xi``; xi=0 reduces to H0."""
    _check_noise_power(phi_n)
    if np.any(np.asarray(xi) < 0.0):
        raise DomainError("a priori SNR must be >= 0")
    scale = np.asarray(phi_n, dtype=np.float64) * (1.0 + np.asarray(xi, dtype=np.float64))
    return np.exp(-np.asarray(y_pow, dtype=np.float64) / scale) / (np.pi * scale)


def posterior_spp_fixed_prior(y_pow, phi_n, params: FixedPriorParams | None = None):
    """Fixed-prior a posteriori SPP.

    p = (1 + alpha (1 + xi) exp(-(y_pow/phi_n) xi/(1+xi)))^-1 with xi fixed
    at ``params.xi_h1_db``.
    """
    params = params or FixedPriorParams()
    _check_noise_power(phi_n)
    y_pow = np.asarray(y_pow, dtype=np.float64)
    phi_n = np.asarray(phi_n, dtype=np.float64)
    xi = params.xi_h1
    glr_inv = params.alpha_prior * (1.0 + xi) * np.exp(-(y_pow / phi_n) * xi / (1.0 + xi))
    out = 1.0 / (1.0 + glr_inv)
    return out if out.ndim else float(out)


def smooth_and_clamp(p_raw, state: SppSmootherState, params: FixedPriorParams | None = None):
    """Stuck-protection step applied to a raw posterior frame.

    The smoothed track is updated first; wherever it exceeds ``lambda_cap``
    the output is capped at ``lambda_cap``, otherwise the raw value passes
    through unchanged.  Returns ``(p_out, state)`` with the state holding
    the new smoothed track.
    """
    params = params or FixedPriorParams()
    p_raw = np.asarray(p_raw, dtype=np.float64)
    if np.any(p_raw < 0.0) or np.any(p_raw > 1.0):
        raise DomainError("raw SPP entries must lie in [0, 1]")
    smoothed = params.beta * state.p_smoothed + (1.0 - params.beta) * p_raw
    p_out = np.where(smoothed > params.lambda_cap,
                     np.minimum(params.lambda_cap, p_raw),
                     p_raw)
    state.p_smoothed = smoothed
    return p_out, state


def wiener_gain(phi_x, phi_n):
    """Linear MMSE gain phi_x / (phi_x + phi_n), in [0, 1]."""
    phi_x = np.asarray(phi_x, dtype=np.float64)
    phi_n = np.asarray(phi_n, dtype=np.float64)
    if np.any(phi_x < 0.0) or np.any(phi_n < 0.0):
        raise DomainError("powers must be >= 0")
    total = phi_x + phi_n
    if np.any(total <= 0.0):
        raise DomainError("phi_x + phi_n must be > 0")
    out = phi_x / total
    return out if out.ndim else float(out)


def oracle_target_spp(y_pow, phi_x, phi_n, xi_eps: float = DEFAULT_XI_EPS):
    """Adaptive-prior posterior used as the learning target.

    With xi = phi_x/phi_n the prior ratio becomes 1/xi, so the posterior is
    (1 + (1 + 1/xi) exp(-(y_pow/phi_n) xi/(1+xi)))^-1 and tends to zero as
    xi -> 0; below ``xi_eps`` the limit value 0 is returned outright.
    """
    _check_noise_power(phi_n)
    y_pow = np.asarray(y_pow, dtype=np.float64)
    phi_x = np.asarray(phi_x, dtype=np.float64)
    phi_n = np.asarray(phi_n, dtype=np.float64)
    if np.any(phi_x < 0.0):
        raise DomainError("speech power must be >= 0")
    xi = phi_x / phi_n
    scalar = xi.ndim == 0
    xi = np.atleast_1d(xi)
    y_over_n = np.atleast_1d(y_pow / phi_n) * np.ones_like(xi)
    out = np.zeros_like(xi)
    live = xi >= xi_eps
    x = xi[live]
    expo = np.exp(-y_over_n[live] * x / (1.0 + x))
    out[live] = 1.0 / (1.0 + (1.0 + 1.0 / x) * expo)
    return float(out[0]) if scalar else out


def target_map(clean_spec: ComplexSpectrogram,
               noise_spec: ComplexSpectrogram,
               noisy_spec: ComplexSpectrogram,
               xi_eps: float = DEFAULT_XI_EPS,
               additivity_tol: float = 1e-6) -> SppMap:
    """Per-bin oracle SPP targets from aligned clean/noise/noisy spectrograms.

    Instantaneous periodograms |X|^2 and |N|^2 stand in for the speech and
    noise PSDs, keeping the targets frame-local and smoothing-free.
    """
    if not (clean_spec.data.shape == noise_spec.data.shape == noisy_spec.data.shape):
        raise ShapeMismatchError("clean/noise/noisy spectrograms must share a shape")
    residual = noisy_spec.data - clean_spec.data - noise_spec.data
    scale = np.linalg.norm(noisy_spec.data)
    if scale > 0 and np.linalg.norm(residual) > additivity_tol * scale:
        raise DomainError("noisy spectrogram is not clean + noise to the required tolerance")
    y_pow = noisy_spec.power()
    x_pow = clean_spec.power()
    n_pow = np.maximum(noise_spec.power(), 1e-300)  # guard exact zeros in silence
    return SppMap(oracle_target_spp(y_pow, x_pow, n_pow, xi_eps))
