"""sppkit: single-channel speech enhancement built around per-bin speech
presence probabilities.

The pipeline estimates SPP (statistically or with a small neural model),
derives a noise PSD track from it, and applies log-spectral-amplitude
gains; synthetic data generation and an evaluation kit support desk-scale
verification end to end.
"""

from .datagen import MixSpec, mix_at_snr, synth_mixture, synth_noise, synth_speechlike
from .enhance import (DdState, EnhanceConfig, EnhanceDiagnostics, aposteriori_snr,
                      dd_apriori_snr, enhance, expint_e1, lsa_gain, ml_apriori_snr)
from .frontend import (AudioBuffer, ComplexSpectrogram, LogPowerFeatures, NormStats,
                       StftConfig, feature_stats, hamming_window, istft, log_power,
                       normalize, stft)
from .metrics import RocCurve, auc, kl_divergence, log_err, pd_at_pfa, roc, segmental_snr
from .noise import NoiseTrackerState, init_noise_psd, optimal_mmse_step, suboptimal_mmse
from .spp import (FixedPriorParams, SppMap, SppSmootherState, likelihood_h0,
                  likelihood_h1, oracle_target_spp, posterior_spp_fixed_prior,
                  smooth_and_clamp, target_map, wiener_gain)
from .wavio import read_wav, write_wav

__version__ = "0.1.0"
