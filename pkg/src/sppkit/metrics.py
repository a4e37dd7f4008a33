"""Evaluation metrics: log-spectral noise-tracking error, ROC/AUC/Pd,
KL-style training loss, and segmental SNR.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidConfigError, ShapeMismatchError
from .frontend import AudioBuffer

DEFAULT_LABEL_THRESHOLD = 0.135
DEFAULT_KL_EPS = 1e-7


def log_err(ref_psd: np.ndarray, est_psd: np.ndarray) -> float:
    """Symmetric mean log-spectral distortion in dB:
    mean over all bins of |10 log10(ref / est)|."""
    ref = np.asarray(ref_psd, dtype=np.float64)
    est = np.asarray(est_psd, dtype=np.float64)
    if ref.shape != est.shape:
        raise ShapeMismatchError("reference and estimate must share a shape")
    if np.any(ref <= 0.0) or np.any(est <= 0.0):
        raise DomainError("PSD entries must be positive (apply a floor first)")
    return float(np.mean(np.abs(10.0 * np.log10(ref / est))))


@dataclass
class RocCurve:
    """Operating points sorted by false-alarm rate, endpoints included."""

    pfa: np.ndarray
    pd: np.ndarray
    thresholds: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.pfa) < 0.0) or np.any(np.diff(self.pd) < 0.0):
            raise InvalidConfigError("ROC curve must be monotonically non-decreasing")


def roc(scores, truth, label_threshold: float = DEFAULT_LABEL_THRESHOLD) -> RocCurve:
    """ROC of ``scores`` as a detector of ``truth >= label_threshold``.

    The threshold sweeps the sorted unique score values; Pd = TP/(TP+FN) and
    Pfa = FP/(FP+TN).  Raises when the labeling leaves only one class.
    """
    scores = np.asarray(getattr(scores, "data", scores), dtype=np.float64).ravel()
    truth = np.asarray(getattr(truth, "data", truth), dtype=np.float64).ravel()
    if scores.shape != truth.shape:
        raise ShapeMismatchError("scores and truth must share a shape")
    labels = truth >= label_threshold
    positives = int(labels.sum())
    negatives = labels.size - positives
    if positives == 0 or negatives == 0:
        raise DomainError("both classes must be present after labeling the truth")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    tp = np.cumsum(sorted_labels)
    fp = np.cumsum(~sorted_labels)
    # one operating point per distinct score (threshold = that score)
    last = np.nonzero(np.diff(sorted_scores))[0]
    keep = np.concatenate([last, [scores.size - 1]])
    pd = tp[keep] / positives
    pfa = fp[keep] / negatives
    thresholds = sorted_scores[keep]
    pfa = np.concatenate([[0.0], pfa, [1.0]])
    pd = np.concatenate([[0.0], pd, [1.0]])
    thresholds = np.concatenate([[np.inf], thresholds, [-np.inf]])
    return RocCurve(pfa, pd, thresholds)


def auc(curve: RocCurve) -> float:
    """Area under the ROC curve by trapezoidal integration over Pfa."""
    return float(np.sum(np.diff(curve.pfa) * (curve.pd[1:] + curve.pd[:-1]) / 2.0))


def pd_at_pfa(curve: RocCurve, pfa_target: float = 0.05) -> float:
    """Detection rate at a false-alarm rate, linearly interpolated."""
    return float(np.interp(pfa_target, curve.pfa, curve.pd))


def kl_divergence(target, estimate, eps: float = DEFAULT_KL_EPS,
                  full_binary: bool = False) -> float:
    """Mean per-bin target * ln(target/estimate) after clamping both maps
    into [eps, 1-eps].

    ``full_binary=True`` adds the complementary (1-t) ln((1-t)/(1-e)) term,
    giving a true (non-negative) Bernoulli KL; the plain form can go
    negative when the estimate overshoots the target.
    """
    if not (eps > 0):
        raise InvalidConfigError("eps must be > 0")
    t = np.asarray(getattr(target, "data", target), dtype=np.float64)
    e = np.asarray(getattr(estimate, "data", estimate), dtype=np.float64)
    if t.shape != e.shape:
        raise ShapeMismatchError("target and estimate must share a shape")
    t = np.clip(t, eps, 1.0 - eps)
    e = np.clip(e, eps, 1.0 - eps)
    loss = t * np.log(t / e)
    if full_binary:
        loss = loss + (1.0 - t) * np.log((1.0 - t) / (1.0 - e))
    return float(np.mean(loss))


def segmental_snr(ref: AudioBuffer, est: AudioBuffer, frame_len: int = 256,
                  floor_db: float = -10.0, ceil_db: float = 35.0,
                  silence_power: float = 1e-12) -> float:
    """Frame-averaged SNR of ``est`` against ``ref`` in dB.

    Non-overlapping frames; each frame's 10 log10(P_ref/P_err) is clamped
    into [floor_db, ceil_db] and frames whose reference power is at or
    below ``silence_power`` are skipped.
    """
    r = ref.samples
    e = est.samples
    if len(r) != len(e):
        raise ShapeMismatchError(f"length mismatch: {len(r)} vs {len(e)} samples")
    values = []
    for start in range(0, len(r) - frame_len + 1, frame_len):
        ref_frame = r[start:start + frame_len]
        err = ref_frame - e[start:start + frame_len]
        p_ref = float(np.sum(ref_frame ** 2))
        if p_ref <= silence_power:
            continue
        p_err = float(np.sum(err ** 2))
        snr = ceil_db if p_err == 0.0 else 10.0 * np.log10(p_ref / p_err)
        values.append(min(max(snr, floor_db), ceil_db))
    if not values:
        raise DomainError("no active reference frames to score")
    return float(np.mean(values))
