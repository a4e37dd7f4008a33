"""Tensor-level forward primitives for the SPP inference engine.

All math runs in float64 regardless of the float32 storage of bundle
weights; forward passes are deterministic and allocate only local state.
LSTM gate rows are ordered input, forget, cell, output, and recurrences
start from zero states; the trainer fixes the identical conventions so the
two sides agree bit-for-bit on semantics.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # split form avoids exp overflow warnings for large |x|
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(x):
    return _sigmoid(np.asarray(x, dtype=np.float64))


def fc_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Affine map x @ W^T + b for [*, in] inputs and [out, in] weights."""
    x = np.asarray(x, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    if weight.ndim != 2 or bias.shape != (weight.shape[0],):
        raise ShapeMismatchError("fc_forward needs weight [out, in] and bias [out]")
    if x.shape[-1] != weight.shape[1]:
        raise ShapeMismatchError(
            f"fc_forward input dim {x.shape[-1]} != weight in-dim {weight.shape[1]}")
    return x @ weight.T + bias


def lstm_forward(seq: np.ndarray, w_ih: np.ndarray, w_hh: np.ndarray,
                 bias: np.ndarray, reverse: bool = False) -> np.ndarray:
    """Single-direction LSTM over a [L, in] sequence; returns [L, hidden].

    ``reverse=True`` runs the recurrence back to front and returns outputs
    realigned to the original time order.
    """
    seq = np.asarray(seq, dtype=np.float64)
    w_ih = np.asarray(w_ih, dtype=np.float64)
    w_hh = np.asarray(w_hh, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    if seq.ndim != 2:
        raise ShapeMismatchError("lstm_forward needs a [L, in] sequence")
    if w_ih.shape[0] % 4 != 0:
        raise ShapeMismatchError("lstm weights must stack 4 gates")
    hidden = w_ih.shape[0] // 4
    if w_ih.shape[1] != seq.shape[1] or w_hh.shape != (4 * hidden, hidden) \
            or bias.shape != (4 * hidden,):
        raise ShapeMismatchError("inconsistent LSTM weight shapes")

    order = range(seq.shape[0] - 1, -1, -1) if reverse else range(seq.shape[0])
    pre_in = seq @ w_ih.T + bias         # input contribution, all frames at once
    h = np.zeros(hidden)
    c = np.zeros(hidden)
    out = np.empty((seq.shape[0], hidden))
    for t in order:
        gates = pre_in[t] + h @ w_hh.T
        i = _sigmoid(gates[0:hidden])
        f = _sigmoid(gates[hidden:2 * hidden])
        g = np.tanh(gates[2 * hidden:3 * hidden])
        o = _sigmoid(gates[3 * hidden:4 * hidden])
        c = f * c + i * g
        h = o * np.tanh(c)
        out[t] = h
    return out


def blstm_forward(seq: np.ndarray,
                  w_ih_f: np.ndarray, w_hh_f: np.ndarray, b_f: np.ndarray,
                  w_ih_b: np.ndarray, w_hh_b: np.ndarray, b_b: np.ndarray) -> np.ndarray:
    """Bidirectional LSTM; concatenates forward and backward outputs per frame."""
    fwd = lstm_forward(seq, w_ih_f, w_hh_f, b_f)
    bwd = lstm_forward(seq, w_ih_b, w_hh_b, b_b, reverse=True)
    return np.concatenate([fwd, bwd], axis=1)


def mha_forward(seq: np.ndarray, w_q, b_q, w_k, b_k, w_v, b_v, w_out, b_out,
                heads: int = 3, causal_mask: bool = False) -> np.ndarray:
    """One multi-head self-attention layer with a residual add around it.

    Scaled dot-product attention per head (scale 1/sqrt(d/heads), softmax
    over the key axis), concatenated heads through the output projection.
    """
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 2:
        raise ShapeMismatchError("mha_forward needs a [L, d] sequence")
    length, dim = seq.shape
    if dim % heads != 0:
        raise ShapeMismatchError(f"model dim {dim} not divisible by {heads} heads")
    head_dim = dim // heads

    q = fc_forward(seq, w_q, b_q).reshape(length, heads, head_dim)
    k = fc_forward(seq, w_k, b_k).reshape(length, heads, head_dim)
    v = fc_forward(seq, w_v, b_v).reshape(length, heads, head_dim)

    # [heads, L, L] attention logits
    scores = np.einsum("lhd,mhd->hlm", q, k) / np.sqrt(head_dim)
    if causal_mask:
        scores = np.where(np.tril(np.ones((length, length), dtype=bool)), scores, -np.inf)
    scores -= scores.max(axis=2, keepdims=True)
    weights = np.exp(scores)
    weights /= weights.sum(axis=2, keepdims=True)
    mixed = np.einsum("hlm,mhd->lhd", weights, v).reshape(length, dim)
    return seq + fc_forward(mixed, w_out, b_out)


def layer_norm(x: np.ndarray, gain: np.ndarray, bias: np.ndarray,
               eps: float = 1e-5) -> np.ndarray:
    """Per-position normalization over the trailing feature axis, then affine."""
    if not (eps > 0):
        raise ShapeMismatchError("layer_norm eps must be > 0")
    x = np.asarray(x, dtype=np.float64)
    gain = np.asarray(gain, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    if gain.shape != (x.shape[-1],) or bias.shape != (x.shape[-1],):
        raise ShapeMismatchError("layer_norm gain/bias must match the feature dim")
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + eps) * gain + bias
