"""Naive reference implementations of every layer and of the composed model.

These are deliberately scalar-loop implementations, independent of the
vectorized forward passes in ``layers``/``model``; golden-vector fixtures
are generated from this path so the production engine is always checked
against brute-force math rather than against itself.  Slow by design.
"""

from __future__ import annotations

import math

import numpy as np

from .model import ModelBundle


def naive_sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def naive_fc(x, weight, bias):
    """Triple-loop affine map for [*, in] inputs."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    rows = x.reshape(1, -1) if single else x
    out = np.zeros((rows.shape[0], len(bias)))
    for r in range(rows.shape[0]):
        for o in range(len(bias)):
            acc = float(bias[o])
            for i in range(rows.shape[1]):
                acc += float(weight[o, i]) * float(rows[r, i])
            out[r, o] = acc
    return out[0] if single else out


def naive_lstm(seq, w_ih, w_hh, bias, reverse=False):
    """Step-by-step scalar LSTM (gate order: input, forget, cell, output)."""
    seq = np.asarray(seq, dtype=np.float64)
    length, _ = seq.shape
    hidden = len(bias) // 4
    h = np.zeros(hidden)
    c = np.zeros(hidden)
    out = np.zeros((length, hidden))
    steps = range(length - 1, -1, -1) if reverse else range(length)
    for tstep in steps:
        gates = np.zeros(4 * hidden)
        for g in range(4 * hidden):
            acc = float(bias[g])
            for i in range(seq.shape[1]):
                acc += float(w_ih[g, i]) * float(seq[tstep, i])
            for j in range(hidden):
                acc += float(w_hh[g, j]) * float(h[j])
            gates[g] = acc
        new_c = np.zeros(hidden)
        new_h = np.zeros(hidden)
        for u in range(hidden):
            i_gate = naive_sigmoid(gates[u])
            f_gate = naive_sigmoid(gates[hidden + u])
            g_gate = math.tanh(gates[2 * hidden + u])
            o_gate = naive_sigmoid(gates[3 * hidden + u])
            new_c[u] = f_gate * c[u] + i_gate * g_gate
            new_h[u] = o_gate * math.tanh(new_c[u])
        c, h = new_c, new_h
        out[tstep] = h
    return out


def naive_blstm(seq, w_ih_f, w_hh_f, b_f, w_ih_b, w_hh_b, b_b):
    fwd = naive_lstm(seq, w_ih_f, w_hh_f, b_f)
    bwd = naive_lstm(seq, w_ih_b, w_hh_b, b_b, reverse=True)
    return np.concatenate([fwd, bwd], axis=1)


def naive_mha(seq, w_q, b_q, w_k, b_k, w_v, b_v, w_out, b_out, heads=3,
              causal_mask=False):
    """Per-head, per-pair attention with explicit softmax loops; adds residual."""
    seq = np.asarray(seq, dtype=np.float64)
    length, dim = seq.shape
    head_dim = dim // heads
    q = naive_fc(seq, w_q, b_q)
    k = naive_fc(seq, w_k, b_k)
    v = naive_fc(seq, w_v, b_v)
    mixed = np.zeros((length, dim))
    for h in range(heads):
        lo, hi = h * head_dim, (h + 1) * head_dim
        for t in range(length):
            limit = t + 1 if causal_mask else length
            logits = []
            for m in range(limit):
                acc = 0.0
                for d in range(lo, hi):
                    acc += q[t, d] * k[m, d]
                logits.append(acc / math.sqrt(head_dim))
            peak = max(logits)
            weights = [math.exp(val - peak) for val in logits]
            total = sum(weights)
            for m in range(limit):
                w = weights[m] / total
                for d in range(lo, hi):
                    mixed[t, d] += w * v[m, d]
    return seq + naive_fc(mixed, w_out, b_out)


def naive_layer_norm(x, gain, bias, eps=1e-5):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    rows = x.reshape(1, -1) if single else x
    out = np.zeros_like(rows)
    dim = rows.shape[1]
    for r in range(rows.shape[0]):
        mean = sum(rows[r]) / dim
        var = sum((val - mean) ** 2 for val in rows[r]) / dim
        denom = math.sqrt(var + eps)
        for d in range(dim):
            out[r, d] = (rows[r, d] - mean) / denom * float(gain[d]) + float(bias[d])
    return out[0] if single else out


def naive_model_forward(bundle: ModelBundle, feature_matrix: np.ndarray) -> np.ndarray:
    """Composed brute-force forward over a normalized K x L feature matrix."""
    desc = bundle.descriptor
    t = bundle.tensors
    data = np.asarray(feature_matrix, dtype=np.float64)
    frames = data.T

    if desc.variant == "blstm":
        hidden = naive_lstm(frames, t["enc.lstm.w_ih"], t["enc.lstm.w_hh"], t["enc.lstm.b"])
        latent = naive_fc(hidden, t["enc.proj.w"], t["enc.proj.b"])
    else:
        latent = naive_fc(frames, t["enc.fc.w"], t["enc.fc.b"])

    num_bins, num_frames = data.shape
    stacked = np.zeros((num_bins, num_frames))
    for k in range(num_bins):
        for l in range(num_frames):
            acc = float(t["perbin.b"][k])
            acc += float(t["perbin.w"][k, 0]) * data[k, l]
            for j in range(desc.latent_dim):
                acc += float(t["perbin.w"][k, 1 + j]) * latent[l, j]
            stacked[k, l] = acc

    normed = naive_layer_norm((stacked + data).T, t["norm.gain"], t["norm.bias"])

    if desc.variant == "blstm":
        decoded = naive_blstm(normed,
                              t["dec.fwd.w_ih"], t["dec.fwd.w_hh"], t["dec.fwd.b"],
                              t["dec.bwd.w_ih"], t["dec.bwd.w_hh"], t["dec.bwd.b"])
    else:
        decoded = normed
        for layer in ("att1", "att2"):
            decoded = naive_mha(decoded,
                                t[f"{layer}.q.w"], t[f"{layer}.q.b"],
                                t[f"{layer}.k.w"], t[f"{layer}.k.b"],
                                t[f"{layer}.v.w"], t[f"{layer}.v.b"],
                                t[f"{layer}.out.w"], t[f"{layer}.out.b"],
                                heads=desc.attention_heads)

    pre = naive_fc(naive_fc(decoded, t["fc1.w"], t["fc1.b"]), t["fc2.w"], t["fc2.b"])
    out = np.zeros((num_bins, num_frames))
    for l in range(num_frames):
        for k in range(num_bins):
            out[k, l] = naive_sigmoid(pre[l, k])
    return out
