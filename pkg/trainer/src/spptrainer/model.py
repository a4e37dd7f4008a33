"""Torch implementation of the hybrid global-local SPP model.

The graph, tensor naming, LSTM gate order (input, forget, cell, output),
zero initial states, layer-norm epsilon, and attention head splitting all
match the inference runtime's conventions exactly, so an exported bundle
reproduces the trainer's forward pass bit-for-bit up to float32 rounding.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

NUM_BINS = 129
LATENT_DIM = 32
ENCODER_HIDDEN = 129
DECODER_HIDDEN = 129
ATTENTION_HEADS = 3
FC1_OUT = 258

VARIANTS = ("blstm", "attention")


class SppModel(nn.Module):
    def __init__(self, variant: str):
        super().__init__()
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        self.variant = variant
        if variant == "blstm":
            self.enc_lstm = nn.LSTM(NUM_BINS, ENCODER_HIDDEN, batch_first=True)
            self.enc_proj = nn.Linear(ENCODER_HIDDEN, LATENT_DIM)
            self.decoder = nn.LSTM(NUM_BINS, DECODER_HIDDEN, batch_first=True,
                                   bidirectional=True)
            decoder_out = 2 * DECODER_HIDDEN
        else:
            self.enc_fc = nn.Linear(NUM_BINS, LATENT_DIM)
            self.att1 = nn.MultiheadAttention(NUM_BINS, ATTENTION_HEADS,
                                              batch_first=True)
            self.att2 = nn.MultiheadAttention(NUM_BINS, ATTENTION_HEADS,
                                              batch_first=True)
            decoder_out = NUM_BINS
        # one private FC(33 -> 1) per frequency bin, stored as one matrix:
        # column 0 taps the bin's own feature, the rest mix the shared latent
        self.perbin_w = nn.Parameter(torch.empty(NUM_BINS, LATENT_DIM + 1))
        self.perbin_b = nn.Parameter(torch.zeros(NUM_BINS))
        nn.init.uniform_(self.perbin_w, -(LATENT_DIM + 1) ** -0.5,
                         (LATENT_DIM + 1) ** -0.5)
        self.norm = nn.LayerNorm(NUM_BINS)
        self.fc1 = nn.Linear(decoder_out, FC1_OUT)
        self.fc2 = nn.Linear(FC1_OUT, NUM_BINS)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        """[B, K, L] normalized log-power features -> [B, K, L] SPP."""
        frames = features.transpose(1, 2)                      # [B, L, K]
        if self.variant == "blstm":
            hidden, _ = self.enc_lstm(frames)
            latent = self.enc_proj(hidden)                     # [B, L, 32]
        else:
            latent = self.enc_fc(frames)
        stacked = (self.perbin_w[:, 0].view(1, -1, 1) * features
                   + torch.einsum("kj,blj->bkl", self.perbin_w[:, 1:], latent)
                   + self.perbin_b.view(1, -1, 1))             # [B, K, L]
        normed = self.norm((stacked + features).transpose(1, 2))  # [B, L, K]
        if self.variant == "blstm":
            decoded, _ = self.decoder(normed)                  # [B, L, 258]
        else:
            decoded = normed
            for layer in (self.att1, self.att2):
                mixed, _ = layer(decoded, decoded, decoded, need_weights=False)
                decoded = decoded + mixed
        out = self.fc2(self.fc1(decoded))                      # [B, L, K]
        return torch.sigmoid(out).transpose(1, 2)


def _mha_tensors(prefix: str, layer: nn.MultiheadAttention) -> dict[str, np.ndarray]:
    w = layer.in_proj_weight.detach().numpy()
    b = layer.in_proj_bias.detach().numpy()
    d = NUM_BINS
    return {
        f"{prefix}.q.w": w[0:d], f"{prefix}.q.b": b[0:d],
        f"{prefix}.k.w": w[d:2 * d], f"{prefix}.k.b": b[d:2 * d],
        f"{prefix}.v.w": w[2 * d:3 * d], f"{prefix}.v.b": b[2 * d:3 * d],
        f"{prefix}.out.w": layer.out_proj.weight.detach().numpy(),
        f"{prefix}.out.b": layer.out_proj.bias.detach().numpy(),
    }


def export_tensors(model: SppModel) -> dict[str, np.ndarray]:
    """State dict mapped onto the bundle's tensor names.

    The runtime's LSTM takes a single bias vector, so the two torch biases
    are summed; everything else transfers one to one.
    """
    def npy(t):
        return t.detach().numpy()

    tensors: dict[str, np.ndarray] = {}
    if model.variant == "blstm":
        tensors["enc.lstm.w_ih"] = npy(model.enc_lstm.weight_ih_l0)
        tensors["enc.lstm.w_hh"] = npy(model.enc_lstm.weight_hh_l0)
        tensors["enc.lstm.b"] = npy(model.enc_lstm.bias_ih_l0) + npy(model.enc_lstm.bias_hh_l0)
        tensors["enc.proj.w"] = npy(model.enc_proj.weight)
        tensors["enc.proj.b"] = npy(model.enc_proj.bias)
    else:
        tensors["enc.fc.w"] = npy(model.enc_fc.weight)
        tensors["enc.fc.b"] = npy(model.enc_fc.bias)
    tensors["perbin.w"] = npy(model.perbin_w)
    tensors["perbin.b"] = npy(model.perbin_b)
    tensors["norm.gain"] = npy(model.norm.weight)
    tensors["norm.bias"] = npy(model.norm.bias)
    if model.variant == "blstm":
        tensors["dec.fwd.w_ih"] = npy(model.decoder.weight_ih_l0)
        tensors["dec.fwd.w_hh"] = npy(model.decoder.weight_hh_l0)
        tensors["dec.fwd.b"] = npy(model.decoder.bias_ih_l0) + npy(model.decoder.bias_hh_l0)
        tensors["dec.bwd.w_ih"] = npy(model.decoder.weight_ih_l0_reverse)
        tensors["dec.bwd.w_hh"] = npy(model.decoder.weight_hh_l0_reverse)
        tensors["dec.bwd.b"] = (npy(model.decoder.bias_ih_l0_reverse)
                                + npy(model.decoder.bias_hh_l0_reverse))
    else:
        tensors.update(_mha_tensors("att1", model.att1))
        tensors.update(_mha_tensors("att2", model.att2))
    tensors["fc1.w"] = npy(model.fc1.weight)
    tensors["fc1.b"] = npy(model.fc1.bias)
    tensors["fc2.w"] = npy(model.fc2.weight)
    tensors["fc2.b"] = npy(model.fc2.bias)
    return tensors


def load_tensors(model: SppModel, tensors: dict[str, np.ndarray]) -> SppModel:
    """Inverse of export_tensors: bundle tensors into the torch modules.

    The runtime's single LSTM bias lands in bias_ih; bias_hh is zeroed.
    """
    def t(name):
        return torch.from_numpy(np.ascontiguousarray(tensors[name], dtype=np.float32))

    with torch.no_grad():
        if model.variant == "blstm":
            model.enc_lstm.weight_ih_l0.copy_(t("enc.lstm.w_ih"))
            model.enc_lstm.weight_hh_l0.copy_(t("enc.lstm.w_hh"))
            model.enc_lstm.bias_ih_l0.copy_(t("enc.lstm.b"))
            model.enc_lstm.bias_hh_l0.zero_()
            model.enc_proj.weight.copy_(t("enc.proj.w"))
            model.enc_proj.bias.copy_(t("enc.proj.b"))
            model.decoder.weight_ih_l0.copy_(t("dec.fwd.w_ih"))
            model.decoder.weight_hh_l0.copy_(t("dec.fwd.w_hh"))
            model.decoder.bias_ih_l0.copy_(t("dec.fwd.b"))
            model.decoder.bias_hh_l0.zero_()
            model.decoder.weight_ih_l0_reverse.copy_(t("dec.bwd.w_ih"))
            model.decoder.weight_hh_l0_reverse.copy_(t("dec.bwd.w_hh"))
            model.decoder.bias_ih_l0_reverse.copy_(t("dec.bwd.b"))
            model.decoder.bias_hh_l0_reverse.zero_()
        else:
            model.enc_fc.weight.copy_(t("enc.fc.w"))
            model.enc_fc.bias.copy_(t("enc.fc.b"))
            for prefix, layer in (("att1", model.att1), ("att2", model.att2)):
                layer.in_proj_weight.copy_(torch.cat(
                    [t(f"{prefix}.q.w"), t(f"{prefix}.k.w"), t(f"{prefix}.v.w")]))
                layer.in_proj_bias.copy_(torch.cat(
                    [t(f"{prefix}.q.b"), t(f"{prefix}.k.b"), t(f"{prefix}.v.b")]))
                layer.out_proj.weight.copy_(t(f"{prefix}.out.w"))
                layer.out_proj.bias.copy_(t(f"{prefix}.out.b"))
        model.perbin_w.copy_(t("perbin.w"))
        model.perbin_b.copy_(t("perbin.b"))
        model.norm.weight.copy_(t("norm.gain"))
        model.norm.bias.copy_(t("norm.bias"))
        model.fc1.weight.copy_(t("fc1.w"))
        model.fc1.bias.copy_(t("fc1.b"))
        model.fc2.weight.copy_(t("fc2.w"))
        model.fc2.bias.copy_(t("fc2.b"))
    return model
