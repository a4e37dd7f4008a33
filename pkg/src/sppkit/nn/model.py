"""Hybrid global-local SPP model: descriptor, bundle container, forward pass,
and parameter accounting.

Graph (both variants):

1. encoder maps each 129-bin frame vector to a 32-dim global latent
   (LSTM with a linear projection for the ``blstm`` variant, a single FC
   for the ``attention`` variant);
2. each frequency bin concatenates its own feature with the latent (33
   inputs) and passes through its private FC to one scalar;
3. the stacked 129 scalars are residual-added to the input features and
   layer-normalized over the feature axis per frame;
4. decoder runs over frames: one BLSTM (129 per direction -> 258) or two
   multi-head attention layers with 3 heads (129 -> 129);
5. two FC layers (decoder out -> 258 -> 129) and a sigmoid produce the
   per-bin speech presence probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidConfigError, ShapeMismatchError, ValidationError
from ..frontend import LogPowerFeatures, NormStats
from ..spp import SppMap
from .layers import blstm_forward, fc_forward, layer_norm, lstm_forward, mha_forward, sigmoid

VARIANTS = ("blstm", "attention")


@dataclass(frozen=True)
class ModelDescriptor:
    variant: str
    num_bins: int = 129
    latent_dim: int = 32
    encoder_hidden: int = 129      # LSTM width before the latent projection (blstm only)
    decoder_hidden: int = 129      # per direction (blstm) / model dim (attention)
    attention_heads: int = 3
    attention_layers: int = 2
    fc1_out: int = 258

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidConfigError(f"unknown variant {self.variant!r}")
        if self.decoder_hidden % self.attention_heads != 0:
            raise InvalidConfigError("attention heads must divide the model dim")

    @property
    def per_bin_in(self) -> int:
        return self.latent_dim + 1

    @property
    def decoder_out(self) -> int:
        return 2 * self.decoder_hidden if self.variant == "blstm" else self.decoder_hidden

    def tensor_inventory(self) -> dict[str, tuple[int, ...]]:
        """Names and shapes of every trainable tensor, in a fixed order."""
        k, latent = self.num_bins, self.latent_dim
        inv: dict[str, tuple[int, ...]] = {}
        if self.variant == "blstm":
            h = self.encoder_hidden
            inv["enc.lstm.w_ih"] = (4 * h, k)
            inv["enc.lstm.w_hh"] = (4 * h, h)
            inv["enc.lstm.b"] = (4 * h,)
            inv["enc.proj.w"] = (latent, h)
            inv["enc.proj.b"] = (latent,)
        else:
            inv["enc.fc.w"] = (latent, k)
            inv["enc.fc.b"] = (latent,)
        inv["perbin.w"] = (k, self.per_bin_in)
        inv["perbin.b"] = (k,)
        inv["norm.gain"] = (k,)
        inv["norm.bias"] = (k,)
        if self.variant == "blstm":
            d = self.decoder_hidden
            for direction in ("fwd", "bwd"):
                inv[f"dec.{direction}.w_ih"] = (4 * d, k)
                inv[f"dec.{direction}.w_hh"] = (4 * d, d)
                inv[f"dec.{direction}.b"] = (4 * d,)
        else:
            for layer in ("att1", "att2"):
                for proj in ("q", "k", "v", "out"):
                    inv[f"{layer}.{proj}.w"] = (self.decoder_hidden, self.decoder_hidden)
                    inv[f"{layer}.{proj}.b"] = (self.decoder_hidden,)
        inv["fc1.w"] = (self.fc1_out, self.decoder_out)
        inv["fc1.b"] = (self.fc1_out,)
        inv["fc2.w"] = (k, self.fc1_out)
        inv["fc2.b"] = (k,)
        return inv


def param_count(descriptor: ModelDescriptor) -> int:
    """Exact trainable-parameter total for the graph."""
    return sum(int(np.prod(shape)) for shape in descriptor.tensor_inventory().values())


@dataclass
class ModelBundle:
    """Immutable-after-load weight container shared with the trainer."""

    descriptor: ModelDescriptor
    tensors: dict[str, np.ndarray]
    norm_stats: NormStats
    format_version: int = 1

    def validate(self) -> None:
        inventory = self.descriptor.tensor_inventory()
        missing = sorted(set(inventory) - set(self.tensors))
        extra = sorted(set(self.tensors) - set(inventory))
        if missing:
            raise ValidationError(f"bundle is missing tensors: {', '.join(missing)}")
        if extra:
            raise ValidationError(f"bundle has unexpected tensors: {', '.join(extra)}")
        for name, shape in inventory.items():
            got = tuple(self.tensors[name].shape)
            if got != shape:
                raise ValidationError(f"tensor {name}: shape {got}, expected {shape}")
            if not np.all(np.isfinite(self.tensors[name])):
                raise ValidationError(f"tensor {name} contains non-finite values")


def infer_variant(tensor_names) -> str:
    names = set(tensor_names)
    if "dec.fwd.w_ih" in names:
        return "blstm"
    if "att1.q.w" in names:
        return "attention"
    raise ValidationError("cannot infer model variant from tensor inventory")


def random_bundle(variant: str, seed: int, scale: float = 1.0,
                  norm_stats: NormStats | None = None) -> ModelBundle:
    """Random float32 bundle for fixtures and untrained baselines.

    Weights are drawn at ``scale / sqrt(fan_in)`` so activations stay O(1)
    through the deep paths and fixture outputs do not saturate the sigmoid.
    """
    descriptor = ModelDescriptor(variant)
    rng = np.random.default_rng(seed)
    tensors = {}
    for name, shape in descriptor.tensor_inventory().items():
        std = scale / np.sqrt(shape[-1]) if len(shape) > 1 else 0.1 * scale
        tensors[name] = (rng.standard_normal(shape) * std).astype(np.float32)
    bundle = ModelBundle(descriptor, tensors, norm_stats or NormStats(0.0, 1.0))
    bundle.validate()
    return bundle


def model_forward(bundle: ModelBundle, features: LogPowerFeatures) -> SppMap:
    """Run the hybrid global-local graph over normalized K x L features."""
    if not features.normalized:
        raise ValidationError("model_forward requires normalized features "
                              "(run normalize() with the bundle's stats)")
    data = features.data
    desc = bundle.descriptor
    if data.shape[0] != desc.num_bins:
        raise ShapeMismatchError(f"features have {data.shape[0]} bins, model expects {desc.num_bins}")
    t = bundle.tensors
    frames = data.T                                    # [L, K]

    if desc.variant == "blstm":
        hidden = lstm_forward(frames, t["enc.lstm.w_ih"], t["enc.lstm.w_hh"], t["enc.lstm.b"])
        latent = fc_forward(hidden, t["enc.proj.w"], t["enc.proj.b"])      # [L, 32]
    else:
        latent = fc_forward(frames, t["enc.fc.w"], t["enc.fc.b"])          # [L, 32]

    # per-bin FC over concat(feature(k, l), latent(l)): weight column 0 is the
    # feature tap, the rest mix the shared latent
    perbin_w = np.asarray(t["perbin.w"], dtype=np.float64)
    perbin_b = np.asarray(t["perbin.b"], dtype=np.float64)
    stacked = perbin_w[:, :1] * data + perbin_w[:, 1:] @ latent.T + perbin_b[:, None]

    residual = (stacked + data).T                      # [L, K]
    normed = layer_norm(residual, t["norm.gain"], t["norm.bias"])

    if desc.variant == "blstm":
        decoded = blstm_forward(normed,
                                t["dec.fwd.w_ih"], t["dec.fwd.w_hh"], t["dec.fwd.b"],
                                t["dec.bwd.w_ih"], t["dec.bwd.w_hh"], t["dec.bwd.b"])
    else:
        decoded = normed
        for layer in ("att1", "att2"):
            decoded = mha_forward(decoded,
                                  t[f"{layer}.q.w"], t[f"{layer}.q.b"],
                                  t[f"{layer}.k.w"], t[f"{layer}.k.b"],
                                  t[f"{layer}.v.w"], t[f"{layer}.v.b"],
                                  t[f"{layer}.out.w"], t[f"{layer}.out.b"],
                                  heads=desc.attention_heads)

    out = fc_forward(fc_forward(decoded, t["fc1.w"], t["fc1.b"]), t["fc2.w"], t["fc2.b"])
    return SppMap(sigmoid(out).T)
