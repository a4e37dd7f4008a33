"""Binary model-bundle format (magic ``SPPM``), the weight-exchange contract
with the trainer.

Layout, all little-endian:

    "SPPM" | u32 version | u32 tensor_count
    per tensor: u16 name_len | name (UTF-8) | u8 rank | u32 dims... | f32 data
    footer: f64 norm_mean | f64 norm_std

Tensors are written in the descriptor's inventory order; loading validates
magic, version, the tensor table, and every shape, and reports truncation
with the name of the tensor that could not be read.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import FormatError, ValidationError
from ..frontend import NormStats
from .model import ModelBundle, ModelDescriptor, infer_variant

MAGIC = b"SPPM"
VERSION = 1


def save_model(bundle: ModelBundle, path) -> None:
    bundle.validate()
    inventory = bundle.descriptor.tensor_inventory()
    parts = [MAGIC, struct.pack("<II", VERSION, len(inventory))]
    for name in inventory:
        tensor = np.ascontiguousarray(bundle.tensors[name], dtype=np.float32)
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", tensor.ndim))
        parts.append(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
        parts.append(tensor.tobytes())
    parts.append(struct.pack("<dd", bundle.norm_stats.mean, bundle.norm_stats.std))
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


class _Reader:
    def __init__(self, buf: bytes, path):
        self.buf = buf
        self.pos = 0
        self.path = path

    def take(self, count: int, what: str) -> bytes:
        if len(self.buf) - self.pos < count:
            raise FormatError(f"{self.path}: truncated while reading {what}")
        out = self.buf[self.pos:self.pos + count]
        self.pos += count
        return out


def load_model(path) -> ModelBundle:
    with open(path, "rb") as fh:
        reader = _Reader(fh.read(), path)
    if reader.take(4, "magic") != MAGIC:
        raise FormatError(f"{path}: bad magic, not a model bundle")
    version, count = struct.unpack("<II", reader.take(8, "header"))
    if version != VERSION:
        raise FormatError(f"{path}: unsupported bundle version {version}")
    tensors: dict[str, np.ndarray] = {}
    for index in range(count):
        label = f"tensor {index + 1}/{count}"
        (name_len,) = struct.unpack("<H", reader.take(2, f"{label} name length"))
        try:
            name = reader.take(name_len, f"{label} name").decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"{path}: {label} has an undecodable name "
                              "(corrupt tensor table)") from exc
        (rank,) = struct.unpack("<B", reader.take(1, f"tensor '{name}' rank"))
        shape = struct.unpack(f"<{rank}I", reader.take(4 * rank, f"tensor '{name}' dims"))
        numel = 1
        for dim in shape:
            numel *= dim
        raw = reader.take(4 * numel, f"tensor '{name}' data")
        tensors[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
    mean, std = struct.unpack("<dd", reader.take(16, "normalization footer"))
    if reader.pos != len(reader.buf):
        raise FormatError(f"{path}: {len(reader.buf) - reader.pos} trailing bytes")
    if not std > 0:
        raise ValidationError(f"{path}: normalization std must be > 0, got {std}")
    descriptor = ModelDescriptor(infer_variant(tensors))
    bundle = ModelBundle(descriptor, tensors, NormStats(mean, std), format_version=version)
    bundle.validate()
    return bundle
