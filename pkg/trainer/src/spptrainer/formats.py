"""Byte-level readers/writers for the boundary formats.

These implement the on-disk contracts directly (independently of the
inference runtime's code): pair files (magic ``SPPD``) are read for
training, weight bundles (magic ``SPPM``) are written for the runtime.
Layouts are little-endian throughout; see the runtime's README for the
field-by-field description.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

_HEADER = struct.Struct("<4sIII")
_PAIR_META = struct.Struct("<dqdd")

PAIR_MAGIC = b"SPPD"
FEATURES_MAGIC = b"SPPF"
SPP_MAGIC = b"SPPP"
BUNDLE_MAGIC = b"SPPM"
BUNDLE_VERSION = 1


class PairFormatError(ValueError):
    pass


@dataclass
class TrainingPair:
    features: np.ndarray   # K x L float32, normalized
    target: np.ndarray     # K x L float32 in [0, 1]
    seed: int
    snr_db: float
    norm_mean: float
    norm_std: float


def _read_block(buf: bytes, offset: int, magic: bytes):
    header_magic, version, k, l = _HEADER.unpack_from(buf, offset)
    if header_magic != magic:
        raise PairFormatError(f"expected block {magic!r}, found {header_magic!r}")
    start = offset + _HEADER.size
    count = k * l
    if len(buf) - start < 4 * count:
        raise PairFormatError("pair file truncated inside a matrix block")
    data = np.frombuffer(buf, dtype="<f4", count=count, offset=start).reshape(k, l)
    return data.copy(), start + 4 * count


def read_pair_file(path) -> TrainingPair:
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _HEADER.size + _PAIR_META.size:
        raise PairFormatError(f"{path}: truncated pair file")
    magic, version, k, l = _HEADER.unpack_from(buf, 0)
    if magic != PAIR_MAGIC:
        raise PairFormatError(f"{path}: bad magic {magic!r}")
    if version != 1:
        raise PairFormatError(f"{path}: unsupported pair version {version}")
    snr_db, seed, mean, std = _PAIR_META.unpack_from(buf, _HEADER.size)
    offset = _HEADER.size + _PAIR_META.size
    features, offset = _read_block(buf, offset, FEATURES_MAGIC)
    target, offset = _read_block(buf, offset, SPP_MAGIC)
    if features.shape != (k, l) or target.shape != (k, l):
        raise PairFormatError(f"{path}: block shapes disagree with header")
    return TrainingPair(features, target, seed, snr_db, mean, std)


def write_bundle(path, tensors: dict[str, np.ndarray], norm_mean: float,
                 norm_std: float) -> None:
    """Serialize named float32 tensors plus normalization stats.

    Tensors are written in the given dict order; the runtime validates the
    inventory against its architecture descriptor on load.
    """
    parts = [BUNDLE_MAGIC, struct.pack("<II", BUNDLE_VERSION, len(tensors))]
    for name, tensor in tensors.items():
        data = np.ascontiguousarray(tensor, dtype=np.float32)
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", data.ndim))
        parts.append(struct.pack(f"<{data.ndim}I", *data.shape))
        parts.append(data.tobytes())
    parts.append(struct.pack("<dd", norm_mean, norm_std))
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))
