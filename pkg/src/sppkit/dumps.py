"""Binary dump formats for K x L matrices and training pairs.

Every matrix dump starts with a 16-byte little-endian header:

    magic (4 bytes) | u32 version | u32 K | u32 L

followed by K*L float32 values, row-major. Magics: ``SPPF`` log-power
features, ``SPPP`` SPP maps, ``SPPN`` noise-PSD tracks.

A pair file (magic ``SPPD``) carries one utterance of training data: the
same 16-byte header, a 32-byte metadata block (f64 snr_db, i64 seed,
f64 norm mean, f64 norm std), then an embedded SPPF block (normalized
features) and an embedded SPPP block (target SPP map).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ShapeMismatchError

MAGIC_FEATURES = b"SPPF"
MAGIC_SPP = b"SPPP"
MAGIC_NOISE = b"SPPN"
MAGIC_PAIR = b"SPPD"

FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sIII")
_PAIR_META = struct.Struct("<dqdd")

_MATRIX_MAGICS = (MAGIC_FEATURES, MAGIC_SPP, MAGIC_NOISE)


def _pack_matrix(data: np.ndarray, magic: bytes) -> bytes:
    data = np.ascontiguousarray(data, dtype=np.float32)
    if data.ndim != 2:
        raise ShapeMismatchError("matrix dumps require 2-D arrays")
    header = _HEADER.pack(magic, FORMAT_VERSION, data.shape[0], data.shape[1])
    return header + data.tobytes()


def _unpack_matrix(buf: bytes, offset: int, expected_magic: bytes | None):
    if len(buf) - offset < _HEADER.size:
        raise FormatError("truncated dump: header incomplete")
    magic, version, k, l = _HEADER.unpack_from(buf, offset)
    if expected_magic is not None:
        if magic != expected_magic:
            raise FormatError(f"bad magic {magic!r}, expected {expected_magic!r}")
    elif magic not in _MATRIX_MAGICS:
        raise FormatError(f"unknown dump magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported dump version {version}")
    nbytes = 4 * k * l
    start = offset + _HEADER.size
    if len(buf) - start < nbytes:
        raise FormatError(f"truncated dump: expected {nbytes} data bytes")
    data = np.frombuffer(buf, dtype="<f4", count=k * l, offset=start).reshape(k, l)
    return data.copy(), magic, start + nbytes


def write_matrix_dump(path, data: np.ndarray, magic: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(_pack_matrix(data, magic))


def read_matrix_dump(path, expected_magic: bytes | None = None) -> np.ndarray:
    with open(path, "rb") as fh:
        buf = fh.read()
    data, _, end = _unpack_matrix(buf, 0, expected_magic)
    if end != len(buf):
        raise FormatError(f"{path}: {len(buf) - end} trailing bytes after matrix data")
    return data


@dataclass
class PairRecord:
    """One utterance of training data: normalized features plus SPP target."""

    features: np.ndarray      # K x L float32, already normalized
    target: np.ndarray        # K x L float32 in [0, 1]
    seed: int
    snr_db: float
    norm_mean: float
    norm_std: float

    def __post_init__(self):
        if self.features.shape != self.target.shape:
            raise ShapeMismatchError("features and target must share a shape")


def write_pair_file(path, record: PairRecord) -> None:
    k, l = record.features.shape
    blob = (
        _HEADER.pack(MAGIC_PAIR, FORMAT_VERSION, k, l)
        + _PAIR_META.pack(record.snr_db, record.seed, record.norm_mean, record.norm_std)
        + _pack_matrix(record.features, MAGIC_FEATURES)
        + _pack_matrix(record.target, MAGIC_SPP)
    )
    with open(path, "wb") as fh:
        fh.write(blob)


def read_pair_file(path) -> PairRecord:
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _HEADER.size + _PAIR_META.size:
        raise FormatError(f"{path}: truncated pair file")
    magic, version, k, l = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC_PAIR:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC_PAIR!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported pair-file version {version}")
    snr_db, seed, mean, std = _PAIR_META.unpack_from(buf, _HEADER.size)
    offset = _HEADER.size + _PAIR_META.size
    features, _, offset = _unpack_matrix(buf, offset, MAGIC_FEATURES)
    target, _, offset = _unpack_matrix(buf, offset, MAGIC_SPP)
    if offset != len(buf):
        raise FormatError(f"{path}: trailing bytes after pair blocks")
    if features.shape != (k, l) or target.shape != (k, l):
        raise FormatError(f"{path}: block shapes disagree with pair header")
    return PairRecord(features, target, seed, snr_db, mean, std)
