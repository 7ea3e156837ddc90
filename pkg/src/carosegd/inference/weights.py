"""Model weight container and its binary file format.

Layout, all little-endian:

    magic   4 bytes  "CSDW"
    version u32      currently 1
    count   u32      number of layers
    layer*  u16 name length, UTF-8 name,
            u8 rank, u32 per dimension,
            float32 raw values (C order)
    crc     u32      CRC-32 of everything before it

The checksum is verified on load before anything is interpreted further.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from ..errors import (
    BadMagic,
    ChecksumMismatch,
    EmptyWeights,
    InvalidArgument,
    ShapeMismatch,
    TruncatedWeights,
    WeightFormatError,
)
from .network import DilatedUnetConfig, expected_shapes

MAGIC = b"CSDW"
VERSION = 1


class ModelWeights:
    """Ordered mapping of layer name to float array."""

    def __init__(self, tensors: dict[str, np.ndarray]):
        if not tensors:
            raise EmptyWeights("weight set contains no layers")
        clean: dict[str, np.ndarray] = {}
        for name, t in tensors.items():
            arr = np.asarray(t, dtype=np.float64 if np.asarray(t).dtype == np.float64 else np.float32)
            if arr.ndim < 1:
                raise InvalidArgument(f"layer {name!r} must have rank >= 1")
            if not np.all(np.isfinite(arr)):
                raise WeightFormatError(f"layer {name!r} contains non-finite values")
            arr.flags.writeable = False
            clean[name] = arr
        self.tensors = clean

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def names(self) -> list[str]:
        return list(self.tensors)

    def digest(self) -> str:
        """Short content hash over names, shapes, and raw values."""
        crc = 0
        for name, t in self.tensors.items():
            crc = zlib.crc32(name.encode(), crc)
            crc = zlib.crc32(repr(t.shape).encode(), crc)
            crc = zlib.crc32(np.ascontiguousarray(t, dtype="<f4").tobytes(), crc)
        return f"{crc & 0xFFFFFFFF:08x}"


def validate_weights(weights: ModelWeights, cfg: DilatedUnetConfig) -> None:
    """Check the weight set against the shape plan for cfg.

    Raises ShapeMismatch naming the first offending layer; missing and
    unexpected layers count as offending.
    """
    plan = expected_shapes(cfg)
    for name, shape in plan.items():
        if name not in weights.tensors:
            raise ShapeMismatch(name, shape, ("missing",))
        actual = weights.tensors[name].shape
        if actual != shape:
            raise ShapeMismatch(name, shape, actual)
    for name in weights.tensors:
        if name not in plan:
            raise ShapeMismatch(name, ("absent",), weights.tensors[name].shape)


def save_weights(path, weights: ModelWeights) -> None:
    body = bytearray()
    body += MAGIC
    body += struct.pack("<I", VERSION)
    body += struct.pack("<I", len(weights.tensors))
    for name, t in weights.tensors.items():
        raw = name.encode("utf-8")
        body += struct.pack("<H", len(raw))
        body += raw
        body += struct.pack("<B", t.ndim)
        body += struct.pack(f"<{t.ndim}I", *t.shape)
        body += np.ascontiguousarray(t, dtype="<f4").tobytes()
    body += struct.pack("<I", zlib.crc32(bytes(body)) & 0xFFFFFFFF)
    with open(path, "wb") as fh:
        fh.write(bytes(body))


def load_weights(path) -> ModelWeights:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise BadMagic(f"not a weight file: bad magic {blob[:4]!r}")
    if len(blob) < 16:
        raise TruncatedWeights("file too short for header and checksum")
    stored = struct.unpack("<I", blob[-4:])[0]
    actual = zlib.crc32(blob[:-4]) & 0xFFFFFFFF
    if stored != actual:
        raise ChecksumMismatch(f"checksum {actual:08x} does not match stored {stored:08x}")
    version, count = struct.unpack("<II", blob[4:12])
    if version != VERSION:
        raise WeightFormatError(f"unsupported version {version}")
    if count == 0:
        raise EmptyWeights("weight file contains no layers")
    off = 12
    end = len(blob) - 4
    tensors: dict[str, np.ndarray] = {}

    def need(n):
        if off + n > end:
            raise TruncatedWeights(f"unexpected end of data at offset {off}")

    for _ in range(count):
        need(2)
        (nlen,) = struct.unpack_from("<H", blob, off)
        off += 2
        need(nlen + 1)
        name = blob[off : off + nlen].decode("utf-8")
        off += nlen
        rank = blob[off]
        off += 1
        need(4 * rank)
        shape = struct.unpack_from(f"<{rank}I", blob, off)
        off += 4 * rank
        size = int(np.prod(shape, dtype=np.int64)) if rank else 1
        need(4 * size)
        values = np.frombuffer(blob, dtype="<f4", count=size, offset=off).reshape(shape)
        off += 4 * size
        if name in tensors:
            raise WeightFormatError(f"duplicate layer name {name!r}")
        tensors[name] = values.astype(np.float32)
    if off != end:
        raise WeightFormatError(f"{end - off} trailing bytes after last layer")
    return ModelWeights(tensors)


def init_weights(cfg: DilatedUnetConfig, seed: int = 0) -> ModelWeights:
    """Random He-scaled weights for a configuration, deterministic in seed."""
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    for name, shape in expected_shapes(cfg).items():
        if name.endswith(".bias"):
            tensors[name] = np.zeros(shape, dtype=np.float32)
        else:
            fan_in = int(np.prod(shape[1:]))
            scale = np.sqrt(2.0 / fan_in)
            tensors[name] = rng.normal(0.0, scale, size=shape).astype(np.float32)
    return ModelWeights(tensors)
