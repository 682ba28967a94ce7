"""Portable binary weight files and shape validation.

File layout (all little-endian):

- magic ``DDDW`` (4 bytes)
- format version, u32
- tensor count, u32
- per tensor: name length u16, UTF-8 name, rank u8, dims u32 each,
  payload IEEE-754 binary32 row-major
- trailing u32 CRC32 of all preceding bytes
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from declip.engine.config import DemucsConfig

MAGIC = b"DDDW"
FORMAT_VERSION = 1

# meta.config encodes the architecture the weights were built for.
META_FIELDS = (
    "depth",
    "initial_channels",
    "stride",
    "kernel",
    "channel_growth",
    "lstm_layers",
    "resample_factor",
    "sample_rate",
    "normalize_input",
)


class WeightFormatError(ValueError):
    pass


@dataclass
class ModelWeights:
    tensors: dict[str, np.ndarray]
    version: int = FORMAT_VERSION

    def config_echo(self) -> DemucsConfig | None:
        meta = self.tensors.get("meta.config")
        if meta is None or meta.size != len(META_FIELDS):
            return None
        vals = {f: int(v) for f, v in zip(META_FIELDS, meta)}
        return DemucsConfig(**vals)


def expected_shapes(cfg: DemucsConfig) -> dict[str, tuple[int, ...]]:
    """Complete tensor inventory implied by a config."""
    shapes: dict[str, tuple[int, ...]] = {"meta.config": (len(META_FIELDS),)}
    chans = cfg.channels
    ins = [1] + chans[:-1]
    for b, (ci, co) in enumerate(zip(ins, chans)):
        shapes[f"encoder.{b}.conv.weight"] = (co, ci, cfg.kernel)
        shapes[f"encoder.{b}.conv.bias"] = (co,)
        shapes[f"encoder.{b}.mix.weight"] = (2 * co, co, 1)
        shapes[f"encoder.{b}.mix.bias"] = (2 * co,)
    h = cfg.lstm_width
    for layer in range(cfg.lstm_layers):
        shapes[f"lstm.{layer}.weight_ih"] = (4 * h, h)
        shapes[f"lstm.{layer}.weight_hh"] = (4 * h, h)
        shapes[f"lstm.{layer}.bias_ih"] = (4 * h,)
        shapes[f"lstm.{layer}.bias_hh"] = (4 * h,)
    outs = list(reversed(ins))
    dins = list(reversed(chans))
    for b, (ci, co) in enumerate(zip(dins, outs)):
        shapes[f"decoder.{b}.mix.weight"] = (2 * ci, ci, 1)
        shapes[f"decoder.{b}.mix.bias"] = (2 * ci,)
        shapes[f"decoder.{b}.tconv.weight"] = (ci, co, cfg.kernel)
        shapes[f"decoder.{b}.tconv.bias"] = (co,)
    return shapes


def meta_tensor(cfg: DemucsConfig) -> np.ndarray:
    return np.array([getattr(cfg, f) for f in META_FIELDS], dtype=np.float32)


def random_weights(cfg: DemucsConfig, seed: int = 0) -> ModelWeights:
    """Seeded random weights in the portable inventory (test fixtures and
    untrained-engine runs). Scaled by 1/sqrt(fan_in) to keep activations O(1)."""
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    for name, shape in expected_shapes(cfg).items():
        if name == "meta.config":
            tensors[name] = meta_tensor(cfg)
            continue
        if name.endswith("bias") or name.endswith("bias_ih") or name.endswith("bias_hh"):
            fan_in = shape[0]
        else:
            fan_in = int(np.prod(shape[1:]))
        scale = 1.0 / np.sqrt(max(fan_in, 1))
        tensors[name] = rng.normal(0.0, scale, size=shape).astype(np.float32)
    return ModelWeights(tensors)


def write_weights(path, weights: ModelWeights):
    parts = [MAGIC, struct.pack("<II", weights.version, len(weights.tensors))]
    for name, tensor in weights.tensors.items():
        arr = np.ascontiguousarray(tensor, dtype="<f4")
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.tobytes())
    body = b"".join(parts)
    with open(path, "wb") as f:
        f.write(body)
        f.write(struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF))


def read_weights(path) -> ModelWeights:
    data = Path(path).read_bytes()
    if len(data) < 16 or data[:4] != MAGIC:
        raise WeightFormatError("not a DDDW weight file")
    body, crc_bytes = data[:-4], data[-4:]
    (crc_stored,) = struct.unpack("<I", crc_bytes)
    if zlib.crc32(body) & 0xFFFFFFFF != crc_stored:
        raise WeightFormatError("CRC32 mismatch: file is corrupt")
    version, count = struct.unpack_from("<II", body, 4)
    pos = 12
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", body, pos)
        pos += 2
        name = body[pos : pos + name_len].decode("utf-8")
        pos += name_len
        (rank,) = struct.unpack_from("<B", body, pos)
        pos += 1
        dims = struct.unpack_from(f"<{rank}I", body, pos)
        pos += 4 * rank
        n = int(np.prod(dims)) if rank else 1
        arr = np.frombuffer(body, dtype="<f4", count=n, offset=pos).reshape(dims)
        pos += 4 * n
        if name in tensors:
            raise WeightFormatError(f"duplicate tensor {name!r}")
        tensors[name] = arr.copy()
    if pos != len(body):
        raise WeightFormatError("trailing bytes after last tensor")
    return ModelWeights(tensors, version=version)


def validate_weights(cfg: DemucsConfig, weights: ModelWeights) -> ModelWeights:
    """Check the tensor inventory against ``cfg``; every mismatch is named."""
    problems = []
    expected = expected_shapes(cfg)
    for name, shape in expected.items():
        if name not in weights.tensors:
            problems.append(f"missing tensor {name!r} (expected shape {shape})")
    for name, tensor in weights.tensors.items():
        if name not in expected:
            problems.append(f"unexpected tensor {name!r}")
            continue
        if tuple(tensor.shape) != expected[name]:
            problems.append(
                f"shape mismatch for {name!r}: expected {expected[name]}, got {tuple(tensor.shape)}"
            )
            continue
        if name != "meta.config" and not np.all(np.isfinite(tensor)):
            flat = int(np.flatnonzero(~np.isfinite(tensor.ravel()))[0])
            problems.append(f"non-finite value in {name!r} at flat index {flat}")
    if problems:
        raise WeightFormatError("weight validation failed:\n  " + "\n  ".join(problems))
    return weights
