"""Portable weight export and forward-parity dumps.

Weight file layout (all little-endian): magic ``DDDW``, format version u32,
tensor count u32; per tensor: name length u16, UTF-8 name, rank u8, dims u32
each, payload IEEE-754 binary32 row-major; trailing u32 CRC32 of all
preceding bytes. This is the only interface shared with the runtime package.

Parity dumps are ``.npz`` archives holding seeded 24,000-sample inputs, the
generator's outputs on them, and the CRC32 of the exact weight file those
outputs were produced with.
"""

from __future__ import annotations

import io
import os
import struct
import tempfile
import zlib
from pathlib import Path

import numpy as np
import torch

from ddd_trainer.arch import ArchConfig
from ddd_trainer.generator import Generator

MAGIC = b"DDDW"
FORMAT_VERSION = 1

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


def _meta_tensor(cfg: ArchConfig) -> np.ndarray:
    return np.array([getattr(cfg, f) for f in META_FIELDS], dtype=np.float32)


def export_tensors(model: Generator) -> dict[str, np.ndarray]:
    """Named float32 tensors in the portable inventory."""
    tensors: dict[str, np.ndarray] = {"meta.config": _meta_tensor(model.cfg)}
    state = {k: v.detach().cpu().numpy().astype(np.float32) for k, v in model.state_dict().items()}
    for b in range(model.cfg.depth):
        for part in ("conv", "mix"):
            for kind in ("weight", "bias"):
                tensors[f"encoder.{b}.{part}.{kind}"] = state[f"encoder.{b}.{part}.{kind}"]
        for part in ("mix", "tconv"):
            for kind in ("weight", "bias"):
                tensors[f"decoder.{b}.{part}.{kind}"] = state[f"decoder.{b}.{part}.{kind}"]
    for layer in range(model.cfg.lstm_layers):
        for kind in ("weight_ih", "weight_hh", "bias_ih", "bias_hh"):
            tensors[f"lstm.{layer}.{kind}"] = state[f"lstm.{kind}_l{layer}"]
    return tensors


def _encode(tensors: dict[str, np.ndarray]) -> bytes:
    parts = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(tensors))]
    for name, tensor in tensors.items():
        arr = np.ascontiguousarray(tensor, dtype="<f4")
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


def _atomic_write(path: Path, data: bytes):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def export_weights(model: Generator, path) -> int:
    """Write the model's weights atomically; returns the file's CRC32."""
    path = Path(path)
    data = _encode(export_tensors(model))
    _atomic_write(path, data)
    return zlib.crc32(data) & 0xFFFFFFFF


def read_weight_file(path) -> dict[str, np.ndarray]:
    """Parse a weight file back into named tensors (round-trip testing)."""
    data = Path(path).read_bytes()
    if len(data) < 16 or data[:4] != MAGIC:
        raise ValueError("not a DDDW weight file")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) & 0xFFFFFFFF != crc:
        raise ValueError("CRC32 mismatch")
    _, count = struct.unpack_from("<II", body, 4)
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
        tensors[name] = np.frombuffer(body, dtype="<f4", count=n, offset=pos).reshape(dims).copy()
        pos += 4 * n
    return tensors


def dump_parity(model: Generator, path, weight_path, n: int = 8, seed: int = 0):
    """Write n seeded input/output pairs produced by the exact weights at
    ``weight_path`` so the runtime engine can replay them."""
    rng = np.random.default_rng(seed)
    segment = 24_000
    inputs = rng.uniform(-0.9, 0.9, size=(n, segment)).astype(np.float32)
    model.eval()
    with torch.no_grad():
        outputs = model(torch.from_numpy(inputs)).numpy().astype(np.float32)
    checksum = zlib.crc32(Path(weight_path).read_bytes()) & 0xFFFFFFFF
    buf = io.BytesIO()
    np.savez(
        buf,
        seed=np.int64(seed),
        inputs=inputs,
        outputs=outputs,
        weight_crc32=np.uint32(checksum),
    )
    _atomic_write(Path(path), buf.getvalue())
