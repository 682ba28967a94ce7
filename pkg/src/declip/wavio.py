"""Minimal RIFF/WAVE reader and writer.

Supports mono 16-bit signed PCM and 32-bit IEEE float payloads. Files are
validated strictly: anything that is not a well-formed RIFF/WAVE with a
supported format raises :class:`WavFormatError` with a reason.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from declip.signal_core import Waveform

FORMAT_PCM = 1
FORMAT_IEEE_FLOAT = 3
FORMAT_EXTENSIBLE = 0xFFFE


class WavFormatError(ValueError):
    pass


def _read_chunks(data: bytes):
    if len(data) < 12 or data[:4] != b"RIFF":
        raise WavFormatError("not a RIFF file")
    if data[8:12] != b"WAVE":
        raise WavFormatError("RIFF file is not WAVE")
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise WavFormatError(f"truncated {cid!r} chunk")
        yield cid, body
        pos += 8 + size + (size & 1)  # chunks are word-aligned


def read_wav(path) -> Waveform:
    """Read a WAV file into float64 samples in [-1, 1]."""
    data = Path(path).read_bytes()
    fmt = None
    payload = None
    for cid, body in _read_chunks(data):
        if cid == b"fmt ":
            fmt = body
        elif cid == b"data":
            payload = body
    if fmt is None or payload is None:
        raise WavFormatError("missing fmt or data chunk")
    if len(fmt) < 16:
        raise WavFormatError("fmt chunk too short")
    tag, channels, rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if tag == FORMAT_EXTENSIBLE and len(fmt) >= 26:
        (tag,) = struct.unpack_from("<H", fmt, 24)  # sub-format GUID head
    if channels != 1:
        raise WavFormatError(f"unsupported channel count {channels} (mono only)")

    if tag == FORMAT_PCM and bits == 16:
        raw = np.frombuffer(payload[: len(payload) // 2 * 2], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif tag == FORMAT_IEEE_FLOAT and bits == 32:
        raw = np.frombuffer(payload[: len(payload) // 4 * 4], dtype="<f4")
        samples = raw.astype(np.float64)
    else:
        raise WavFormatError(f"unsupported format tag {tag} with {bits}-bit samples")
    if samples.size == 0:
        raise WavFormatError("empty data chunk")
    return Waveform(samples, rate)


def read_wav_checked(path, sample_rate: int = 16000) -> Waveform:
    """Read a WAV and require the toolkit's working rate."""
    wav = read_wav(path)
    if wav.sample_rate != sample_rate:
        raise WavFormatError(
            f"unsupported sample rate {wav.sample_rate} Hz (expected {sample_rate})"
        )
    return wav


def write_wav(path, wav: Waveform, float32: bool = False):
    """Write mono WAV; 16-bit PCM by default, IEEE float32 behind a flag."""
    samples = np.asarray(wav.samples, dtype=np.float64)
    if float32:
        tag, bits = FORMAT_IEEE_FLOAT, 32
        payload = samples.astype("<f4").tobytes()
    else:
        tag, bits = FORMAT_PCM, 16
        q = np.clip(np.round(samples * 32768.0), -32768, 32767).astype("<i2")
        payload = q.tobytes()
    block = bits // 8
    fmt = struct.pack("<HHIIHH", tag, 1, wav.sample_rate, wav.sample_rate * block, block, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) & 1:
        body += b"\x00"
    with open(path, "wb") as f:
        f.write(b"RIFF" + struct.pack("<I", len(body)) + body)
