"""Corpus loading and on-the-fly clipped batch construction."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np

SAMPLE_RATE = 16000
THRESHOLD_LOG10_LOW = -2.0
THRESHOLD_LOG10_HIGH = -0.9


def read_wav(path) -> np.ndarray:
    """Read a mono 16 kHz PCM16 WAV into float32 samples in [-1, 1)."""
    with wave.open(str(path), "rb") as f:
        if f.getnchannels() != 1:
            raise ValueError(f"{path}: expected mono audio")
        if f.getframerate() != SAMPLE_RATE:
            raise ValueError(f"{path}: expected {SAMPLE_RATE} Hz, got {f.getframerate()}")
        if f.getsampwidth() != 2:
            raise ValueError(f"{path}: expected 16-bit PCM")
        raw = f.readframes(f.getnframes())
    return (np.frombuffer(raw, dtype="<i2").astype(np.float32)) / 32768.0


def load_corpus(directory) -> list[np.ndarray]:
    directory = Path(directory)
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".wav")
    corpus = [read_wav(p) for p in files]
    if not corpus:
        raise ValueError(f"no WAV files in {directory}")
    return corpus


def sample_thresholds(rng: np.random.Generator, n: int) -> np.ndarray:
    """Clip thresholds distributed uniformly in log10 over [1e-2, 10^-0.9]."""
    return 10.0 ** rng.uniform(THRESHOLD_LOG10_LOW, THRESHOLD_LOG10_HIGH, size=n)


def hard_clip(x: np.ndarray, theta: float) -> np.ndarray:
    return np.clip(x, -theta, theta)


def crop_or_pad(x: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Random crop to n samples, or right-pad with zeros when shorter."""
    if x.size >= n:
        start = int(rng.integers(0, x.size - n + 1))
        return x[start : start + n]
    return np.concatenate([x, np.zeros(n - x.size, dtype=x.dtype)])


def make_batch(
    corpus: list[np.ndarray], batch: int, segment_len: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (clean, clipped, thetas); clipped[i] = hard_clip(clean[i], thetas[i])."""
    picks = rng.integers(0, len(corpus), size=batch)
    thetas = sample_thresholds(rng, batch)
    clean = np.stack([crop_or_pad(corpus[i], segment_len, rng) for i in picks])
    clipped = np.stack([hard_clip(seg, th) for seg, th in zip(clean, thetas)])
    return clean.astype(np.float32), clipped.astype(np.float32), thetas
