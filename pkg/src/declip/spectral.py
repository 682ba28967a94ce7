"""STFT machinery and time/frequency reconstruction losses.

Conventions (mirrored exactly by the trainer):

- frames start at sample 0, no centered padding, trailing partials dropped;
  frame count = floor((len - fft_size) / hop) + 1
- default window is periodic Hann, hop = fft_size / 4
- log magnitudes are floored at ``EPS_LOG`` before the logarithm
- the log-magnitude L1 term is normalized by the spectrogram element count so
  values are comparable across resolutions
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from declip.signal_core import _as_samples

EPS_LOG = 1e-7

# FFT sizes of the three resolutions used by the multi-resolution loss.
MULTI_RES_FFT_SIZES = (512, 1024, 2048)


@dataclass(frozen=True)
class StftConfig:
    fft_size: int
    hop: int
    window: str = "hann"

    def __post_init__(self):
        n = self.fft_size
        if n < 2 or (n & (n - 1)) != 0:
            raise ValueError(f"fft_size must be a power of two, got {n}")
        if not (1 <= self.hop <= n):
            raise ValueError(f"hop must lie in [1, fft_size], got {self.hop}")
        if self.window not in ("hann", "rect"):
            raise ValueError(f"unknown window {self.window!r}")

    def window_values(self) -> np.ndarray:
        n = self.fft_size
        if self.window == "rect":
            return np.ones(n)
        # periodic Hann
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


@dataclass(frozen=True)
class Spectrogram:
    """Non-negative magnitude frames, shape (frames, fft_size // 2 + 1)."""

    magnitudes: np.ndarray
    config: StftConfig


def _frame(y: np.ndarray, cfg: StftConfig) -> np.ndarray:
    n = cfg.fft_size
    if y.size < n:
        raise ValueError(f"signal of length {y.size} is shorter than one frame ({n})")
    count = (y.size - n) // cfg.hop + 1
    idx = np.arange(n)[None, :] + cfg.hop * np.arange(count)[:, None]
    return y[idx]


def stft_magnitude(y, cfg: StftConfig) -> Spectrogram:
    """Magnitudes of the windowed real DFT, one row per frame."""
    y = _as_samples(y)
    frames = _frame(y, cfg) * cfg.window_values()[None, :]
    mags = np.abs(np.fft.rfft(frames, axis=1))
    return Spectrogram(mags, cfg)


def stft_loss(y, yhat, cfg: StftConfig) -> float:
    """Spectral-convergence term plus normalized L1 log-magnitude term."""
    ref = stft_magnitude(y, cfg).magnitudes
    est = stft_magnitude(yhat, cfg).magnitudes
    if ref.shape != est.shape:
        raise ValueError("signals produce differing frame counts")
    ref_norm = np.linalg.norm(ref)
    if ref_norm == 0.0:
        raise ValueError("reference spectrum is identically zero")
    sc = np.linalg.norm(est - ref) / ref_norm
    log_l1 = np.mean(np.abs(np.log(np.maximum(ref, EPS_LOG)) - np.log(np.maximum(est, EPS_LOG))))
    return float(sc + log_l1)


def multi_res_stft_loss(y, yhat) -> float:
    """Sum of ``stft_loss`` over the 512/1024/2048 resolutions."""
    total = 0.0
    for n in MULTI_RES_FFT_SIZES:
        total += stft_loss(y, yhat, StftConfig(fft_size=n, hop=n // 4))
    return total


def composite_loss(y, yhat) -> float:
    """Length-normalized sum of the L1 distance and the multi-resolution
    spectral loss: ``(||y - yhat||_1 + multi_res) / len(y)``."""
    y = _as_samples(y)
    yhat = _as_samples(yhat)
    if y.size != yhat.size:
        raise ValueError("signals must have equal length")
    l1 = float(np.sum(np.abs(y - yhat)))
    return (l1 + multi_res_stft_loss(y, yhat)) / y.size
