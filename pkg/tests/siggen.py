"""Shared signal generators for the runtime package's tests."""

import numpy as np


def speech_shaped_noise(seed: int, n: int, peak: float = 0.95) -> np.ndarray:
    """Low-pass filtered noise with a roughly 1/f spectral tilt."""
    rng = np.random.default_rng(seed)
    white = rng.standard_normal(n)
    out = np.empty(n)
    acc = 0.0
    for i in range(n):
        acc = 0.95 * acc + white[i]
        out[i] = acc
    return out / np.max(np.abs(out)) * peak
