"""Windowed-sinc x4 resampling, built from two half-band x2 stages.

Each stage is a Kaiser-windowed sinc FIR (65 taps: 64-tap design widened by
one for an integer group delay) applied with a fixed advance of
``FIR_ADVANCE`` high-rate samples, so that output sample t is time-aligned
with input sample t (up) or 2t (down). The advance is what creates the
resampler's contribution to the engine's lookahead; it is accounted
analytically in :mod:`declip.engine.analysis`.

``FirStream`` is the single streaming primitive: it evaluates
``y[t] = sum_k h[k] * v[t + advance - k]`` over a growing input stream,
emitting every output sample as soon as it is determined.
"""

from __future__ import annotations

import numpy as np

FIR_TAPS = 65  # odd length: integer group delay, even taps hit input samples
FIR_ADVANCE = 32
KAISER_BETA = 10.0


def _raw_halfband() -> np.ndarray:
    n = np.arange(FIR_TAPS)
    center = (FIR_TAPS - 1) / 2.0
    return np.sinc((n - center) / 2.0) * np.kaiser(FIR_TAPS, KAISER_BETA)


def upsample_kernel() -> np.ndarray:
    """Interpolation kernel for a x2 stage; each polyphase branch sums to 1
    so DC is preserved exactly."""
    h = _raw_halfband()
    for phase in (0, 1):
        h[phase::2] /= h[phase::2].sum()
    return h


def downsample_kernel() -> np.ndarray:
    h = _raw_halfband()
    return h / h.sum()


class FirStream:
    """Streaming FIR with a fixed look-ahead advance.

    Past history starts as zeros, which matches the offline convention of
    left zero-padding. Output lags input by ``advance`` samples.

    Invariant: ``_buf`` holds the input stream from (virtual) index
    ``_out_count + advance - (taps - 1)`` through the last pushed sample,
    with negative indices materialized as zeros.
    """

    def __init__(self, taps: np.ndarray, advance: int):
        taps = np.asarray(taps, dtype=np.float64)
        if not 0 <= advance <= taps.size - 1:
            raise ValueError("advance must lie in [0, taps - 1]")
        self._taps = taps
        self._advance = advance
        self._in_count = 0
        self._out_count = 0
        self._buf = np.zeros(taps.size - 1 - advance)

    def push(self, chunk: np.ndarray) -> np.ndarray:
        chunk = np.asarray(chunk, dtype=np.float64)
        self._buf = np.concatenate([self._buf, chunk])
        self._in_count += chunk.size
        n_out = self._in_count - self._advance - self._out_count
        if n_out <= 0:
            return np.empty(0)
        out = np.convolve(self._buf, self._taps, mode="valid")
        assert out.size == n_out
        self._out_count += n_out
        self._buf = self._buf[n_out:]
        return out

    def reset(self):
        self._in_count = 0
        self._out_count = 0
        self._buf = np.zeros(self._taps.size - 1 - self._advance)


class Upsampler2x:
    """Streaming x2 upsampler (zero-stuff then half-band FIR)."""

    def __init__(self):
        self._fir = FirStream(upsample_kernel(), FIR_ADVANCE)

    def push(self, chunk: np.ndarray) -> np.ndarray:
        chunk = np.asarray(chunk, dtype=np.float64)
        z = np.zeros(2 * chunk.size)
        z[0::2] = chunk
        return self._fir.push(z)

    def reset(self):
        self._fir.reset()


class Downsampler2x:
    """Streaming x2 downsampler (half-band FIR then decimate)."""

    def __init__(self):
        self._fir = FirStream(downsample_kernel(), FIR_ADVANCE)
        self._phase = 0

    def push(self, chunk: np.ndarray) -> np.ndarray:
        y = self._fir.push(chunk)
        if y.size == 0:
            return y
        out = y[(-self._phase) % 2 :: 2]
        self._phase = (self._phase + y.size) % 2
        return out

    def reset(self):
        self._fir.reset()
        self._phase = 0


def _edge_pad(y: np.ndarray, n: int) -> np.ndarray:
    # symmetric extension extrapolates smooth boundaries better than
    # constant or zero padding while staying exact for DC
    return np.pad(y, n, mode="symmetric")


def _upsample2(y: np.ndarray) -> np.ndarray:
    """Offline aligned x2 upsample with symmetric extension at the edges."""
    pad = FIR_TAPS // 4
    z = np.zeros(2 * (y.size + 2 * pad))
    z[0::2] = _edge_pad(y, pad)
    full = np.convolve(z, upsample_kernel(), mode="full")
    start = 2 * pad + FIR_ADVANCE
    return full[start : start + 2 * y.size]


def _downsample2(y: np.ndarray) -> np.ndarray:
    pad = FIR_TAPS // 4
    yp = _edge_pad(y, 2 * pad)
    full = np.convolve(yp, downsample_kernel(), mode="full")
    n_out = (y.size + 1) // 2
    start = 2 * pad + FIR_ADVANCE
    return full[start : start + 2 * n_out : 2]


def resample_x4(y, direction: str) -> np.ndarray:
    """Resample by a factor of four ("up" or "down").

    Down pads internally to a multiple of four; output length is
    ``4 * len`` (up) or ``ceil(len / 4)`` (down).
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("expected a non-empty 1-D array")
    if direction == "up":
        return _upsample2(_upsample2(y))
    if direction == "down":
        if y.size % 4:
            y = np.concatenate([y, np.full(4 - y.size % 4, y[-1])])
        return _downsample2(_downsample2(y))
    raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
