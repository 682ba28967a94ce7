"""Offline forward pass of the declipping generator.

The network runs at 4x the input rate: windowed-sinc upsampling, five
stride-4 GLU-gated conv blocks (channels doubling each block), a causal
2-layer LSTM at the bottleneck, mirrored transposed-conv decoder blocks with
skip connections, and windowed-sinc downsampling back to the input rate.

Everything is causal by construction: encoder convs see ``kernel - stride``
past samples via left zero-padding, transposed convs are cropped at the tail,
and the resamplers carry an explicit advance. Output sample i therefore
depends only on input samples up to i plus a bounded lookahead (see
:mod:`declip.engine.analysis`). Computation is float64 internally.
"""

from __future__ import annotations

import numpy as np

from declip.engine.config import DemucsConfig
from declip.engine.resample import FIR_ADVANCE, Downsampler2x, Upsampler2x
from declip.engine.weights import ModelWeights, validate_weights
from declip.signal_core import Waveform

# Original-rate lookahead of the x4 up chain: u[t] needs x up to
# floor((t + 3*ADV) / 4), and of the down chain: y[i] needs the 4x-rate
# signal up to 4*i + 3*ADV.
UP_LOOKAHEAD = 3 * FIR_ADVANCE // 4
DOWN_LOOKAHEAD_HI = 3 * FIR_ADVANCE


def _relu(x):
    return np.maximum(x, 0.0)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _glu(x: np.ndarray) -> np.ndarray:
    # channel-gated linear unit over axis 0
    c = x.shape[0] // 2
    return x[:c] * _sigmoid(x[c:])


def conv_strided(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int) -> np.ndarray:
    """Strided conv over (C_in, T) -> (C_out, T // stride); T must be a
    multiple of stride and x must already carry kernel - stride left context."""
    c_out, c_in, k = w.shape
    frames = (x.shape[1] - k) // stride + 1
    sw = np.lib.stride_tricks.sliding_window_view(x, k, axis=1)[:, ::stride]  # (C_in, F, K)
    patches = sw[:, :frames].transpose(1, 0, 2).reshape(frames, c_in * k)
    return patches @ w.reshape(c_out, c_in * k).T.astype(x.dtype) + b


def conv_1x1(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    # x: (F, C_in), w: (C_out, C_in, 1)
    return x @ w[:, :, 0].T + b


def tconv_raw(x: np.ndarray, w: np.ndarray, stride: int) -> np.ndarray:
    """Transposed conv without bias or crop: (F, C_in) -> (F*stride + K - stride, C_out)."""
    f, c_in = x.shape
    _, c_out, k = w.shape
    m = (x @ w.reshape(c_in, c_out * k)).reshape(f, c_out, k)
    out = np.zeros((f * stride + k - stride, c_out), dtype=x.dtype)
    for j in range(k):
        out[j : j + f * stride : stride] += m[:, :, j]
    return out


def lstm_layer(x: np.ndarray, w_ih, w_hh, b_ih, b_hh, h0=None, c0=None):
    """Single LSTM layer over (T, H_in); returns (output, (h, c)).

    Gate order is (input, forget, cell, output); math matches the common
    deep-learning convention so trained weights transfer directly.
    """
    t_len, _ = x.shape
    hidden = w_hh.shape[1]
    h = np.zeros(hidden, dtype=x.dtype) if h0 is None else h0
    c = np.zeros(hidden, dtype=x.dtype) if c0 is None else c0
    pre = x @ w_ih.T + (b_ih + b_hh)
    out = np.empty((t_len, hidden), dtype=x.dtype)
    for t in range(t_len):
        g = pre[t] + h @ w_hh.T
        i = _sigmoid(g[:hidden])
        f = _sigmoid(g[hidden : 2 * hidden])
        gc = np.tanh(g[2 * hidden : 3 * hidden])
        o = _sigmoid(g[3 * hidden :])
        c = f * c + i * gc
        h = o * np.tanh(c)
        out[t] = h
    return out, (h, c)


class DemucsModel:
    """Validated, immutable inference model (float64 weights)."""

    def __init__(self, cfg: DemucsConfig, weights: ModelWeights):
        validate_weights(cfg, weights)
        self.cfg = cfg
        self.w = {k: np.asarray(v, dtype=np.float64) for k, v in weights.tensors.items()}

    # -- building blocks shared by the offline and streaming paths --------

    def encoder_step(self, b: int, x: np.ndarray) -> np.ndarray:
        """One encoder block over (C_in, T_with_context) -> (F, C_out)."""
        y = conv_strided(x, self.w[f"encoder.{b}.conv.weight"], self.w[f"encoder.{b}.conv.bias"], self.cfg.stride)
        y = _relu(y)
        y = conv_1x1(y, self.w[f"encoder.{b}.mix.weight"], self.w[f"encoder.{b}.mix.bias"])
        return _glu(y.T).T

    def lstm_step(self, x: np.ndarray, state=None):
        """Run the LSTM stack over (T, H); returns (out, new_state)."""
        states = []
        for layer in range(self.cfg.lstm_layers):
            prev = None if state is None else state[layer]
            h0, c0 = (None, None) if prev is None else prev
            x, hc = lstm_layer(
                x,
                self.w[f"lstm.{layer}.weight_ih"],
                self.w[f"lstm.{layer}.weight_hh"],
                self.w[f"lstm.{layer}.bias_ih"],
                self.w[f"lstm.{layer}.bias_hh"],
                h0,
                c0,
            )
            states.append(hc)
        return x, states

    def decoder_mix(self, b: int, x: np.ndarray) -> np.ndarray:
        """(F, C) -> (F, C) gated 1x1 mix."""
        y = conv_1x1(x, self.w[f"decoder.{b}.mix.weight"], self.w[f"decoder.{b}.mix.bias"])
        return _glu(y.T).T

    def decoder_tconv_raw(self, b: int, x: np.ndarray) -> np.ndarray:
        return tconv_raw(x, self.w[f"decoder.{b}.tconv.weight"], self.cfg.stride)

    def decoder_finish(self, b: int, y: np.ndarray) -> np.ndarray:
        y = y + self.w[f"decoder.{b}.tconv.bias"]
        if b < self.cfg.depth - 1:
            y = _relu(y)
        return y

    # -- offline forward ---------------------------------------------------

    def required_frames(self, n: int) -> int:
        """Latent frames needed so output sample n-1 is fully determined."""
        hop_hi = self.cfg.upsampled_hop
        return (4 * (n - 1) + DOWN_LOOKAHEAD_HI) // hop_hi + 1

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.size < 1:
            raise ValueError("expected a non-empty 1-D sample array")
        n = x.size
        cfg = self.cfg

        scale = 1.0
        if cfg.normalize_input:
            scale = float(np.std(x)) + 1e-3
            x = x / scale

        n_frames = self.required_frames(n)
        hop = cfg.hop
        # input needed so the upsampled signal covers n_frames whole frames
        need = hop * n_frames + UP_LOOKAHEAD
        xp = np.concatenate([x, np.zeros(max(0, need - n))])

        up1, up2 = Upsampler2x(), Upsampler2x()
        u = up2.push(up1.push(xp))
        u = u[: cfg.upsampled_hop * n_frames]

        h = u[None, :]  # (C, T)
        skips = []
        ctx = cfg.kernel - cfg.stride
        for b in range(cfg.depth):
            hpad = np.concatenate([np.zeros((h.shape[0], ctx)), h], axis=1)
            h = self.encoder_step(b, hpad).T  # (C_out, F)
            skips.append(h)

        z, _ = self.lstm_step(h.T)  # (F, H)
        h = z
        for b in range(cfg.depth):
            h = h + skips[cfg.depth - 1 - b].T
            h = self.decoder_mix(b, h)  # (F, C)
            y = self.decoder_tconv_raw(b, h)
            y = y[: h.shape[0] * cfg.stride]  # causal crop at the tail
            h = self.decoder_finish(b, y)

        c = h[:, 0]
        dn1, dn2 = Downsampler2x(), Downsampler2x()
        y = dn2.push(dn1.push(c))
        if y.size < n:
            raise AssertionError("internal padding arithmetic produced too few samples")
        return y[:n] * scale


def forward_offline(model: DemucsModel, x: Waveform) -> Waveform:
    """Full-signal forward pass; output length equals input length."""
    if x.sample_rate != model.cfg.sample_rate:
        raise ValueError(
            f"unsupported sample rate {x.sample_rate} Hz (model expects {model.cfg.sample_rate})"
        )
    y = model.forward(x.samples)
    if not np.all(np.isfinite(y)):
        raise FloatingPointError("non-finite value in model output")
    return Waveform(y, x.sample_rate)
