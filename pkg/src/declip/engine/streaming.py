"""Sample-streaming forward pass.

The stream advances in groups of ``buffer_frames`` latent frames. Each group
consumes ``hop * buffer_frames`` fresh input samples (plus the resampler
advance before the first emission) and emits every output sample that is
fully determined. Concatenated emissions plus the flush tail reproduce the
offline forward pass.

All stage state (FIR tails, conv left-context, LSTM carry, transposed-conv
overlap) lives in :class:`StreamState`; a state is exclusively owned by one
stream and must not be shared.
"""

from __future__ import annotations

import numpy as np

from declip.engine.model import DemucsModel
from declip.engine.resample import Downsampler2x, Upsampler2x


class StreamStateError(RuntimeError):
    pass


class StreamState:
    """All memory needed to continue a sample-streaming inference."""

    def __init__(self, model: DemucsModel, buffer_frames: int = 4):
        if buffer_frames < 1:
            raise ValueError("buffer_frames must be >= 1")
        if model.cfg.normalize_input:
            raise ValueError(
                "input std normalization requires the whole signal; disable it for streaming"
            )
        self.model = model
        self.buffer_frames = buffer_frames
        self.reset()

    def reset(self):
        cfg = self.model.cfg
        ctx = cfg.kernel - cfg.stride
        self._up = (Upsampler2x(), Upsampler2x())
        self._down = (Downsampler2x(), Downsampler2x())
        self._u_pending = np.empty(0)
        chans = [1] + cfg.channels[:-1]
        self._enc_hist = [np.zeros((c, ctx)) for c in chans]
        self._lstm_state = None
        outs = list(reversed(chans))
        self._dec_carry = [np.zeros((ctx, c)) for c in outs]
        self.consumed = 0
        self.emitted = 0
        self._flushed = False

    @property
    def flushed(self) -> bool:
        return self._flushed

    def _run_group(self, u: np.ndarray) -> np.ndarray:
        """Process ``buffer_frames`` worth of upsampled samples; returns the
        newly determined output samples at the original rate."""
        model = self.model
        cfg = model.cfg
        h = u[None, :]
        skips = []
        for b in range(cfg.depth):
            data = np.concatenate([self._enc_hist[b], h], axis=1)
            self._enc_hist[b] = h[:, h.shape[1] - self._enc_hist[b].shape[1] :]
            h = model.encoder_step(b, data).T  # (C, F)
            skips.append(h)

        z, self._lstm_state = model.lstm_step(h.T, self._lstm_state)
        h = z
        for b in range(cfg.depth):
            h = h + skips[cfg.depth - 1 - b].T
            h = model.decoder_mix(b, h)
            raw = model.decoder_tconv_raw(b, h)  # (F*stride + ctx, C_out)
            n_keep = h.shape[0] * cfg.stride
            raw[: self._dec_carry[b].shape[0]] += self._dec_carry[b]
            self._dec_carry[b] = raw[n_keep:].copy()
            h = model.decoder_finish(b, raw[:n_keep])

        return self._down[1].push(self._down[0].push(h[:, 0]))

    def _drain(self) -> np.ndarray:
        hop_hi = self.model.cfg.upsampled_hop
        group = hop_hi * self.buffer_frames
        outs = []
        while self._u_pending.size >= group:
            chunk, self._u_pending = self._u_pending[:group], self._u_pending[group:]
            outs.append(self._run_group(chunk))
        if not outs:
            return np.empty(0)
        return np.concatenate(outs)

    def push(self, chunk) -> np.ndarray:
        if self._flushed:
            raise StreamStateError("stream already flushed")
        chunk = np.asarray(chunk, dtype=np.float64)
        if chunk.ndim != 1:
            raise ValueError("chunk must be 1-D")
        self.consumed += chunk.size
        if chunk.size:
            u = self._up[1].push(self._up[0].push(chunk))
            if u.size:
                self._u_pending = np.concatenate([self._u_pending, u])
        out = self._drain()
        self.emitted += out.size
        assert self.emitted <= self.consumed
        return out

    def flush(self) -> np.ndarray:
        """Zero-pad internally until every consumed sample has produced its
        output sample; the state becomes terminal."""
        if self._flushed:
            raise StreamStateError("stream already flushed")
        hop = self.model.cfg.hop
        pad = hop * self.buffer_frames
        outs = []
        while self.emitted < self.consumed:
            u = self._up[1].push(self._up[0].push(np.zeros(pad)))
            if u.size:
                self._u_pending = np.concatenate([self._u_pending, u])
            out = self._drain()
            remaining = self.consumed - self.emitted
            out = out[:remaining]
            self.emitted += out.size
            outs.append(out)
        self._flushed = True
        return np.concatenate(outs) if outs else np.empty(0)


def stream_push(state: StreamState, chunk) -> np.ndarray:
    return state.push(chunk)


def stream_flush(state: StreamState) -> np.ndarray:
    return state.flush()
