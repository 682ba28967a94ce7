"""Differentiable generator matching the runtime engine sample-for-sample.

Structure: windowed-sinc x4 upsampling, five causal stride-4 GLU-gated conv
blocks, a 2-layer LSTM bottleneck, mirrored transposed-conv decoder with skip
connections, and x4 downsampling. Causality conventions are identical to the
runtime implementation: encoder blocks see ``kernel - stride`` past samples
via left zero-padding, transposed convs are cropped at the tail, and each
resampling stage runs with a fixed 32-sample advance over zero history.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ddd_trainer.arch import ArchConfig

FIR_TAPS = 65
FIR_ADVANCE = 32
KAISER_BETA = 10.0

# Original-rate lookahead of the up chain and high-rate lookahead of the
# down chain; fixed by the resampler advance.
UP_LOOKAHEAD = 3 * FIR_ADVANCE // 4
DOWN_LOOKAHEAD_HI = 3 * FIR_ADVANCE


def _raw_halfband() -> np.ndarray:
    n = np.arange(FIR_TAPS)
    center = (FIR_TAPS - 1) / 2.0
    return np.sinc((n - center) / 2.0) * np.kaiser(FIR_TAPS, KAISER_BETA)


def upsample_kernel() -> np.ndarray:
    """Half-band interpolation kernel; each polyphase branch sums to 1."""
    h = _raw_halfband()
    for phase in (0, 1):
        h[phase::2] /= h[phase::2].sum()
    return h


def downsample_kernel() -> np.ndarray:
    h = _raw_halfband()
    return h / h.sum()


class Generator(nn.Module):
    def __init__(self, cfg: ArchConfig):
        super().__init__()
        self.cfg = cfg
        chans = cfg.channels
        ins = [1] + chans[:-1]
        self.encoder = nn.ModuleList(
            nn.ModuleDict(
                {
                    "conv": nn.Conv1d(ci, co, cfg.kernel, stride=cfg.stride),
                    "mix": nn.Conv1d(co, 2 * co, 1),
                }
            )
            for ci, co in zip(ins, chans)
        )
        h = cfg.lstm_width
        self.lstm = nn.LSTM(h, h, num_layers=cfg.lstm_layers)
        self.decoder = nn.ModuleList(
            nn.ModuleDict(
                {
                    "mix": nn.Conv1d(ci, 2 * ci, 1),
                    "tconv": nn.ConvTranspose1d(ci, co, cfg.kernel, stride=cfg.stride),
                }
            )
            for ci, co in zip(reversed(chans), reversed(ins))
        )
        # conv1d cross-correlates, so store the kernels time-reversed
        up = torch.from_numpy(upsample_kernel()[::-1].copy()).view(1, 1, -1)
        down = torch.from_numpy(downsample_kernel()[::-1].copy()).view(1, 1, -1)
        self.register_buffer("_up_taps", up.float())
        self.register_buffer("_down_taps", down.float())

    def _up2(self, x: torch.Tensor) -> torch.Tensor:
        """(B, T) -> (B, 2T - advance): zero-stuff then advanced half-band FIR."""
        b, t = x.shape
        z = x.new_zeros(b, 1, 2 * t)
        z[:, :, 0::2] = x.unsqueeze(1)
        z = F.pad(z, (FIR_ADVANCE, 0))
        return F.conv1d(z, self._up_taps.to(x.dtype))[:, 0]

    def _down2(self, x: torch.Tensor) -> torch.Tensor:
        """(B, T) -> (B, ceil((T - advance) / 2)): FIR then decimate."""
        z = F.pad(x.unsqueeze(1), (FIR_ADVANCE, 0))
        y = F.conv1d(z, self._down_taps.to(x.dtype))[:, 0]
        return y[:, 0::2]

    def required_frames(self, n: int) -> int:
        """Latent frames needed so output sample n-1 is fully determined."""
        return (4 * (n - 1) + DOWN_LOOKAHEAD_HI) // self.cfg.upsampled_hop + 1

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """(B, T) or (T,) -> same shape; output length equals input length."""
        squeeze = x.dim() == 1
        if squeeze:
            x = x.unsqueeze(0)
        if x.dim() != 2 or x.shape[1] < 1:
            raise ValueError("expected (batch, samples) with at least one sample")
        cfg = self.cfg
        n = x.shape[1]

        scale = x.new_ones(x.shape[0], 1)
        if cfg.normalize_input:
            scale = x.std(dim=1, keepdim=True, unbiased=False) + 1e-3
            x = x / scale

        n_frames = self.required_frames(n)
        need = cfg.hop * n_frames + UP_LOOKAHEAD
        if need > n:
            x = F.pad(x, (0, need - n))

        u = self._up2(self._up2(x))[:, : cfg.upsampled_hop * n_frames]

        h = u.unsqueeze(1)  # (B, C, T)
        ctx = cfg.kernel - cfg.stride
        skips = []
        for block in self.encoder:
            h = F.pad(h, (ctx, 0))
            h = F.relu(block["conv"](h))
            h = F.glu(block["mix"](h), dim=1)
            skips.append(h)

        z, _ = self.lstm(h.permute(2, 0, 1))  # (F, B, H)
        h = z.permute(1, 2, 0)  # (B, H, F)
        for b, block in enumerate(self.decoder):
            h = h + skips[cfg.depth - 1 - b]
            y = F.glu(block["mix"](h), dim=1)
            y = block["tconv"](y)[:, :, : h.shape[2] * cfg.stride]  # causal tail crop
            if b < cfg.depth - 1:
                y = F.relu(y)
            h = y

        out = self._down2(self._down2(h[:, 0]))[:, :n] * scale
        return out.squeeze(0) if squeeze else out
