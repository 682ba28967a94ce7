"""Adversarial discriminators: multi-period and multi-scale banks.

Five period heads fold the waveform into (time/period, period) grids and run
strided 2-D convs down the time axis; three scale heads run wide 1-D convs on
the raw, 2x and 4x average-pooled signal. Every head exposes its intermediate
feature maps for the feature-matching loss. A width multiplier scales the
channel counts so tests can run small instances of the same topology.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

PERIODS = (2, 3, 5, 7, 11)
POOL_FACTORS = (1, 2, 4)
LRELU_SLOPE = 0.1


def _scaled(base: int, width: float) -> int:
    return max(1, int(round(base * width)))


class PeriodDiscriminator(nn.Module):
    def __init__(self, period: int, width: float = 1.0):
        super().__init__()
        self.period = period
        chans = [_scaled(c, width) for c in (32, 128, 512, 1024)]
        ins = [1] + chans
        outs = chans + [chans[-1]]
        self.convs = nn.ModuleList(
            nn.Conv2d(ci, co, (5, 1), stride=(3, 1), padding=(2, 0))
            for ci, co in zip(ins[:-1], outs[:-1])
        )
        self.convs.append(nn.Conv2d(ins[-1], outs[-1], (5, 1), padding=(2, 0)))
        self.post = nn.Conv2d(outs[-1], 1, (3, 1), padding=(1, 0))

    def forward(self, x: torch.Tensor):
        """(B, 1, T) -> (score map, intermediate feature maps)."""
        b, c, t = x.shape
        if t % self.period:
            x = F.pad(x, (0, self.period - t % self.period), mode="reflect")
            t = x.shape[-1]
        x = x.view(b, c, t // self.period, self.period)
        feats = []
        for conv in self.convs:
            x = F.leaky_relu(conv(x), LRELU_SLOPE)
            feats.append(x)
        score = self.post(x)
        feats.append(score)
        return score.flatten(1), feats


class ScaleDiscriminator(nn.Module):
    def __init__(self, width: float = 1.0):
        super().__init__()
        chans = [_scaled(c, width) for c in (128, 128, 256, 512, 1024, 1024)]
        specs = [
            (1, chans[0], 15, 1),
            (chans[0], chans[1], 41, 2),
            (chans[1], chans[2], 41, 2),
            (chans[2], chans[3], 41, 4),
            (chans[3], chans[4], 41, 4),
            (chans[4], chans[5], 5, 1),
        ]
        self.convs = nn.ModuleList(
            nn.Conv1d(ci, co, k, stride=s, padding=k // 2) for ci, co, k, s in specs
        )
        self.post = nn.Conv1d(chans[-1], 1, 3, padding=1)

    def forward(self, x: torch.Tensor):
        feats = []
        for conv in self.convs:
            x = F.leaky_relu(conv(x), LRELU_SLOPE)
            feats.append(x)
        score = self.post(x)
        feats.append(score)
        return score.flatten(1), feats


class DiscriminatorBank(nn.Module):
    """Five period heads plus three scale heads (eight in total)."""

    def __init__(self, width: float = 1.0):
        super().__init__()
        self.mpd = nn.ModuleList(PeriodDiscriminator(p, width) for p in PERIODS)
        self.msd = nn.ModuleList(ScaleDiscriminator(width) for _ in POOL_FACTORS)

    @property
    def head_count(self) -> int:
        return len(self.mpd) + len(self.msd)

    def forward(self, x: torch.Tensor):
        """(B, T) -> (scores per head, feature lists per head)."""
        x = x.unsqueeze(1)
        scores, feats = [], []
        for head in self.mpd:
            s, f = head(x)
            scores.append(s)
            feats.append(f)
        for factor, head in zip(POOL_FACTORS, self.msd):
            xin = x if factor == 1 else F.avg_pool1d(x, factor)
            s, f = head(xin)
            scores.append(s)
            feats.append(f)
        return scores, feats
