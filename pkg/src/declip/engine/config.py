"""Engine architecture hyperparameters."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class DemucsConfig:
    depth: int = 5
    initial_channels: int = 64
    stride: int = 4
    kernel: int = 8
    channel_growth: int = 2
    lstm_layers: int = 2
    resample_factor: int = 4
    sample_rate: int = 16000
    normalize_input: bool = False  # divide by input std before the network

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.kernel < self.stride:
            raise ValueError("kernel must be >= stride")
        if self.resample_factor != 4:
            raise ValueError("only x4 resampling is supported")
        if self.stride != 4:
            raise ValueError("only stride-4 blocks are supported")

    @property
    def channels(self) -> list[int]:
        """Encoder output channels per block, e.g. [64, 128, 256, 512, 1024]."""
        return [self.initial_channels * self.channel_growth**b for b in range(self.depth)]

    @property
    def lstm_width(self) -> int:
        return self.channels[-1]

    @property
    def hop(self) -> int:
        """Total frame hop in original-rate samples (256 with defaults)."""
        return self.stride**self.depth // self.resample_factor

    @property
    def upsampled_hop(self) -> int:
        """Frame hop at the internal (upsampled) rate."""
        return self.stride**self.depth
