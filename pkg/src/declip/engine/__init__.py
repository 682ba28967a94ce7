"""Streaming neural declipping engine: config, weights, forward passes,
latency and compute accounting."""

from declip.engine.config import DemucsConfig
from declip.engine.weights import (
    ModelWeights,
    WeightFormatError,
    random_weights,
    read_weights,
    validate_weights,
    write_weights,
)
from declip.engine.model import DemucsModel, forward_offline
from declip.engine.streaming import StreamState, stream_flush, stream_push
from declip.engine.analysis import MacReport, lookahead_samples, mac_per_sample
from declip.engine.resample import resample_x4

__all__ = [
    "DemucsConfig",
    "ModelWeights",
    "WeightFormatError",
    "random_weights",
    "read_weights",
    "validate_weights",
    "write_weights",
    "DemucsModel",
    "forward_offline",
    "StreamState",
    "stream_push",
    "stream_flush",
    "MacReport",
    "lookahead_samples",
    "mac_per_sample",
    "resample_x4",
]
