"""Latency and compute accounting for the engine.

Lookahead here is operational: the smallest L such that the streaming engine
has emitted output sample i before consuming any input sample beyond i + L.
It decomposes into the buffered-frame wait plus the fixed resampler advances,
and is verified empirically by the causality probe in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

from declip.engine.config import DemucsConfig
from declip.engine.model import DOWN_LOOKAHEAD_HI, UP_LOOKAHEAD
from declip.engine.resample import FIR_TAPS


def algorithmic_tail_samples(cfg: DemucsConfig) -> int:
    """Fixed (buffer-independent) lookahead beyond the frame wait."""
    return UP_LOOKAHEAD + DOWN_LOOKAHEAD_HI // cfg.resample_factor - 1


def lookahead_samples(cfg: DemucsConfig, buffer_frames: int) -> int:
    """Operational lookahead in original-rate samples.

    The first sample of an emission batch has waited for ``hop * frames``
    samples of framing plus the up/down resampler advances. Non-decreasing in
    ``buffer_frames``, stepping by ``hop`` per extra frame.
    """
    if buffer_frames < 1:
        raise ValueError("buffer_frames must be >= 1")
    return cfg.hop * buffer_frames + algorithmic_tail_samples(cfg)


@dataclass(frozen=True)
class MacReport:
    macs_per_sample: float
    breakdown: dict[str, float]


def mac_per_sample(cfg: DemucsConfig) -> MacReport:
    """Analytic multiply-accumulate count per original-rate sample.

    Convs count kernel * C_in * C_out per output frame; each LSTM layer
    counts 4 * H * (H + H) per frame; resampler branches count only their
    nonzero taps. Frame rates are expressed per original-rate sample.
    """
    breakdown: dict[str, float] = {}
    r = cfg.resample_factor
    # half-band FIR: the branch through the center is a single tap, the
    # interpolating branch carries (taps - 1) / 2 nonzero coefficients
    branch = (FIR_TAPS - 1) // 2
    stage = branch + 1  # MACs per pair of outputs of a x2 stage

    # x4 upsampler: stage 1 emits 2 samples per original sample, stage 2
    # emits 4; each output sample evaluates one polyphase branch
    breakdown["resample.up"] = stage + 2 * stage
    chans = cfg.channels
    ins = [1] + chans[:-1]
    rate = float(r)  # upsampled samples per original sample
    for b, (ci, co) in enumerate(zip(ins, chans)):
        rate /= cfg.stride  # output frames per original sample
        conv = cfg.kernel * ci * co * rate
        mix = co * (2 * co) * rate
        breakdown[f"encoder.{b}"] = conv + mix

    frame_rate = rate
    h = cfg.lstm_width
    breakdown["lstm"] = cfg.lstm_layers * 4 * h * (h + h) * frame_rate

    douts = list(reversed(ins))
    dins = list(reversed(chans))
    for b, (ci, co) in enumerate(zip(dins, douts)):
        mix = ci * (2 * ci) * rate
        tconv = cfg.kernel * ci * co * rate
        breakdown[f"decoder.{b}"] = mix + tconv
        rate *= cfg.stride

    # x4 downsampler: stage 1 emits 2 per original sample, stage 2 emits 1;
    # each output is a full kernel dot, but only the half-band's nonzero
    # taps count
    breakdown["resample.down"] = 2 * stage + stage
    total = float(sum(breakdown.values()))
    return MacReport(total, breakdown)
