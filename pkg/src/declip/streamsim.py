"""Virtual-clock streaming simulator for response time and RTF measurement.

The protocol: input samples arrive one per 1/rate seconds; the buffer policy
decides when the processor under test runs; the latency of a probed sample is
the interval between its feed time (index / rate) and the emission time of
its processed counterpart. The virtual clock makes runs hardware-independent
and deterministic; wall-clock mode measures real compute on real hardware.
"""

from __future__ import annotations

import json
import platform
import queue
import threading
import time
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class FixedBlock:
    """Run the processor every ``block_size`` buffered samples."""

    block_size: int

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")


@dataclass(frozen=True)
class FrameBuffered:
    """Let a streaming processor consume input in ``frames`` latent-frame
    groups; emissions happen whenever the processor yields output."""

    frames: int
    chunk_samples: int = 4  # feed granularity; bounds emission-time quantization

    def __post_init__(self):
        if self.frames < 1:
            raise ValueError("frames must be >= 1")


@dataclass
class ProcessorUnderTest:
    """A block processor plus an optional declared cost model.

    ``process(block) -> block`` must preserve length. ``cost_s`` models the
    virtual seconds one invocation takes; it may be a constant or a callable
    of the block length. ``algorithmic_tail`` declares any fixed lookahead
    (in samples) the processor carries beyond the buffering wait.
    """

    process: object
    cost_s: object = 0.0
    algorithmic_tail: int = 0
    hop_samples: int = 256  # emission granularity unit under FrameBuffered
    name: str = "processor"

    def cost_of(self, n: int) -> float:
        if callable(self.cost_s):
            return float(self.cost_s(n))
        return float(self.cost_s)


def identity_processor(cost_s=0.0) -> ProcessorUnderTest:
    return ProcessorUnderTest(process=lambda block: block, cost_s=cost_s, name="identity")


@dataclass
class StreamReport:
    mode: str
    rate_hz: int
    duration_s: float
    policy: str
    rtf: float
    mean_response_ms: float
    p50_ms: float
    p95_ms: float
    max_ms: float
    probes: list = field(default_factory=list)
    realtime_capable: bool = True
    cpu: str = ""

    def to_json(self) -> str:
        return json.dumps(
            {
                "mode": self.mode,
                "rate_hz": self.rate_hz,
                "duration_s": self.duration_s,
                "policy": self.policy,
                "rtf": self.rtf,
                "mean_response_ms": self.mean_response_ms,
                "p50_ms": self.p50_ms,
                "p95_ms": self.p95_ms,
                "max_ms": self.max_ms,
                "probes": [[int(i), float(l)] for i, l in self.probes],
                "realtime_capable": bool(self.realtime_capable),
                "cpu": self.cpu,
            },
            indent=2,
        )


def _policy_str(policy) -> str:
    if isinstance(policy, FixedBlock):
        return f"fixed_block:{policy.block_size}"
    return f"frame_buffered:{policy.frames}"


def _finish_report(mode, rate, duration, policy, total_cost, probes) -> StreamReport:
    if not probes:
        raise ValueError("no probed sample produced output; lengthen the run")
    lat = np.array([l for _, l in probes])
    rtf = total_cost / duration
    return StreamReport(
        mode=mode,
        rate_hz=rate,
        duration_s=duration,
        policy=_policy_str(policy),
        rtf=rtf,
        mean_response_ms=float(lat.mean()),
        p50_ms=float(np.percentile(lat, 50)),
        p95_ms=float(np.percentile(lat, 95)),
        max_ms=float(lat.max()),
        probes=probes,
        realtime_capable=rtf <= 1.0,
        cpu=platform.processor() or platform.machine(),
    )


def _probe_indices(n_samples: int, probe_every: int) -> np.ndarray:
    # the probe_every-th sample and every probe_every-th sample after it
    return np.arange(probe_every - 1, n_samples, probe_every)


def simulate(
    p: ProcessorUnderTest,
    policy,
    rate: int = 16000,
    duration: float = 100.0,
    probe_every: int = 500,
    mode: str = "virtual",
) -> StreamReport:
    """Feed ``duration * rate`` samples through the buffered processor and
    aggregate per-probe response times and the real-time factor."""
    n_samples = int(round(duration * rate))
    if isinstance(policy, FixedBlock) and n_samples < policy.block_size:
        raise ValueError("duration shorter than one full buffer")
    if mode == "virtual":
        if isinstance(policy, FixedBlock):
            return _simulate_block_virtual(p, policy, rate, duration, n_samples, probe_every)
        return _simulate_stream_virtual(p, policy, rate, duration, n_samples, probe_every)
    if mode == "wall":
        return _simulate_wall(p, policy, rate, duration, n_samples, probe_every)
    raise ValueError(f"unknown mode {mode!r}")


def _simulate_block_virtual(p, policy, rate, duration, n_samples, probe_every):
    b = policy.block_size
    probes_at = _probe_indices(n_samples, probe_every)
    probes = []
    total_cost = 0.0
    busy_until = 0.0
    emit_pos = 0
    start = 0
    while start < n_samples:
        end = min(start + b, n_samples)
        # a block may run once its last sample has fully arrived
        arrive = end / rate
        cost = p.cost_of(end - start)
        total_cost += cost
        emit_time = max(arrive, busy_until) + cost
        busy_until = emit_time
        block = np.zeros(end - start)
        out = np.asarray(p.process(block))
        if out.size != block.size:
            raise RuntimeError(
                f"protocol error: processor returned {out.size} samples for a {block.size}-sample block"
            )
        for idx in probes_at:
            if emit_pos <= idx < emit_pos + block.size:
                probes.append((int(idx), (emit_time - idx / rate) * 1000.0))
        emit_pos += block.size
        start = end
    return _finish_report("virtual", rate, duration, policy, total_cost, probes)


def _simulate_stream_virtual(p, policy, rate, duration, n_samples, probe_every):
    """Streaming (push/flush) processor under a frame-buffered policy."""
    proc = p.process
    if not hasattr(proc, "push"):
        raise TypeError("FrameBuffered policy needs a processor with push()/flush()")
    chunk = policy.chunk_samples
    probes_at = set(int(i) for i in _probe_indices(n_samples, probe_every))
    probes = []
    total_cost = 0.0
    busy_until = 0.0
    emit_pos = 0
    fed = 0
    while fed < n_samples:
        n = min(chunk, n_samples - fed)
        out = proc.push(np.zeros(n))
        fed += n
        arrive = fed / rate
        cost = p.cost_of(out.size) if out.size else 0.0
        total_cost += cost
        emit_time = max(arrive, busy_until) + cost
        if out.size:
            busy_until = emit_time
            for idx in range(emit_pos, emit_pos + out.size):
                if idx in probes_at:
                    probes.append((idx, (emit_time - idx / rate) * 1000.0))
            emit_pos += out.size
    out = proc.flush()
    arrive = n_samples / rate
    cost = p.cost_of(out.size) if out.size else 0.0
    total_cost += cost
    emit_time = max(arrive, busy_until) + cost
    for idx in range(emit_pos, emit_pos + out.size):
        if idx in probes_at:
            probes.append((idx, (emit_time - idx / rate) * 1000.0))
    emit_pos += out.size
    if emit_pos != n_samples:
        raise RuntimeError(f"protocol error: {emit_pos} samples emitted for {n_samples} fed")
    return _finish_report("virtual", rate, duration, policy, total_cost, probes)


def _simulate_wall(p, policy, rate, duration, n_samples, probe_every):
    """Feeder and processor in separate threads over a bounded queue."""
    if isinstance(policy, FixedBlock):
        block = policy.block_size
        proc_fn = p.process
        streaming = False
    else:
        block = policy.chunk_samples
        proc_fn = p.process
        streaming = True
        if not hasattr(proc_fn, "push"):
            raise TypeError("FrameBuffered policy needs a processor with push()/flush()")

    q: queue.Queue = queue.Queue(maxsize=1024)
    feed_times = np.zeros(n_samples)
    emit_times: dict[int, float] = {}
    probes_at = set(int(i) for i in _probe_indices(n_samples, probe_every))
    t0 = time.perf_counter()

    def feeder():
        fed = 0
        while fed < n_samples:
            n = min(block, n_samples - fed)
            target = t0 + (fed + n) / rate
            delay = target - time.perf_counter()
            if delay > 0:
                time.sleep(delay)
            now = time.perf_counter()
            for i in range(fed, fed + n):
                feed_times[i] = t0 + i / rate
            q.put((fed, n))
            fed += n
        q.put(None)

    total_cost = 0.0

    def worker():
        nonlocal total_cost
        emit_pos = 0
        while True:
            item = q.get()
            if item is None:
                if streaming:
                    t_start = time.perf_counter()
                    out = proc_fn.flush()
                    total_cost += time.perf_counter() - t_start
                    now = time.perf_counter()
                    for i in range(emit_pos, emit_pos + out.size):
                        emit_times[i] = now
                return
            start, n = item
            t_start = time.perf_counter()
            if streaming:
                out = proc_fn.push(np.zeros(n))
            else:
                out = np.asarray(proc_fn(np.zeros(n)))
            total_cost += time.perf_counter() - t_start
            now = time.perf_counter()
            for i in range(emit_pos, emit_pos + out.size):
                emit_times[i] = now
            emit_pos += out.size

    ft = threading.Thread(target=feeder)
    wt = threading.Thread(target=worker)
    ft.start()
    wt.start()
    ft.join()
    wt.join()
    probes = [
        (i, (emit_times[i] - feed_times[i]) * 1000.0)
        for i in sorted(probes_at)
        if i in emit_times
    ]
    return _finish_report("wall", rate, duration, policy, total_cost, probes)


def rtf_offline(corpus_duration_s: float, measured_time_s: float) -> float:
    """Real-time factor: total processing time over total audio duration."""
    if corpus_duration_s <= 0:
        raise ValueError("corpus duration must be positive")
    if measured_time_s < 0:
        raise ValueError("measured time must be non-negative")
    return measured_time_s / corpus_duration_s


def latency_decomposition(report: StreamReport, policy, p: ProcessorUnderTest) -> dict[str, float]:
    """Split the mean response into buffering wait, algorithmic lookahead and
    compute. Buffering and algorithmic parts are closed-form; compute is the
    residual, so the three always sum to the mean."""
    rate = report.rate_hz
    if isinstance(policy, FixedBlock):
        buffering_ms = (policy.block_size + 1) / (2 * rate) * 1000.0
    else:
        # outputs arrive in hop*frames batches
        buffering_ms = (p.hop_samples * policy.frames + 1) / (2 * rate) * 1000.0
    algorithmic_ms = (p.algorithmic_tail + 1) / rate * 1000.0 if p.algorithmic_tail else 0.0
    compute_ms = report.mean_response_ms - buffering_ms - algorithmic_ms
    return {
        "buffering_ms": buffering_ms,
        "algorithmic_ms": algorithmic_ms,
        "compute_ms": compute_ms,
    }
