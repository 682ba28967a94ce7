"""Clipping model, masks, SNR, threshold search, and waveform-shape statistics.

This module is the dependency-free foundation of the toolkit: everything here
is a pure function of its inputs (the only stateful object is
:class:`ThresholdSampler`, which owns its RNG).

Sample values are dimensionless amplitudes with a nominal range of [-1, 1].
Masks are ``int8`` arrays using the ``MASK_*`` constants below.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

# Per-sample mask labels.
MASK_RELIABLE = 0
MASK_CLIPPED_HIGH = 1
MASK_CLIPPED_LOW = -1

# Relative tolerance when deciding that a sample sits at the clipping level.
# Exact float equality is unreliable after 16-bit PCM or text round-trips.
MASK_REL_TOL = 1e-7


@dataclass(frozen=True)
class Waveform:
    """Mono sampled signal with its sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("waveform must be a non-empty 1-D array")
        if self.sample_rate <= 0:
            raise ValueError("sample rate must be positive")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate


def _as_samples(y) -> np.ndarray:
    if isinstance(y, Waveform):
        y = y.samples
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size < 1:
        raise ValueError("expected a non-empty 1-D sample array")
    return y


def _check_finite(y: np.ndarray, name: str = "input"):
    if not np.all(np.isfinite(y)):
        bad = int(np.flatnonzero(~np.isfinite(y))[0])
        raise ValueError(f"{name} contains a non-finite value at index {bad}")


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not (0.0 <= theta <= 1.0) or not math.isfinite(theta):
        raise ValueError(f"clip threshold must lie in [0, 1], got {theta}")
    return theta


def hard_clip(y, theta: float) -> np.ndarray:
    """Hard-clip ``y`` at ``theta``: samples with ``|y| <= theta`` pass
    through, everything else saturates to ``theta * sign(y)``."""
    y = _as_samples(y)
    _check_finite(y)
    theta = _check_theta(theta)
    return np.clip(y, -theta, theta)


def clip_mask(x, theta: float) -> np.ndarray:
    """Classify each sample of a clipped signal as reliable or saturated.

    Samples with ``|x| >= theta * (1 - MASK_REL_TOL)`` are labeled clipped
    (boundary samples count as saturated; that is the conservative choice for
    downstream consistency constraints).
    """
    x = _as_samples(x)
    _check_finite(x)
    theta = _check_theta(theta)
    if theta == 0.0:
        warnings.warn("theta = 0: every sample is labeled clipped", stacklevel=2)
    cut = theta * (1.0 - MASK_REL_TOL)
    mask = np.zeros(x.size, dtype=np.int8)
    mask[x >= cut] = MASK_CLIPPED_HIGH
    mask[x <= -cut] = MASK_CLIPPED_LOW
    return mask


def snr_db(reference, test) -> float:
    """Signal-to-noise ratio ``10*log10(||y||^2 / ||x - y||^2)`` in dB.

    Returns ``math.inf`` (the distinguished "infinite SNR" sentinel) when the
    two signals are exactly identical, so callers can render it specially.
    """
    y = _as_samples(reference)
    x = _as_samples(test)
    if y.size != x.size:
        raise ValueError(f"length mismatch: reference {y.size} vs test {x.size}")
    ref_energy = float(np.dot(y, y))
    if ref_energy == 0.0:
        raise ValueError("reference signal is identically zero")
    err = x - y
    err_energy = float(np.dot(err, err))
    if err_energy == 0.0:
        return math.inf
    return 10.0 * math.log10(ref_energy / err_energy)


@dataclass
class ThresholdSampler:
    """Draws training clip thresholds ``theta = 10**s`` with ``s`` uniform
    on [lo, hi]. Not safe for unsynchronized concurrent use."""

    lo: float = -2.0
    hi: float = -0.9
    rng_seed: int = 0
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("lo exponent must not exceed hi")
        self._rng = np.random.default_rng(self.rng_seed)

    def sample(self) -> float:
        s = self._rng.uniform(self.lo, self.hi)
        return float(10.0**s)

    def sample_many(self, n: int) -> np.ndarray:
        s = self._rng.uniform(self.lo, self.hi, size=n)
        return 10.0**s


def sample_training_threshold(sampler: ThresholdSampler) -> float:
    return sampler.sample()


def threshold_for_target_snr(y, target_db: float, tol_db: float = 0.01) -> float:
    """Find ``theta`` such that clipping ``y`` at it yields the target SNR.

    SNR is monotonically non-decreasing in theta, so plain bisection works.
    Raises ``ValueError`` when the target lies below the achievable minimum
    (the SNR as theta -> 0) or is the infinite-SNR sentinel.
    """
    y = _as_samples(y)
    _check_finite(y)
    if math.isinf(target_db):
        raise ValueError("infinite target SNR is not searchable; theta = max|y| is exact")
    if tol_db <= 0:
        raise ValueError("tolerance must be positive")

    lo, hi = 1e-6, float(np.max(np.abs(y)))
    if hi == 0.0:
        raise ValueError("reference signal is identically zero")

    snr_lo = snr_db(y, hard_clip(y, lo))
    if target_db < snr_lo:
        raise ValueError(
            f"target {target_db:.3f} dB unachievable; minimum reachable SNR is {snr_lo:.3f} dB"
        )

    theta = hi
    for _ in range(200):
        theta = 0.5 * (lo + hi)
        snr = snr_db(y, hard_clip(y, theta))
        if abs(snr - target_db) <= tol_db:
            return theta
        if snr < target_db:
            lo = theta
        else:
            hi = theta
        if hi - lo < 1e-9:
            break
    return theta


def count_saturated_extrema(reference, mask: np.ndarray) -> int:
    """Count strict local extrema of ``reference`` over saturated samples.

    An interior index i counts when ``mask[i] != MASK_RELIABLE`` and the
    consecutive differences change sign strictly; plateaus contribute nothing,
    which keeps the count well-defined and scale-invariant.
    """
    ref = _as_samples(reference)
    mask = np.asarray(mask)
    if mask.size != ref.size:
        raise ValueError("mask length must equal waveform length")
    if ref.size < 3:
        return 0
    d = np.diff(ref)
    turning = d[:-1] * d[1:] < 0.0
    saturated = mask[1:-1] != MASK_RELIABLE
    return int(np.count_nonzero(turning & saturated))
