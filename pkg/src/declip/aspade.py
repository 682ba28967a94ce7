"""Analysis-form sparse declipping (ADMM with relaxed sparsity).

Per frame, the solver alternates a hard-thresholding step in an orthonormal
DFT domain with an exact projection onto the clipping-consistency set, then
relaxes the sparsity budget. Frames are recombined by Hann-weighted
overlap-add with per-sample normalization, and reliable samples are finally
replaced by the observed values so data consistency holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from declip.signal_core import (
    MASK_CLIPPED_HIGH,
    MASK_CLIPPED_LOW,
    MASK_RELIABLE,
    _as_samples,
)


@dataclass(frozen=True)
class AspadeConfig:
    frame_len: int = 1024
    hop: int = 256
    sparsity_step: int = 1
    # Iterations between sparsity increments. Relaxing every iteration lets
    # the budget absorb the clipped signal before the dual variable has
    # pulled saturated samples anywhere; 16 iterations per level recovers
    # sparse content by orders of magnitude better at negligible cost.
    relaxation_period: int = 16
    tolerance: float = 0.1
    max_iters: int | None = None  # defaults to frame_len

    def __post_init__(self):
        if self.frame_len % self.hop != 0:
            raise ValueError("hop must divide frame_len")
        if self.sparsity_step < 1 or self.relaxation_period < 1:
            raise ValueError("sparsity step and relaxation period must be >= 1")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    @property
    def iters(self) -> int:
        return self.frame_len if self.max_iters is None else self.max_iters


@dataclass(frozen=True)
class FrameProblem:
    observed: np.ndarray
    mask: np.ndarray
    theta: float


@dataclass
class DeclipResult:
    restored: np.ndarray
    iterations: list[int] = field(default_factory=list)
    converged: list[bool] = field(default_factory=list)


def project_consistency(x: np.ndarray, observed: np.ndarray, mask: np.ndarray, theta: float) -> np.ndarray:
    """Project onto the set consistent with the clipped observation: reliable
    samples pinned to the observation, saturated samples pushed past +-theta."""
    out = np.where(mask == MASK_RELIABLE, observed, x)
    high = mask == MASK_CLIPPED_HIGH
    low = mask == MASK_CLIPPED_LOW
    out = np.where(high, np.maximum(out, theta), out)
    out = np.where(low, np.minimum(out, -theta), out)
    return out


def _group_layout(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Conjugate-pair structure of a length-n DFT spectrum.

    Returns (representative index, member count) per group: DC alone, each
    (i, n-i) pair together, and the Nyquist bin alone for even n.
    """
    reps = np.arange(n // 2 + 1 if n % 2 == 0 else (n + 1) // 2)
    sizes = np.full(reps.size, 2)
    sizes[0] = 1
    if n % 2 == 0:
        sizes[-1] = 1
    return reps, sizes


def hard_threshold_topk(z: np.ndarray, k: int) -> np.ndarray:
    """Keep the k largest-magnitude coefficients, zero the rest.

    Conjugate-symmetric pairs are kept or dropped together (the pair of the
    k-th coefficient may overflow the budget by one). Ties break toward the
    lower frequency index so the output is deterministic.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    n = z.size
    if k == 0:
        return np.zeros_like(z)
    if k >= n:
        return z
    reps, sizes = _group_layout(n)
    # group magnitude = max over the pair (they coincide for the spectrum of
    # a real signal, but stay well-defined for arbitrary input)
    mags = np.maximum(np.abs(z[reps]), np.abs(z[(n - reps) % n]))
    # descending magnitude, ascending frequency on ties
    order = np.lexsort((reps, -mags))
    cum = np.cumsum(sizes[order])
    n_groups = int(np.searchsorted(cum, k)) + 1
    chosen = reps[order[:n_groups]]
    keep = np.zeros(n, dtype=bool)
    keep[chosen] = True
    keep[(n - chosen) % n] = True
    out = np.zeros_like(z)
    out[keep] = z[keep]
    return out


def declip_frame(problem: FrameProblem, cfg: AspadeConfig) -> tuple[np.ndarray, int, bool]:
    """ADMM loop for one frame. Returns (solution, iterations, converged)."""
    obs = np.asarray(problem.observed, dtype=np.float64)
    mask = np.asarray(problem.mask)
    theta = float(problem.theta)
    n = obs.size
    if mask.size != n:
        raise ValueError("mask length must equal frame length")
    reliable = mask == MASK_RELIABLE
    if np.any(np.abs(obs[reliable]) > theta):
        raise ValueError("infeasible frame: reliable sample magnitude exceeds theta")
    if np.all(reliable):
        return obs.copy(), 1, True

    scale = 1.0 / np.sqrt(n)
    x = obs.copy()
    u = np.zeros(n, dtype=np.complex128)
    t = cfg.sparsity_step
    iters = 0
    converged = False
    for i in range(1, cfg.iters + 1):
        iters = i
        ax = np.fft.fft(x) * scale
        z = hard_threshold_topk(ax + u, t)
        x = project_consistency(np.real(np.fft.ifft((z - u) / scale)), obs, mask, theta)
        ax = np.fft.fft(x) * scale
        u = u + ax - z
        if np.linalg.norm(ax - z) <= cfg.tolerance:
            converged = True
            break
        if i % cfg.relaxation_period == 0:
            t += cfg.sparsity_step
    return x, iters, converged


def declip(x, mask: np.ndarray, theta: float, cfg: AspadeConfig | None = None) -> DeclipResult:
    """Frame-wise sparse declipping with Hann overlap-add reconstruction."""
    cfg = cfg or AspadeConfig()
    x = _as_samples(x)
    mask = np.asarray(mask)
    if mask.size != x.size:
        raise ValueError("mask length must equal signal length")

    n, frame, hop = x.size, cfg.frame_len, cfg.hop
    if n <= frame:
        padded_len = frame
    else:
        padded_len = frame + int(np.ceil((n - frame) / hop)) * hop
    xp = np.zeros(padded_len)
    xp[:n] = x
    mp = np.zeros(padded_len, dtype=mask.dtype)
    mp[:n] = mask

    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(frame) / frame)
    acc = np.zeros(padded_len)
    wsum = np.zeros(padded_len)
    result = DeclipResult(restored=np.empty(0))
    for start in range(0, padded_len - frame + 1, hop):
        sl = slice(start, start + frame)
        sol, iters, ok = declip_frame(FrameProblem(xp[sl], mp[sl], theta), cfg)
        acc[sl] += window * sol
        wsum[sl] += window
        result.iterations.append(iters)
        result.converged.append(ok)

    covered = wsum > 1e-12
    acc[covered] /= wsum[covered]
    acc[~covered] = xp[~covered]
    restored = acc[:n]
    # OLA can perturb reliable samples where windows overlap; restore them.
    rel = mask == MASK_RELIABLE
    restored[rel] = x[rel]
    result.restored = restored
    return result
