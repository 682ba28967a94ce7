"""Training objectives.

The reconstruction loss reproduces the runtime package's composite
time/frequency distance with identical conventions: frames start at sample
0 with no centered padding and trailing partials dropped, periodic Hann
window, hop = fft/4 over FFT sizes 512/1024/2048, log magnitudes floored at
1e-7, and the log-L1 term normalized by the spectrogram element count. On a
single pair of signals it matches the runtime implementation to float
precision, which the cross-component tests pin down.
"""

from __future__ import annotations

import torch

EPS_LOG = 1e-7
MULTI_RES_FFT_SIZES = (512, 1024, 2048)

_WINDOWS: dict[tuple[int, torch.dtype], torch.Tensor] = {}


def _window(fft: int, dtype: torch.dtype, device) -> torch.Tensor:
    key = (fft, dtype)
    if key not in _WINDOWS or _WINDOWS[key].device != device:
        _WINDOWS[key] = torch.hann_window(fft, periodic=True, dtype=dtype, device=device)
    return _WINDOWS[key]


def _stft_mag(y: torch.Tensor, fft: int) -> torch.Tensor:
    """(B, T) -> (B, frames, fft//2 + 1) magnitudes."""
    if y.shape[-1] < fft:
        raise ValueError(f"signal of length {y.shape[-1]} is shorter than one frame ({fft})")
    frames = y.unfold(-1, fft, fft // 4) * _window(fft, y.dtype, y.device)
    return torch.fft.rfft(frames, dim=-1).abs()


def stft_terms(y: torch.Tensor, yhat: torch.Tensor, fft: int) -> torch.Tensor:
    """Per-item spectral-convergence plus normalized L1 log-magnitude, (B,)."""
    ref = _stft_mag(y, fft)
    est = _stft_mag(yhat, fft)
    sc = torch.linalg.vector_norm(est - ref, dim=(1, 2)) / torch.linalg.vector_norm(ref, dim=(1, 2))
    log_l1 = (ref.clamp(min=EPS_LOG).log() - est.clamp(min=EPS_LOG).log()).abs().mean(dim=(1, 2))
    return sc + log_l1


def multi_res_stft_loss(y: torch.Tensor, yhat: torch.Tensor) -> torch.Tensor:
    """Per-item sum over the three resolutions, (B,)."""
    return sum(stft_terms(y, yhat, fft) for fft in MULTI_RES_FFT_SIZES)


def reconstruction_loss(y: torch.Tensor, yhat: torch.Tensor) -> torch.Tensor:
    """Mean over the batch of the length-normalized L1 + multi-resolution
    spectral distance; accepts (B, T) or (T,)."""
    if y.dim() == 1:
        y, yhat = y.unsqueeze(0), yhat.unsqueeze(0)
    if y.shape != yhat.shape:
        raise ValueError("signals must have equal shape")
    l1 = (y - yhat).abs().sum(dim=1)
    return ((l1 + multi_res_stft_loss(y, yhat)) / y.shape[1]).mean()


def lsgan_losses(real_scores, fake_scores) -> tuple[torch.Tensor, torch.Tensor]:
    """Least-squares GAN objectives summed over heads.

    Returns (d_loss, g_adv): the discriminator drives real scores to 1 and
    fake scores to 0; the generator drives fake scores to 1.
    """
    if len(real_scores) != len(fake_scores):
        raise ValueError("mismatched head counts")
    d_loss = sum(((r - 1.0) ** 2).mean() + (f**2).mean() for r, f in zip(real_scores, fake_scores))
    g_adv = sum(((f - 1.0) ** 2).mean() for f in fake_scores)
    return d_loss, g_adv


def per_head_lsgan_terms(real_scores, fake_scores) -> list[tuple[float, float]]:
    """(real term, fake term) of the discriminator loss per head, as floats."""
    return [
        (float(((r - 1.0) ** 2).mean().detach()), float((f**2).mean().detach()))
        for r, f in zip(real_scores, fake_scores)
    ]


def feature_matching_loss(real_feats, fake_feats) -> torch.Tensor:
    """Mean absolute difference between corresponding intermediate feature
    maps, averaged over layers within each head and then over heads."""
    if len(real_feats) != len(fake_feats):
        raise ValueError("mismatched head counts")
    head_means = []
    for r_layers, f_layers in zip(real_feats, fake_feats):
        if len(r_layers) != len(f_layers):
            raise ValueError("mismatched layer counts within a head")
        head_means.append(
            sum((r - f).abs().mean() for r, f in zip(r_layers, f_layers)) / len(r_layers)
        )
    return sum(head_means) / len(head_means)


def generator_objective(
    y: torch.Tensor,
    yhat: torch.Tensor,
    real_feats=None,
    fake_scores=None,
    fake_feats=None,
    fm_weight: float = 4.0,
) -> torch.Tensor:
    """Reconstruction loss plus, when discriminator outputs are supplied,
    the weighted feature-matching term and the adversarial term."""
    total = reconstruction_loss(y, yhat)
    if fake_scores is not None:
        total = total + sum(((f - 1.0) ** 2).mean() for f in fake_scores)
        total = total + fm_weight * feature_matching_loss(real_feats, fake_feats)
    return total
