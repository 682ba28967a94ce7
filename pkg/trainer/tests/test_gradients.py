"""Finite-difference validation of the generator objective's gradients."""

import numpy as np
import pytest
import torch

from ddd_trainer import ArchConfig, DiscriminatorBank, Generator, generator_objective

EPS = 1e-4
REL_TOL = 1e-2


@pytest.fixture(scope="module")
def setup():
    torch.manual_seed(0)
    gen = Generator(ArchConfig(initial_channels=2)).double()
    disc = DiscriminatorBank(width=0.05).double()
    for p in disc.parameters():
        p.requires_grad_(False)
    g = torch.Generator().manual_seed(1)
    clean = (torch.rand(1, 2560, generator=g, dtype=torch.float64) - 0.5) * 1.2
    clipped = clean.clamp(-0.1, 0.1)
    return gen, disc, clean, clipped


def objective(gen, disc, clean, clipped) -> torch.Tensor:
    yhat = gen(clipped)
    with torch.no_grad():
        _, real_feats = disc(clean)
    fake_scores, fake_feats = disc(yhat)
    return generator_objective(
        clean, yhat, real_feats=real_feats, fake_scores=fake_scores, fake_feats=fake_feats
    )


def test_analytic_gradients_match_finite_differences(setup):
    gen, disc, clean, clipped = setup
    loss = objective(gen, disc, clean, clipped)
    loss.backward()

    params = [(n, p) for n, p in gen.named_parameters()]
    rng = np.random.default_rng(2)
    checked = 0
    for _ in range(16):
        name, p = params[int(rng.integers(len(params)))]
        idx = tuple(int(rng.integers(s)) for s in p.shape)
        analytic = float(p.grad[idx])
        with torch.no_grad():
            orig = float(p[idx])
            p[idx] = orig + EPS
            plus = float(objective(gen, disc, clean, clipped))
            p[idx] = orig - EPS
            minus = float(objective(gen, disc, clean, clipped))
            p[idx] = orig
        numeric = (plus - minus) / (2 * EPS)
        denom = max(abs(analytic), abs(numeric), 1e-8)
        assert abs(analytic - numeric) / denom <= REL_TOL, (
            f"{name}{idx}: analytic {analytic:.3e} vs numeric {numeric:.3e}"
        )
        checked += 1
    assert checked == 16
