import numpy as np
import pytest
import torch

from ddd_trainer import (
    feature_matching_loss,
    generator_objective,
    lsgan_losses,
    reconstruction_loss,
)
from ddd_trainer.losses import MULTI_RES_FFT_SIZES, multi_res_stft_loss, stft_terms


class TestLsgan:
    def test_perfect_discriminator(self):
        real = [torch.ones(2, 7) for _ in range(8)]
        fake = [torch.zeros(2, 7) for _ in range(8)]
        d, g = lsgan_losses(real, fake)
        assert float(d) == 0.0
        assert float(g) == pytest.approx(8.0)

    def test_fooled_discriminator(self):
        real = [torch.zeros(3) for _ in range(5)]
        fake = [torch.ones(3) for _ in range(5)]
        d, g = lsgan_losses(real, fake)
        assert float(d) == pytest.approx(10.0)
        assert float(g) == 0.0

    def test_random_scores_match_direct_recomputation(self):
        gen = torch.Generator().manual_seed(0)
        real = [torch.randn(4, 9, generator=gen) for _ in range(3)]
        fake = [torch.randn(4, 9, generator=gen) for _ in range(3)]
        d, g = lsgan_losses(real, fake)
        want_d = sum(float(((r - 1) ** 2).mean() + (f**2).mean()) for r, f in zip(real, fake))
        want_g = sum(float(((f - 1) ** 2).mean()) for f in fake)
        assert float(d) == pytest.approx(want_d, abs=1e-6)
        assert float(g) == pytest.approx(want_g, abs=1e-6)

    def test_head_count_mismatch(self):
        with pytest.raises(ValueError):
            lsgan_losses([torch.ones(1)], [])


class TestFeatureMatching:
    def test_identical_features_zero(self):
        feats = [[torch.randn(1, 4, 5) for _ in range(3)] for _ in range(2)]
        assert float(feature_matching_loss(feats, feats)) == 0.0

    def test_constant_offset(self):
        real = [[torch.randn(2, 3) for _ in range(4)] for _ in range(3)]
        fake = [[r + 0.25 for r in layers] for layers in real]
        assert float(feature_matching_loss(real, fake)) == pytest.approx(0.25, abs=1e-6)

    def test_random_pair_matches_direct_recomputation(self):
        gen = torch.Generator().manual_seed(1)
        real = [[torch.randn(2, 6, generator=gen) for _ in range(3)] for _ in range(4)]
        fake = [[torch.randn(2, 6, generator=gen) for _ in range(3)] for _ in range(4)]
        got = float(feature_matching_loss(real, fake))
        want = np.mean(
            [np.mean([float((r - f).abs().mean()) for r, f in zip(rl, fl)]) for rl, fl in zip(real, fake)]
        )
        assert got == pytest.approx(want, abs=1e-6)

    def test_layer_structure_mismatch(self):
        with pytest.raises(ValueError):
            feature_matching_loss([[torch.ones(2)] * 2], [[torch.ones(2)]])


class TestReconstruction:
    def test_identity_is_zero(self):
        y = torch.randn(1, 4096)
        assert float(reconstruction_loss(y, y)) == 0.0

    def test_requires_equal_shapes(self):
        with pytest.raises(ValueError):
            reconstruction_loss(torch.zeros(1, 4096), torch.zeros(1, 4097))

    def test_too_short_for_one_frame(self):
        with pytest.raises(ValueError):
            reconstruction_loss(torch.zeros(1, 100), torch.zeros(1, 100))

    def test_multi_res_is_sum_of_resolutions(self):
        gen = torch.Generator().manual_seed(2)
        y = torch.randn(2, 4096, generator=gen)
        yhat = y + 0.05 * torch.randn(2, 4096, generator=gen)
        total = multi_res_stft_loss(y, yhat)
        parts = sum(stft_terms(y, yhat, fft) for fft in MULTI_RES_FFT_SIZES)
        torch.testing.assert_close(total, parts)

    def test_batch_mean_of_per_item_values(self):
        gen = torch.Generator().manual_seed(3)
        y = torch.randn(3, 4096, generator=gen)
        yhat = y + 0.1 * torch.randn(3, 4096, generator=gen)
        whole = float(reconstruction_loss(y, yhat))
        singles = [float(reconstruction_loss(y[i], yhat[i])) for i in range(3)]
        assert whole == pytest.approx(np.mean(singles), rel=1e-6)


class TestGeneratorObjective:
    def test_reduces_to_reconstruction_without_discriminator(self):
        gen = torch.Generator().manual_seed(4)
        y = torch.randn(1, 4096, generator=gen)
        yhat = y + 0.1 * torch.randn(1, 4096, generator=gen)
        assert float(generator_objective(y, yhat)) == float(reconstruction_loss(y, yhat))

    def test_perfect_generator_and_fooled_discriminator_is_zero(self):
        y = torch.randn(1, 4096, generator=torch.Generator().manual_seed(5))
        feats = [[torch.randn(1, 3)] for _ in range(2)]
        scores = [torch.ones(1, 4) for _ in range(2)]
        total = generator_objective(y, y, real_feats=feats, fake_scores=scores, fake_feats=feats)
        assert float(total) == 0.0

    def test_feature_matching_weighted(self):
        y = torch.randn(1, 4096, generator=torch.Generator().manual_seed(6))
        real = [[torch.zeros(2, 2)]]
        fake = [[torch.full((2, 2), 0.5)]]
        scores = [torch.ones(1)]
        total = generator_objective(
            y, y, real_feats=real, fake_scores=scores, fake_feats=fake, fm_weight=4.0
        )
        assert float(total) == pytest.approx(4.0 * 0.5)
