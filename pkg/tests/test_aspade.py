import numpy as np
import pytest

from siggen import speech_shaped_noise
from declip import signal_core as sc
from declip.aspade import (
    AspadeConfig,
    FrameProblem,
    declip,
    declip_frame,
    hard_threshold_topk,
    project_consistency,
)


class TestProjectConsistency:
    def test_feasible_point_unchanged(self):
        theta = 0.5
        obs = np.array([0.2, 0.5, -0.5, 0.1])
        mask = np.array([0, 1, -1, 0], dtype=np.int8)
        x = np.array([0.2, 0.8, -0.9, 0.1])
        np.testing.assert_array_equal(project_consistency(x, obs, mask, theta), x)

    def test_all_reliable_returns_observed(self):
        obs = np.array([0.1, -0.2, 0.0])
        mask = np.zeros(3, dtype=np.int8)
        np.testing.assert_array_equal(
            project_consistency(np.array([9.0, 9.0, 9.0]), obs, mask, 0.5), obs
        )

    def test_clipped_high_floor(self):
        out = project_consistency(
            np.array([0.0]), np.array([0.3]), np.array([1], dtype=np.int8), 0.3
        )
        assert out[0] == 0.3

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        obs = sc.hard_clip(rng.uniform(-1, 1, 64), 0.4)
        mask = sc.clip_mask(obs, 0.4)
        x = rng.uniform(-2, 2, 64)
        once = project_consistency(x, obs, mask, 0.4)
        np.testing.assert_array_equal(project_consistency(once, obs, mask, 0.4), once)


class TestHardThresholdTopk:
    def test_k_zero(self):
        z = np.fft.fft(np.random.default_rng(0).standard_normal(16))
        assert np.all(hard_threshold_topk(z, 0) == 0)

    def test_k_at_least_length_is_identity(self):
        z = np.fft.fft(np.random.default_rng(1).standard_normal(16))
        np.testing.assert_array_equal(hard_threshold_topk(z, 16), z)
        np.testing.assert_array_equal(hard_threshold_topk(z, 99), z)

    def test_order_statistics(self):
        out = hard_threshold_topk(np.array([3.0, 1.0, 2.0]), 2)
        assert out[0] == 3.0 and out[2] == 2.0

    def test_negative_k_rejected(self):
        with pytest.raises(ValueError):
            hard_threshold_topk(np.ones(4, dtype=complex), -1)

    def test_conjugate_pairs_kept_together(self):
        rng = np.random.default_rng(2)
        z = np.fft.fft(rng.standard_normal(32))
        out = hard_threshold_topk(z, 5)
        kept = np.flatnonzero(out != 0)
        for i in kept:
            if i not in (0, 16):
                assert (32 - i) in kept

    def test_keeps_largest_magnitudes(self):
        rng = np.random.default_rng(3)
        z = np.fft.fft(rng.standard_normal(64))
        out = hard_threshold_topk(z, 10)
        kept_mags = np.abs(z[out != 0])
        dropped_mags = np.abs(z[out == 0])
        assert kept_mags.min() >= dropped_mags.max() - 1e-12

    def test_deterministic_tie_break_prefers_low_frequency(self):
        z = np.zeros(8, dtype=complex)
        z[1] = z[7] = 4.0  # exact tie between the (1,7) and (2,6) pairs
        z[2] = z[6] = 4.0
        out = hard_threshold_topk(z, 2)
        kept = set(np.flatnonzero(np.abs(out) > 0))
        assert kept == {1, 7}


class TestDeclipFrame:
    def test_unclipped_frame_short_circuits(self):
        obs = np.linspace(-0.3, 0.3, 64)
        mask = np.zeros(64, dtype=np.int8)
        sol, iters, ok = declip_frame(FrameProblem(obs, mask, 0.5), AspadeConfig(frame_len=64, hop=16))
        np.testing.assert_array_equal(sol, obs)
        assert iters == 1 and ok

    def test_infeasible_frame_rejected(self):
        obs = np.full(64, 0.9)
        mask = np.zeros(64, dtype=np.int8)
        with pytest.raises(ValueError, match="infeasible"):
            declip_frame(FrameProblem(obs, mask, 0.5), AspadeConfig(frame_len=64, hop=16))

    def test_mask_length_checked(self):
        with pytest.raises(ValueError, match="mask"):
            declip_frame(
                FrameProblem(np.zeros(64), np.zeros(32, dtype=np.int8), 0.5),
                AspadeConfig(frame_len=64, hop=16),
            )

    def test_single_tone_frame_recovery(self):
        n = 1024
        y = 0.9 * np.sin(2 * np.pi * 37 * np.arange(n) / n + 0.3)
        obs = sc.hard_clip(y, 0.5)
        mask = sc.clip_mask(obs, 0.5)
        sol, iters, ok = declip_frame(FrameProblem(obs, mask, 0.5), AspadeConfig())
        assert sc.snr_db(y, sol) >= 30.0
        assert iters <= AspadeConfig().iters

    def test_solution_is_consistent(self):
        rng = np.random.default_rng(4)
        y = rng.uniform(-1, 1, 1024)
        theta = 0.4
        obs = sc.hard_clip(y, theta)
        mask = sc.clip_mask(obs, theta)
        sol, _, _ = declip_frame(FrameProblem(obs, mask, theta), AspadeConfig())
        rel = mask == sc.MASK_RELIABLE
        np.testing.assert_array_equal(sol[rel], obs[rel])
        assert np.all(sol[mask == sc.MASK_CLIPPED_HIGH] >= theta - 1e-12)
        assert np.all(sol[mask == sc.MASK_CLIPPED_LOW] <= -theta + 1e-12)


class TestAspadeConfig:
    def test_hop_must_divide_frame(self):
        with pytest.raises(ValueError):
            AspadeConfig(frame_len=1024, hop=300)

    def test_iters_defaults_to_frame_len(self):
        assert AspadeConfig().iters == 1024
        assert AspadeConfig(max_iters=7).iters == 7

    def test_positive_constants(self):
        with pytest.raises(ValueError):
            AspadeConfig(sparsity_step=0)
        with pytest.raises(ValueError):
            AspadeConfig(relaxation_period=0)
        with pytest.raises(ValueError):
            AspadeConfig(max_iters=0)


class TestDeclip:
    def test_unclipped_input_is_identity(self):
        rng = np.random.default_rng(5)
        y = 0.4 * rng.standard_normal(3000)
        y = np.clip(y, -0.79, 0.79)
        mask = sc.clip_mask(y, 0.8)
        res = declip(y, mask, 0.8)
        np.testing.assert_array_equal(res.restored, y)
        assert all(res.converged)

    def test_output_consistency(self):
        rng = np.random.default_rng(6)
        y = rng.uniform(-1, 1, 3000)
        theta = 0.5
        x = sc.hard_clip(y, theta)
        mask = sc.clip_mask(x, theta)
        res = declip(x, mask, theta)
        rel = mask == sc.MASK_RELIABLE
        np.testing.assert_array_equal(res.restored[rel], x[rel])
        assert np.all(res.restored[mask == sc.MASK_CLIPPED_HIGH] >= theta - 1e-9)
        assert np.all(res.restored[mask == sc.MASK_CLIPPED_LOW] <= -theta + 1e-9)

    def test_tone_improvement(self):
        n = 4096
        y = 0.9 * np.sin(2 * np.pi * 37 * np.arange(n) / 1024)
        theta = sc.threshold_for_target_snr(y, 1.0)
        x = sc.hard_clip(y, theta)
        mask = sc.clip_mask(x, theta)
        res = declip(x, mask, theta)
        assert sc.snr_db(y, res.restored) - sc.snr_db(y, x) > 10.0

    def test_speech_shaped_improvement(self):
        y = speech_shaped_noise(0, 4096)
        theta = sc.threshold_for_target_snr(y, 5.0)
        x = sc.hard_clip(y, theta)
        mask = sc.clip_mask(x, theta)
        res = declip(x, mask, theta)
        assert sc.snr_db(y, res.restored) - sc.snr_db(y, x) > 0.0

    def test_termination_and_lengths(self):
        rng = np.random.default_rng(7)
        y = rng.uniform(-1, 1, 2500)  # not a multiple of the hop
        theta = 0.6
        x = sc.hard_clip(y, theta)
        mask = sc.clip_mask(x, theta)
        cfg = AspadeConfig()
        res = declip(x, mask, theta, cfg)
        assert res.restored.size == 2500
        assert all(1 <= i <= cfg.iters for i in res.iterations)

    def test_mask_length_checked(self):
        with pytest.raises(ValueError, match="mask"):
            declip(np.zeros(100), np.zeros(99, dtype=np.int8), 0.5)

    def test_short_signal(self):
        # shorter than one frame: single padded frame, exact length back
        y = 0.3 * np.sin(np.arange(300))
        mask = sc.clip_mask(y, 0.5)
        res = declip(y, mask, 0.5)
        assert res.restored.size == 300
