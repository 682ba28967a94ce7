"""Training loop: reconstruction-only ("dd") and adversarial ("ddd") modes.

Per step: sample a batch of segments, clip each on the fly at a random
log-uniform threshold, and update. In adversarial mode one discriminator
step precedes one generator step per batch, with the bank trained jointly
from step 0 (recorded in the log header). The log is JSON lines, one record
per step, preceded by a header with the full configuration.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch

from ddd_trainer.arch import ArchConfig
from ddd_trainer.data import load_corpus, make_batch
from ddd_trainer.discriminators import DiscriminatorBank
from ddd_trainer.generator import Generator
from ddd_trainer.losses import (
    feature_matching_loss,
    lsgan_losses,
    multi_res_stft_loss,
    per_head_lsgan_terms,
)
from ddd_trainer.weights_io import export_weights


@dataclass(frozen=True)
class TrainConfig:
    mode: str = "dd"  # "dd": reconstruction only; "ddd": adversarial
    epochs: int = 75
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    weight_decay: float = 1e-2
    batch_size: int | None = None  # defaults to 2 (ddd) or 32 (dd)
    segment_len: int = 24_000
    fm_weight: float = 4.0
    disc_width: float = 1.0
    seed: int = 0
    max_steps: int | None = None

    def __post_init__(self):
        if self.mode not in ("dd", "ddd"):
            raise ValueError(f"mode must be 'dd' or 'ddd', got {self.mode!r}")
        for name in ("epochs", "lr", "weight_decay", "segment_len", "fm_weight", "disc_width"):
            if getattr(self, name) <= 0 and name != "weight_decay":
                raise ValueError(f"{name} must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("betas must lie in (0, 1)")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")

    @property
    def batch(self) -> int:
        if self.batch_size is not None:
            return self.batch_size
        return 2 if self.mode == "ddd" else 32


class NonFiniteLossError(FloatingPointError):
    def __init__(self, step: int, state_path: Path):
        super().__init__(f"non-finite loss at step {step}; state dumped to {state_path}")
        self.step = step
        self.state_path = state_path


class Trainer:
    def __init__(self, corpus, cfg: TrainConfig, arch: ArchConfig = ArchConfig()):
        if isinstance(corpus, (str, Path)):
            corpus = load_corpus(corpus)
        if not corpus:
            raise ValueError("corpus is empty")
        self.corpus = corpus
        self.cfg = cfg
        self.arch = arch
        self.rng = np.random.default_rng(cfg.seed)
        torch.manual_seed(cfg.seed)
        self.generator = Generator(arch)
        self.g_opt = torch.optim.AdamW(
            self.generator.parameters(),
            lr=cfg.lr,
            betas=(cfg.beta1, cfg.beta2),
            weight_decay=cfg.weight_decay,
        )
        if cfg.mode == "ddd":
            self.disc = DiscriminatorBank(cfg.disc_width)
            self.d_opt = torch.optim.AdamW(
                self.disc.parameters(),
                lr=cfg.lr,
                betas=(cfg.beta1, cfg.beta2),
                weight_decay=cfg.weight_decay,
            )
        else:
            self.disc = None
            self.d_opt = None
        self.step_index = 0

    @property
    def steps_per_epoch(self) -> int:
        return max(1, math.ceil(len(self.corpus) / self.cfg.batch))

    def total_steps(self) -> int:
        total = self.cfg.epochs * self.steps_per_epoch
        return total if self.cfg.max_steps is None else min(total, self.cfg.max_steps)

    def step(self) -> dict:
        """One optimization step; returns the per-step log record."""
        cfg = self.cfg
        clean_np, clipped_np, thetas = make_batch(
            self.corpus, cfg.batch, cfg.segment_len, self.rng
        )
        clean = torch.from_numpy(clean_np)
        clipped = torch.from_numpy(clipped_np)

        record: dict = {
            "step": self.step_index,
            "theta": [float(t) for t in thetas],
        }

        if self.disc is not None:
            with torch.no_grad():
                fake_for_d = self.generator(clipped)
            real_scores, _ = self.disc(clean)
            fake_scores, _ = self.disc(fake_for_d)
            d_loss, _ = lsgan_losses(real_scores, fake_scores)
            self.d_opt.zero_grad()
            d_loss.backward()
            self.d_opt.step()
            record["d_loss"] = float(d_loss.detach())
            record["d_head_terms"] = per_head_lsgan_terms(real_scores, fake_scores)

        yhat = self.generator(clipped)
        l1 = (clean - yhat).abs().mean()
        mrstft = multi_res_stft_loss(clean, yhat).mean() / cfg.segment_len
        recon = l1 + mrstft
        g_loss = recon
        if self.disc is not None:
            with torch.no_grad():
                _, real_feats = self.disc(clean)
            fake_scores, fake_feats = self.disc(yhat)
            g_adv = sum(((f - 1.0) ** 2).mean() for f in fake_scores)
            fm = feature_matching_loss(real_feats, fake_feats)
            g_loss = recon + cfg.fm_weight * fm + g_adv
            record["g_adv"] = float(g_adv.detach())
            record["fm"] = float(fm.detach())
        self.g_opt.zero_grad()
        g_loss.backward()
        self.g_opt.step()

        record.update(
            l1=float(l1.detach()),
            mrstft=float(mrstft.detach()),
            recon=float(recon.detach()),
            g_loss=float(g_loss.detach()),
        )
        self.step_index += 1
        return record

    def run(self, out_dir) -> Path:
        """Train to completion; writes the log and the exported weights.
        Returns the weight file path."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        log_path = out_dir / "train_log.jsonl"
        weight_path = out_dir / "model.dddw"
        header = {
            "config": asdict(self.cfg),
            "arch": asdict(self.arch),
            "joint_from_step_0": self.cfg.mode == "ddd",
        }
        with open(log_path, "w") as log:
            log.write(json.dumps(header) + "\n")
            for _ in range(self.total_steps()):
                record = self.step()
                numeric = [
                    v
                    for k, v in record.items()
                    if isinstance(v, float)
                ] + record["theta"]
                if not all(math.isfinite(v) for v in numeric):
                    state_path = out_dir / "abort_state.dddw"
                    export_weights(self.generator, state_path)
                    log.write(json.dumps({**record, "aborted": True}) + "\n")
                    log.flush()
                    raise NonFiniteLossError(record["step"], state_path)
                log.write(json.dumps(record) + "\n")
        export_weights(self.generator, weight_path)
        return weight_path


def train(corpus_dir, cfg: TrainConfig, out_dir, arch: ArchConfig = ArchConfig()) -> Path:
    """Train on a directory of clean mono 16 kHz WAVs; returns the weight
    file path. ``out_dir`` also receives the JSON-lines training log."""
    return Trainer(corpus_dir, cfg, arch).run(out_dir)
