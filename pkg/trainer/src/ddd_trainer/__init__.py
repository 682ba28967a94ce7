"""Training harness for the streaming speech declipper.

The generator here mirrors the inference engine's arithmetic exactly (same
framing, causal padding, resampling kernels and gate order), so weights
exported in the portable ``DDDW`` format drop straight into the runtime
package. The two packages share nothing but that file format and the parity
dumps produced by :func:`ddd_trainer.weights_io.dump_parity`.
"""

from ddd_trainer.arch import ArchConfig
from ddd_trainer.discriminators import DiscriminatorBank
from ddd_trainer.generator import Generator
from ddd_trainer.losses import (
    feature_matching_loss,
    generator_objective,
    lsgan_losses,
    reconstruction_loss,
)
from ddd_trainer.train import TrainConfig, Trainer, train
from ddd_trainer.weights_io import dump_parity, export_weights, read_weight_file

__all__ = [
    "ArchConfig",
    "DiscriminatorBank",
    "Generator",
    "TrainConfig",
    "Trainer",
    "dump_parity",
    "export_weights",
    "feature_matching_loss",
    "generator_objective",
    "lsgan_losses",
    "read_weight_file",
    "reconstruction_loss",
    "train",
]
