import os

import pytest

try:
    import torch
    from ddd_trainer import ArchConfig, Generator

    _HAVE_TRAINER = True
except ImportError:  # running the runtime package's suite without the trainer
    _HAVE_TRAINER = False

collect_ignore_glob = [] if _HAVE_TRAINER else ["*"]

if _HAVE_TRAINER:

    @pytest.fixture(autouse=True)
    def _limit_threads():
        # Oversubscribing the available cores makes CPU conv backward
        # spin-wait, slowing tiny ops by orders of magnitude.
        torch.set_num_threads(min(4, os.cpu_count() or 1))

    @pytest.fixture(scope="session")
    def tiny_arch():
        return ArchConfig(initial_channels=2)

    @pytest.fixture(scope="session")
    def tiny_generator(tiny_arch):
        torch.manual_seed(0)
        return Generator(tiny_arch)
