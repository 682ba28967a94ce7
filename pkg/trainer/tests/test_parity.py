"""Cross-component contract: exported weights and parity vectors must be
accepted and reproduced by the runtime declipping package."""

import numpy as np
import pytest
import torch

torch.manual_seed(0)

declip_spectral = pytest.importorskip("declip.spectral")
declip_weights = pytest.importorskip("declip.engine.weights")
from declip.engine.model import DemucsModel  # noqa: E402

from ddd_trainer import ArchConfig, Generator, dump_parity, export_weights  # noqa: E402
from ddd_trainer.losses import reconstruction_loss  # noqa: E402


@pytest.fixture(scope="module")
def exported(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("parity")
    arch = ArchConfig(initial_channels=4)
    torch.manual_seed(3)
    gen = Generator(arch)
    wpath = tmp / "model.dddw"
    export_weights(gen, wpath)
    ppath = tmp / "parity.npz"
    dump_parity(gen, ppath, wpath, n=8, seed=11)
    return gen, wpath, ppath


def test_export_accepted_by_runtime_validation(exported):
    _, wpath, _ = exported
    weights = declip_weights.read_weights(wpath)
    cfg = weights.config_echo()
    assert cfg is not None and cfg.initial_channels == 4
    declip_weights.validate_weights(cfg, weights)


def test_parity_vectors_replay_in_runtime_engine(exported):
    _, wpath, ppath = exported
    weights = declip_weights.read_weights(wpath)
    cfg = weights.config_echo()
    model = DemucsModel(cfg, weights)
    data = np.load(ppath)
    worst = 0.0
    for x, want in zip(data["inputs"], data["outputs"]):
        got = model.forward(x.astype(np.float64))
        worst = max(worst, float(np.max(np.abs(got - want))))
    assert worst <= 1e-4, f"worst deviation {worst:.2e}"


def test_parity_checksum_matches_weight_file(exported):
    import zlib

    _, wpath, ppath = exported
    assert int(np.load(ppath)["weight_crc32"]) == zlib.crc32(wpath.read_bytes()) & 0xFFFFFFFF


def test_reconstruction_loss_matches_runtime_composite():
    rng = np.random.default_rng(4)
    for seed in range(5):
        y = rng.standard_normal(4096) * 0.4
        yhat = y + rng.standard_normal(4096) * 0.05
        want = declip_spectral.composite_loss(y, yhat)
        got = float(
            reconstruction_loss(
                torch.from_numpy(y).double(), torch.from_numpy(yhat).double()
            )
        )
        assert abs(got - want) / want <= 1e-4, seed
