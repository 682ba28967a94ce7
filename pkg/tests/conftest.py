import pytest

from declip.engine import DemucsConfig, DemucsModel, random_weights


@pytest.fixture(scope="session")
def tiny_cfg():
    return DemucsConfig(initial_channels=4)


@pytest.fixture(scope="session")
def tiny_model(tiny_cfg):
    return DemucsModel(tiny_cfg, random_weights(tiny_cfg, seed=0))
