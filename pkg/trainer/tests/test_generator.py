import numpy as np
import pytest
import torch

from ddd_trainer import ArchConfig, Generator
from ddd_trainer.weights_io import META_FIELDS, export_tensors


def expected_names(arch: ArchConfig) -> set[str]:
    names = {"meta.config"}
    for b in range(arch.depth):
        for part in ("conv", "mix"):
            names |= {f"encoder.{b}.{part}.weight", f"encoder.{b}.{part}.bias"}
        for part in ("mix", "tconv"):
            names |= {f"decoder.{b}.{part}.weight", f"decoder.{b}.{part}.bias"}
    for layer in range(arch.lstm_layers):
        names |= {f"lstm.{layer}.{k}" for k in ("weight_ih", "weight_hh", "bias_ih", "bias_hh")}
    return names


def test_parameter_inventory_matches_weight_format(tiny_generator, tiny_arch):
    tensors = export_tensors(tiny_generator)
    assert set(tensors) == expected_names(tiny_arch)
    chans = tiny_arch.channels
    assert tensors["encoder.0.conv.weight"].shape == (chans[0], 1, tiny_arch.kernel)
    assert tensors["decoder.4.tconv.weight"].shape == (chans[0], 1, tiny_arch.kernel)
    h = tiny_arch.lstm_width
    assert tensors["lstm.0.weight_ih"].shape == (4 * h, h)
    assert tensors["meta.config"].shape == (len(META_FIELDS),)


def test_zero_parameters_give_zero_output(tiny_arch):
    gen = Generator(tiny_arch)
    with torch.no_grad():
        for p in gen.parameters():
            p.zero_()
        out = gen(torch.zeros(1, 2000))
    assert torch.equal(out, torch.zeros(1, 2000))


@pytest.mark.parametrize("n", [1, 100, 24_000])
def test_length_conservation(tiny_generator, n):
    x = torch.rand(2, n) - 0.5
    with torch.no_grad():
        out = tiny_generator(x)
    assert out.shape == (2, n)
    assert torch.isfinite(out).all()


def test_one_dimensional_input(tiny_generator):
    x = torch.rand(500) - 0.5
    with torch.no_grad():
        flat = tiny_generator(x)
        batched = tiny_generator(x.unsqueeze(0))
    assert flat.shape == (500,)
    torch.testing.assert_close(flat, batched[0])


def test_deterministic(tiny_generator):
    x = torch.rand(1, 3000) - 0.5
    with torch.no_grad():
        a = tiny_generator(x)
        b = tiny_generator(x)
    assert torch.equal(a, b)


def test_empty_input_rejected(tiny_generator):
    with pytest.raises(ValueError):
        tiny_generator(torch.zeros(1, 0))


def test_normalized_variant_runs():
    torch.manual_seed(1)
    gen = Generator(ArchConfig(initial_channels=2, normalize_input=True))
    x = 3.0 * (torch.rand(2, 2000) - 0.5)
    with torch.no_grad():
        out = gen(x)
    assert out.shape == (2, 2000)
    assert torch.isfinite(out).all()


def test_gradients_flow_to_all_parameters(tiny_arch):
    torch.manual_seed(2)
    gen = Generator(tiny_arch)
    x = torch.rand(1, 1500) - 0.5
    gen(x).abs().sum().backward()
    missing = [n for n, p in gen.named_parameters() if p.grad is None]
    assert not missing
