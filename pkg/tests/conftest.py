import numpy as np
import pytest

from priorlab.dataio import apply_overrides, load_dataset
from priorlab.schemas import TrainConfig

TINY = [
    "dataset=synthetic",
    "synthetic_dim=16",
    "synthetic_modes=2",
    "synthetic_train=64",
    "synthetic_test=48",
    "latent_dim=2",
    "encoder_hidden=8",
    "decoder_hidden=8",
    "flow_depth=2",
    "flow_width=8",
    "prior_hidden=8",
    "disc_hidden=8",
    "epochs=2",
    "batch_size=16",
    "lr=0.001",
    "frechet_samples=32",
    "ppl_pairs=8",
    "diversity_samples=16",
    "latent_samples=32",
    "separability_samples=40",
    "probe_epochs=1",
]


@pytest.fixture
def tiny_config():
    """Factory for a CPU-instant synthetic config."""

    def make(*overrides: str) -> TrainConfig:
        return apply_overrides(TrainConfig(), [*TINY, *overrides])

    return make


@pytest.fixture
def tiny_data(tiny_config):
    cfg = tiny_config()
    return (
        load_dataset(cfg.data, "train"),
        load_dataset(cfg.data, "test"),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def tiny_config_file(tmp_path):
    """The tiny settings as a ``key = value`` file on disk."""
    path = tmp_path / "tiny.cfg"
    lines = [" = ".join(item.split("=", 1)) for item in TINY]
    path.write_text("# tiny synthetic run\n" + "\n".join(lines) + "\n")
    return path
