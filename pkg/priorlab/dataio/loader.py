from priorlab.dataio.dataset import Dataset
from priorlab.dataio.idx import load_mnist
from priorlab.dataio.synthetic import SyntheticSpec, synth_generate
from priorlab.schemas import DataConfig


def synthetic_spec(data: DataConfig, split: str = "train") -> SyntheticSpec:
    return SyntheticSpec(
        kind=data.synthetic_kind,
        modes=data.synthetic_modes,
        data_dim=data.synthetic_dim,
        noise=data.synthetic_noise,
        separation=data.synthetic_separation,
        n=data.synthetic_train if split == "train" else data.synthetic_test,
        seed=0,
    )


def load_dataset(data: DataConfig, split: str = "train") -> Dataset:
    """The configured train or test split."""
    if data.dataset == "synthetic":
        return synth_generate(synthetic_spec(data, split), split)
    subset = data.train_subset if split == "train" else data.test_subset
    return load_mnist(data.data_dir, split, subset, seed=0)
