"""
A small locally trained classifier whose hidden activations stand in
for pretrained perceptual feature networks.
"""

from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from loguru import logger

from priorlab.dataio.dataset import Dataset
from priorlab.dataio.lfck import read_container, write_container
from priorlab.errors import CheckpointError, MetricError
from priorlab.gradcore import Adam, Tensor, backward, no_grad
from priorlab.nets import Module, build_mlp

PROBE_HIDDEN = (128, 64)


class ProbeNet(Module):
    """data_dim -> 128 -> 64 -> classes; features tap the 64-wide layer."""

    def __init__(
        self,
        data_dim: int,
        num_classes: int,
        rng: np.random.Generator,
        hidden: Sequence[int] = PROBE_HIDDEN,
    ):
        self.data_dim = data_dim
        self.num_classes = num_classes
        self.hidden = list(hidden)
        self.layers = build_mlp(
            [data_dim, *self.hidden, num_classes], rng
        )
        self.seed: Optional[int] = None
        self.held_out_accuracy: Optional[float] = None

    def hidden_features(
        self, x: Tensor, frozen: bool = False
    ) -> List[Tensor]:
        outputs = []
        h = x
        for layer in self.layers[:-1]:
            h = layer(h, frozen=frozen)
            outputs.append(h)
        return outputs

    def logits(self, x: Tensor, frozen: bool = False) -> Tensor:
        h = self.hidden_features(x, frozen)[-1]
        return self.layers[-1](h, frozen=frozen)

    def features(
        self, images: np.ndarray, batch_size: int = 1000
    ) -> np.ndarray:
        """Penultimate activations, computed without a graph."""
        images = np.asarray(images, dtype=np.float64)
        out = []
        with no_grad():
            for start in range(0, images.shape[0], batch_size):
                chunk = Tensor(images[start : start + batch_size])
                out.append(self.hidden_features(chunk)[-1].data)
        if not out:
            return np.zeros((0, self.hidden[-1]))
        return np.concatenate(out, axis=0)

    def predict(
        self, images: np.ndarray, batch_size: int = 1000
    ) -> np.ndarray:
        images = np.asarray(images, dtype=np.float64)
        preds = []
        with no_grad():
            for start in range(0, images.shape[0], batch_size):
                chunk = Tensor(images[start : start + batch_size])
                preds.append(np.argmax(self.logits(chunk).data, axis=1))
        return np.concatenate(preds) if preds else np.zeros(0, int)


def log_softmax(logits: Tensor) -> Tensor:
    shift = Tensor(logits.data.max(axis=1, keepdims=True))
    shifted = logits - shift
    return shifted - shifted.exp().sum(axis=1, keepdims=True).log()


def train_probe(
    dataset: Dataset,
    seed: int = 0,
    epochs: int = 5,
    batch_size: int = 100,
    lr: float = 1e-3,
    held_out_fraction: float = 0.1,
) -> ProbeNet:
    """Fit the classifier by cross-entropy with Adam, then freeze it."""
    if dataset.labels is None or dataset.num_classes < 2:
        raise MetricError("probe training needs at least 2 classes")
    rng = np.random.default_rng(seed)
    probe = ProbeNet(dataset.data_dim, dataset.num_classes, rng)
    probe.seed = seed

    order = rng.permutation(len(dataset))
    n_held = int(round(held_out_fraction * len(dataset)))
    held, train_idx = order[:n_held], order[n_held:]
    if n_held == 0:
        held = train_idx
    images, labels = dataset.images, dataset.labels
    onehot = np.eye(dataset.num_classes)[labels]

    optimizer = Adam(probe.named_parameters(), lr=lr, maximize=True)
    params = list(optimizer.params.values())
    for epoch in range(epochs):
        perm = rng.permutation(train_idx)
        total = 0.0
        for start in range(0, perm.shape[0], batch_size):
            idx = perm[start : start + batch_size]
            logp = log_softmax(probe.logits(Tensor(images[idx])))
            loglik = (logp * onehot[idx]).sum(axis=1).mean()
            optimizer.step(backward(loglik, params))
            total += loglik.item() * idx.shape[0]
        logger.debug(
            f"probe epoch {epoch + 1}/{epochs}: mean log-lik "
            f"{total / max(train_idx.shape[0], 1):.4f}"
        )

    accuracy = float(np.mean(probe.predict(images[held]) == labels[held]))
    probe.held_out_accuracy = accuracy
    probe.eval()
    logger.info(f"probe held-out accuracy {accuracy:.4f}")
    return probe


def save_probe(probe: ProbeNet, path: Union[str, Path]) -> Path:
    metadata = {
        "kind": "probe",
        "data_dim": probe.data_dim,
        "num_classes": probe.num_classes,
        "hidden": probe.hidden,
        "seed": probe.seed,
        "held_out_accuracy": probe.held_out_accuracy,
    }
    blocks = {
        f"param/{name}": p.data
        for name, p in probe.named_parameters().items()
    }
    return write_container(path, metadata, blocks)


def load_probe(path: Union[str, Path]) -> ProbeNet:
    metadata, blocks = read_container(path)
    if metadata.get("kind") != "probe":
        raise CheckpointError(
            "wrong kind", f"{metadata.get('kind')!r} is not a probe"
        )
    probe = ProbeNet(
        metadata["data_dim"],
        metadata["num_classes"],
        np.random.default_rng(0),
        metadata["hidden"],
    )
    for name, param in probe.named_parameters().items():
        key = f"param/{name}"
        if key not in blocks:
            raise CheckpointError("missing block", key)
        if blocks[key].shape != param.shape:
            raise CheckpointError(
                "shape mismatch",
                f"{key}: {blocks[key].shape} vs {param.shape}",
            )
        param.data = blocks[key].copy()
    probe.seed = metadata.get("seed")
    probe.held_out_accuracy = metadata.get("held_out_accuracy")
    probe.eval()
    return probe
