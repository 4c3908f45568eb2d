"""
Seeded low-dimensional structures embedded in data space.

Points are drawn in the plane, lifted into ``data_dim`` dimensions by a
fixed random orthogonal map, perturbed by isotropic noise and finally
mapped into [0, 1] by an affine map (clipped).
"""

import math
from dataclasses import dataclass
from typing import Literal, Tuple

import numpy as np

from priorlab.dataio.dataset import Dataset

SyntheticKind = Literal["gaussian_mixture", "two_moons_embedded"]


@dataclass(frozen=True)
class SyntheticSpec:
    kind: SyntheticKind = "gaussian_mixture"
    modes: int = 2
    data_dim: int = 16
    noise: float = 0.05
    separation: float = 10.0
    n: int = 2000
    seed: int = 0

    def __post_init__(self):
        if self.modes < 1:
            raise ValueError(f"modes must be >= 1, got {self.modes}")
        if self.data_dim < 2:
            raise ValueError("data_dim must be >= 2")
        if self.noise <= 0:
            raise ValueError("noise must be > 0")
        if self.kind == "two_moons_embedded" and self.modes != 2:
            raise ValueError("two_moons_embedded has exactly 2 modes")


def _plane_centers(spec: SyntheticSpec) -> np.ndarray:
    """Mode centers on a circle, adjacent chord = separation * noise."""
    if spec.modes == 1:
        return np.zeros((1, 2))
    radius = spec.separation * spec.noise / (
        2.0 * math.sin(math.pi / spec.modes)
    )
    angles = 2.0 * math.pi * np.arange(spec.modes) / spec.modes
    return radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def _embedding(spec: SyntheticSpec) -> Tuple[np.ndarray, float]:
    rng = np.random.default_rng([spec.seed, 1])
    q, r = np.linalg.qr(rng.standard_normal((spec.data_dim, 2)))
    q = q * np.sign(np.diag(r))
    extent = spec.separation * spec.noise + 4.0 * spec.noise
    return q, 0.45 / extent


def synthetic_centers(spec: SyntheticSpec) -> np.ndarray:
    """Per-mode means in data space (gaussian_mixture, before clipping)."""
    q, scale = _embedding(spec)
    return 0.5 + scale * (_plane_centers(spec) @ q.T)


def _moons(
    rng: np.random.Generator, labels: np.ndarray, size: float
) -> np.ndarray:
    t = rng.uniform(0.0, math.pi, size=labels.shape[0])
    upper = np.stack([np.cos(t), np.sin(t)], axis=1)
    lower = np.stack([1.0 - np.cos(t), 0.5 - np.sin(t)], axis=1)
    points = np.where(labels[:, None] == 0, upper, lower)
    return (points - np.array([0.5, 0.25])) * size


def synth_generate(
    spec: SyntheticSpec, split: str = "train"
) -> Dataset:
    rng = np.random.default_rng(
        [spec.seed, 0 if split == "train" else 2]
    )
    labels = rng.integers(0, spec.modes, size=spec.n)
    if spec.kind == "gaussian_mixture":
        plane = _plane_centers(spec)[labels]
    else:
        plane = _moons(rng, labels, spec.separation * spec.noise / 2.0)
    q, scale = _embedding(spec)
    noise = spec.noise * rng.standard_normal((spec.n, spec.data_dim))
    embedded = plane @ q.T + noise
    images = np.clip(0.5 + scale * embedded, 0.0, 1.0)
    side = int(math.isqrt(spec.data_dim))
    shape = (
        (side, side)
        if side * side == spec.data_dim
        else (1, spec.data_dim)
    )
    return Dataset(images, labels, split, f"synthetic:{spec.kind}", shape)
