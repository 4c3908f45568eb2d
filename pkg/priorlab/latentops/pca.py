from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from priorlab.bundle import ModelBundle
from priorlab.latentops.interpolate import decode_latents, encode_latents
from priorlab.metrics.linalg import jacobi_eigh


@dataclass(frozen=True)
class PCAFit:
    mean: np.ndarray
    components: np.ndarray
    variances: np.ndarray

    @property
    def k(self) -> int:
        return self.components.shape[0]


def pca_fit(latents: np.ndarray, k: Optional[int] = None) -> PCAFit:
    """
    Principal components of the latent cloud, largest variance first.

    Each component is signed so its largest-magnitude coordinate is
    positive.
    """
    latents = np.asarray(latents, dtype=np.float64)
    n, d = latents.shape
    k = d if k is None else k
    if k > d or k < 1:
        raise ValueError(f"k must be in [1, {d}], got {k}")
    if n <= d:
        raise ValueError(f"need more samples than dimensions ({n} <= {d})")
    mean = latents.mean(axis=0)
    centered = latents - mean
    cov = centered.T @ centered / (n - 1)
    values, vectors = jacobi_eigh(0.5 * (cov + cov.T))
    components = vectors[:, :k].T.copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return PCAFit(mean, components, np.clip(values[:k], 0.0, None))


def pca_project(fit: PCAFit, latents: np.ndarray) -> np.ndarray:
    return (np.atleast_2d(latents) - fit.mean) @ fit.components.T


def pca_reconstruct(fit: PCAFit, coords: np.ndarray) -> np.ndarray:
    return np.atleast_2d(coords) @ fit.components + fit.mean


def pca_traverse_latents(
    fit: PCAFit,
    z: np.ndarray,
    component: int,
    value_range: Tuple[float, float] = (-1.5, 1.5),
    steps: int = 8,
) -> np.ndarray:
    """
    Shift one PC coordinate of ``z`` across ``value_range``, measured in
    standard deviations of that component; the rest of ``z`` is kept.
    """
    if not 0 <= component < fit.k:
        raise IndexError(
            f"component {component} out of range for {fit.k} components"
        )
    z = np.asarray(z, dtype=np.float64).reshape(1, -1)
    offsets = np.linspace(value_range[0], value_range[1], steps)
    scale = np.sqrt(fit.variances[component])
    shift = offsets[:, None] * scale * fit.components[component][None, :]
    return z + shift


def pca_traverse(
    bundle: ModelBundle,
    x: np.ndarray,
    fit: PCAFit,
    component: int,
    value_range: Tuple[float, float] = (-1.5, 1.5),
    steps: int = 8,
) -> np.ndarray:
    z = encode_latents(bundle, np.asarray(x).reshape(1, -1))[0]
    path = pca_traverse_latents(fit, z, component, value_range, steps)
    return np.clip(decode_latents(bundle, path), 0.0, 1.0)
