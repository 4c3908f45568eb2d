from typing import Optional

import numpy as np

from priorlab.bundle import ModelBundle
from priorlab.dataio.dataset import Dataset
from priorlab.errors import MetricError, UnsupportedOperationError
from priorlab.gradcore import Tensor, no_grad
from priorlab.latentops.interpolate import decode_latents, encode_latents
from priorlab.metrics.gaussian import fit_gaussian, frechet_distance
from priorlab.metrics.paths import (
    FeatureFn,
    apply_features,
    generate_images,
    sample_prior_latents,
)


def desk_frechet(
    bundle: ModelBundle,
    real_images: np.ndarray,
    feature_fn: Optional[FeatureFn],
    n: int,
    rng: np.random.Generator,
) -> float:
    """Frechet distance between probe features of real and generated."""
    real = np.asarray(real_images)[:n]
    fake = generate_images(bundle, rng, n)
    return frechet_distance(
        fit_gaussian(apply_features(feature_fn, real)),
        fit_gaussian(apply_features(feature_fn, fake)),
    )


def posterior_latents(
    bundle: ModelBundle,
    dataset: Dataset,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """One q(z|x) sample for each of up to n data points."""
    return encode_latents(bundle, dataset.sample(n, rng).images, rng)


def latent_frechet(q_latents: np.ndarray, p_latents: np.ndarray) -> float:
    q_latents = np.asarray(q_latents)
    p_latents = np.asarray(p_latents)
    if q_latents.shape[1] != p_latents.shape[1]:
        raise MetricError(
            f"latent width mismatch: {q_latents.shape[1]} vs "
            f"{p_latents.shape[1]}"
        )
    return frechet_distance(
        fit_gaussian(q_latents), fit_gaussian(p_latents)
    )


def latent_divergence_diagnostic(
    bundle: ModelBundle,
    dataset: Dataset,
    n: int,
    rng: np.random.Generator,
) -> float:
    """Frechet distance between Gaussian fits of q(z) and p_theta(z)."""
    q = posterior_latents(bundle, dataset, n, rng)
    p = sample_prior_latents(bundle, rng, q.shape[0])
    return latent_frechet(q, p)


def discriminator_accuracy(
    bundle: ModelBundle,
    q_latents: np.ndarray,
    p_latents: np.ndarray,
) -> float:
    """Balanced accuracy telling prior samples (real) from q(z) samples."""
    if bundle.discriminator is None:
        raise UnsupportedOperationError("bundle has no discriminator")
    with no_grad():
        real = bundle.discriminator(Tensor(p_latents)).data
        fake = bundle.discriminator(Tensor(q_latents)).data
    return float(0.5 * (np.mean(real > 0.0) + np.mean(fake <= 0.0)))


def recon_mse(
    bundle: ModelBundle, images: np.ndarray
) -> float:
    """Per-pixel squared error of reconstructions from posterior means."""
    images = np.asarray(images, dtype=np.float64)
    recon = decode_latents(bundle, encode_latents(bundle, images))
    return float(np.mean((images - recon) ** 2))
