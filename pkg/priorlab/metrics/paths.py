"""Perceptual path length and sample diversity over generated images."""

from typing import Callable, Optional

import numpy as np

from priorlab.bundle import ModelBundle
from priorlab.errors import MetricError, UnsupportedOperationError
from priorlab.gradcore import no_grad
from priorlab.latentops.interpolate import (
    Space,
    decode_latents,
    from_z0,
    lerp,
    slerp,
)
from priorlab.priors import prior_sample

FeatureFn = Callable[[np.ndarray], np.ndarray]


def apply_features(feature_fn: Optional[FeatureFn], images: np.ndarray):
    return images if feature_fn is None else feature_fn(images)


def sample_prior_latents(
    bundle: ModelBundle, rng: np.random.Generator, n: int
) -> np.ndarray:
    """Z_T draws from the prior with batchnorm in eval mode."""
    was_training = bundle.prior.training
    bundle.prior.eval()
    try:
        with no_grad():
            return prior_sample(bundle.prior, rng, n).data
    finally:
        if was_training:
            bundle.prior.train()


def generate_images(
    bundle: ModelBundle, rng: np.random.Generator, n: int
) -> np.ndarray:
    return decode_latents(bundle, sample_prior_latents(bundle, rng, n))


def perceptual_path_length(
    bundle: ModelBundle,
    feature_fn: Optional[FeatureFn],
    space: Space,
    n_pairs: int,
    rng: np.random.Generator,
    epsilon: float = 1e-4,
    reject_outliers: bool = False,
) -> float:
    """
    Mean of ||phi(G(z(t))) - phi(G(z(t + eps)))||^2 / eps^2.

    Z_T endpoints are prior samples joined by lerp; Z_0 endpoints are
    base-normal draws joined by slerp and mapped back through the
    inverse flow. With ``reject_outliers`` only distances between the
    1st and 99th percentiles are averaged.
    """
    if epsilon <= 0:
        raise MetricError(f"epsilon must be > 0, got {epsilon}")
    if n_pairs < 1:
        raise MetricError(f"n_pairs must be >= 1, got {n_pairs}")
    d = bundle.latent_dim
    t = rng.uniform(0.0, 1.0, size=(n_pairs, 1))
    if space == "Z0":
        if bundle.prior.kind != "flow":
            raise UnsupportedOperationError(
                "path length in Z0 needs a flow prior"
            )
        a = rng.standard_normal((n_pairs, d))
        b = rng.standard_normal((n_pairs, d))
        lo = from_z0(bundle, slerp(a, b, t))
        hi = from_z0(bundle, slerp(a, b, t + epsilon))
    else:
        a = sample_prior_latents(bundle, rng, n_pairs)
        b = sample_prior_latents(bundle, rng, n_pairs)
        lo, hi = lerp(a, b, t), lerp(a, b, t + epsilon)
    feats_lo = apply_features(feature_fn, decode_latents(bundle, lo))
    feats_hi = apply_features(feature_fn, decode_latents(bundle, hi))
    dist = np.sum((feats_lo - feats_hi) ** 2, axis=1) / epsilon**2
    if reject_outliers:
        low = np.percentile(dist, 1, method="lower")
        high = np.percentile(dist, 99, method="higher")
        dist = dist[(dist >= low) & (dist <= high)]
    return float(np.mean(dist))


def mean_pair_distance(
    features: np.ndarray, rng: np.random.Generator
) -> float:
    """Mean L2 distance over floor(n/2) disjoint random pairs."""
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[0]
    if n < 2:
        raise MetricError(f"diversity needs n >= 2, got {n}")
    order = rng.permutation(n)
    half = n // 2
    first, second = order[:half], order[half : 2 * half]
    return float(
        np.mean(
            np.linalg.norm(features[first] - features[second], axis=1)
        )
    )


def diversity(
    bundle: ModelBundle,
    feature_fn: Optional[FeatureFn],
    n: int,
    rng: np.random.Generator,
) -> float:
    if n < 2:
        raise MetricError(f"diversity needs n >= 2, got {n}")
    images = generate_images(bundle, rng, n)
    return mean_pair_distance(apply_features(feature_fn, images), rng)
