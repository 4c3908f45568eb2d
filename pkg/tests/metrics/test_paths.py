import numpy as np
import pytest

from priorlab.bundle import build_bundle
from priorlab.errors import MetricError, UnsupportedOperationError
from priorlab.metrics import (
    diversity,
    generate_images,
    mean_pair_distance,
    perceptual_path_length,
    sample_prior_latents,
)

DATA_DIM = 16


@pytest.fixture
def linear_bundle(tiny_config):
    """Standard-normal prior and a single linear decoder layer."""
    cfg = tiny_config(
        "prior=standard_normal",
        "decoder_hidden=",
        "decoder_output=identity",
    )
    return build_bundle(cfg, DATA_DIM)


def _constant_decoder(bundle):
    for layer in bundle.decoder.layers:
        layer.weights.data = np.zeros_like(layer.weights.data)
    return bundle


def test_ppl_linear_decoder_closed_form(linear_bundle):
    """With G(z) = zA + c and raw pixels, PPL is mean ||(b - a)A||^2."""
    n = 50
    rng = np.random.default_rng(5)
    _ = rng.uniform(0.0, 1.0, size=(n, 1))
    a = rng.standard_normal((n, 2))
    b = rng.standard_normal((n, 2))
    weights = linear_bundle.decoder.layers[0].weights.data
    expected = np.mean(np.sum(((b - a) @ weights) ** 2, axis=1))
    value = perceptual_path_length(
        linear_bundle, None, "ZT", n, np.random.default_rng(5)
    )
    assert value == pytest.approx(expected, rel=1e-5)


def test_ppl_constant_decoder_is_zero(linear_bundle):
    """A decoder that ignores z has zero path length."""
    bundle = _constant_decoder(linear_bundle)
    value = perceptual_path_length(
        bundle, None, "ZT", 20, np.random.default_rng(0)
    )
    assert value == pytest.approx(0.0, abs=1e-12)


def test_ppl_rejects_bad_arguments(linear_bundle):
    """epsilon must be positive and Z0 needs a flow."""
    rng = np.random.default_rng(0)
    with pytest.raises(MetricError):
        perceptual_path_length(linear_bundle, None, "ZT", 4, rng, 0.0)
    with pytest.raises(UnsupportedOperationError):
        perceptual_path_length(linear_bundle, None, "Z0", 4, rng)


def test_ppl_in_z0_with_flow(tiny_config):
    """A flow bundle yields finite path lengths in both spaces."""
    bundle = build_bundle(tiny_config(), DATA_DIM)
    rng = np.random.default_rng(1)
    for space in ("Z0", "ZT"):
        value = perceptual_path_length(bundle, None, space, 10, rng)
        assert np.isfinite(value)
        assert value >= 0.0


def test_ppl_outlier_rejection_trims(linear_bundle):
    """Percentile trimming keeps the value within the raw range."""
    rng_args = dict(n_pairs=200, space="ZT", feature_fn=None)
    raw = perceptual_path_length(
        linear_bundle, rng=np.random.default_rng(2), **rng_args
    )
    trimmed = perceptual_path_length(
        linear_bundle,
        rng=np.random.default_rng(2),
        reject_outliers=True,
        **rng_args,
    )
    assert trimmed <= raw * 1.5
    assert trimmed > 0.0


def test_mean_pair_distance_of_standard_normals():
    """Pairs of N(0, I_64) points sit about sqrt(128) apart."""
    rng = np.random.default_rng(0)
    features = rng.standard_normal((20000, 64))
    value = mean_pair_distance(features, rng)
    assert value == pytest.approx(np.sqrt(128.0), rel=0.05)


def test_identical_samples_have_no_diversity(linear_bundle):
    """A constant decoder produces zero diversity."""
    bundle = _constant_decoder(linear_bundle)
    assert diversity(
        bundle, None, 10, np.random.default_rng(0)
    ) == pytest.approx(0.0)


def test_diversity_needs_two_samples(linear_bundle):
    """n < 2 is an error."""
    with pytest.raises(MetricError):
        diversity(linear_bundle, None, 1, np.random.default_rng(0))


def test_prior_sampling_restores_mode(tiny_config):
    """Sampling in eval mode leaves the prior's training flag alone."""
    bundle = build_bundle(tiny_config("prior=adversarial"), DATA_DIM)
    bundle.train()
    z = sample_prior_latents(bundle, np.random.default_rng(0), 5)
    assert z.shape == (5, 2)
    assert bundle.prior.training
    images = generate_images(bundle, np.random.default_rng(0), 3)
    assert images.shape == (3, DATA_DIM)
