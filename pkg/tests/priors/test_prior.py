import math

import numpy as np
import pytest

from priorlab.errors import ShapeError, UnsupportedOperationError
from priorlab.gradcore import Tensor, backward
from priorlab.priors import (
    Discriminator,
    PriorHandle,
    build_prior,
    discriminate,
    prior_log_prob,
    prior_sample,
)


@pytest.fixture
def rng():
    return np.random.default_rng(5)


def test_standard_normal_density_at_origin(rng):
    """log N(0; 0, I_d) = -d/2 log(2 pi)."""
    prior = build_prior("standard_normal", 4, rng)
    lp = prior_log_prob(prior, Tensor(np.zeros((1, 4))))
    assert lp.item() == pytest.approx(-2.0 * math.log(2 * math.pi))


def test_flow_prior_density_uses_logdet(rng):
    """At init the flow density adds the coupling log-scales."""
    prior = build_prior("flow", 2, rng, flow_depth=1, flow_width=4)
    z = np.zeros((1, 2))
    lp = prior_log_prob(prior, Tensor(z)).item()
    expected = -math.log(2 * math.pi) + math.log(0.8807970779778823)
    assert lp == pytest.approx(expected)


def test_adversarial_prior_has_no_density(rng):
    """Asking the adversarial prior for a density is unsupported."""
    prior = build_prior(
        "adversarial", 3, rng, generator_hidden=(8,)
    )
    with pytest.raises(UnsupportedOperationError):
        prior_log_prob(prior, Tensor(np.zeros((2, 3))))


def test_adversarial_samples_reach_generator(rng):
    """Generator samples carry gradients to the generator weights."""
    prior = build_prior(
        "adversarial", 3, rng, generator_hidden=(8, 8)
    )
    z = prior_sample(prior, rng, 6)
    assert z.shape == (6, 3)
    params = prior.parameters()
    grads = backward(z.square().sum(), params)
    assert any(not np.allclose(g, 0.0) for g in grads.values())


def test_flow_and_normal_samples_are_constants(rng):
    """Flow and standard-normal samples carry no graph."""
    for kind in ("standard_normal", "flow"):
        prior = build_prior(kind, 2, rng, flow_depth=2, flow_width=4)
        z = prior_sample(prior, rng, 5)
        assert z.shape == (5, 2)
        assert not z.requires_grad


def test_sample_needs_positive_n(rng):
    """n = 0 is rejected."""
    prior = build_prior("standard_normal", 2, rng)
    with pytest.raises(ValueError):
        prior_sample(prior, rng, 0)


def test_handle_consistency_checks():
    """A flow handle needs a flow and an unknown kind is rejected."""
    with pytest.raises(ValueError):
        PriorHandle("flow", 2)
    with pytest.raises(ValueError):
        PriorHandle("mixture", 2)


def test_log_prob_width_mismatch(rng):
    """Latents must have the prior's width."""
    prior = build_prior("standard_normal", 3, rng)
    with pytest.raises(ShapeError):
        prior_log_prob(prior, Tensor(np.zeros((2, 2))))


def test_discriminator_logit_per_example(rng):
    """The discriminator returns one logit per row."""
    disc = Discriminator(3, [8, 8], rng)
    logits = discriminate(disc, Tensor(rng.normal(size=(4, 3))))
    assert logits.shape == (4,)
    with pytest.raises(ShapeError):
        discriminate(disc, Tensor(np.zeros((4, 2))))


def test_standard_normal_sample_moments(rng):
    """Standard-normal samples have zero mean and identity covariance."""
    prior = build_prior("standard_normal", 3, rng)
    z = prior_sample(prior, rng, 200_000).data
    assert np.allclose(z.mean(axis=0), 0.0, atol=0.01)
    assert np.allclose(np.cov(z, rowvar=False), np.eye(3), atol=0.02)
