import math

import numpy as np
import pytest

from priorlab.errors import MetricError
from priorlab.metrics import (
    conditional_entropy_bits,
    linear_separability,
    split_halves,
    standardize_halves,
)


def test_separable_classes_are_cheap():
    """Linearly separable clusters cost little more than the smoothing."""
    rng = np.random.default_rng(0)
    labels = np.repeat([0, 1], 100)
    latents = rng.normal(size=(200, 2)) * 0.1
    latents[:, 0] += np.where(labels == 1, 3.0, -3.0)
    assert linear_separability(latents, labels, seed=0) < 0.2


def test_random_labels_cost_a_bit():
    """Labels unrelated to the latents stay near log2(2) bits."""
    rng = np.random.default_rng(1)
    latents = rng.normal(size=(400, 3))
    labels = rng.integers(0, 2, size=400)
    assert linear_separability(latents, labels, seed=0) > 0.8


def test_entropy_bounds():
    """H(Y|X) lies in [0, log2 classes]."""
    rng = np.random.default_rng(2)
    predicted = rng.integers(0, 4, size=100)
    labels = rng.integers(0, 4, size=100)
    value = conditional_entropy_bits(predicted, labels, 4)
    assert 0.0 <= value <= math.log2(4)


def test_perfect_prediction_hits_floor():
    """Perfect predictions only pay for the add-one smoothing."""
    labels = np.repeat([0, 1], 500)
    value = conditional_entropy_bits(labels, labels, 2)
    assert value < 0.03


def test_separability_input_checks():
    """Too few samples, one class or mismatched labels are errors."""
    with pytest.raises(MetricError):
        linear_separability(np.zeros((10, 2)), np.arange(10) % 2)
    with pytest.raises(MetricError):
        linear_separability(np.zeros((30, 2)), np.zeros(30, int))
    with pytest.raises(MetricError):
        linear_separability(np.zeros((30, 2)), np.zeros(29, int))


def test_deterministic_given_seed():
    """The same seed reproduces the value exactly."""
    rng = np.random.default_rng(3)
    latents = rng.normal(size=(60, 2))
    labels = (latents[:, 0] > 0).astype(int)
    assert linear_separability(latents, labels, 5) == linear_separability(
        latents, labels, 5
    )


def test_standardization_uses_training_half():
    """Held-out latents do not move the training-half scaling."""
    rng = np.random.default_rng(4)
    latents = rng.normal(loc=2.0, scale=3.0, size=(40, 3))
    train, test = split_halves(40, seed=0)
    x_train, _ = standardize_halves(latents, train, test)
    np.testing.assert_allclose(x_train.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(x_train.std(axis=0), 1.0)

    shifted = latents.copy()
    shifted[test] *= 1e6
    moved_train, _ = standardize_halves(shifted, train, test)
    np.testing.assert_array_equal(moved_train, x_train)


def test_halves_partition_the_samples():
    train, test = split_halves(41, seed=2)
    assert len(train) == 20
    assert len(test) == 21
    assert sorted(np.concatenate([train, test])) == list(range(41))
