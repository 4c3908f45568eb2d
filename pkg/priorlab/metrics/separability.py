from typing import Tuple

import numpy as np

from priorlab.errors import MetricError

LOGISTIC_ITERATIONS = 500
LOGISTIC_LR = 0.1


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def fit_logistic(
    x: np.ndarray,
    labels: np.ndarray,
    classes: int,
    iterations: int = LOGISTIC_ITERATIONS,
    lr: float = LOGISTIC_LR,
):
    """Multinomial logistic regression by full-batch gradient descent."""
    n, d = x.shape
    weights = np.zeros((d, classes))
    bias = np.zeros(classes)
    onehot = np.eye(classes)[labels]
    for _ in range(iterations):
        residual = _softmax(x @ weights + bias) - onehot
        weights -= lr * (x.T @ residual) / n
        bias -= lr * residual.mean(axis=0)
    return weights, bias


def conditional_entropy_bits(
    predicted: np.ndarray, labels: np.ndarray, classes: int
) -> float:
    """H(Y|X) in bits from add-one smoothed joint counts."""
    counts = np.ones((classes, classes))
    np.add.at(counts, (predicted, labels), 1.0)
    joint = counts / counts.sum()
    marginal = joint.sum(axis=1, keepdims=True)
    return float(-np.sum(joint * np.log2(joint / marginal)))


def split_halves(n: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    order = np.random.default_rng(seed).permutation(n)
    half = n // 2
    return order[:half], order[half:]


def standardize_halves(
    latents: np.ndarray, train: np.ndarray, test: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Scale both halves with the training half's mean and std."""
    fit = latents[train]
    mean = fit.mean(axis=0)
    std = fit.std(axis=0)
    std = np.where(std > 1e-12, std, 1.0)
    return (fit - mean) / std, (latents[test] - mean) / std


def linear_separability(
    latents: np.ndarray, labels: np.ndarray, seed: int = 0
) -> float:
    """
    Conditional entropy of true labels given a linear classifier's
    predictions, in bits.

    The classifier is trained on a seeded half of the latents,
    standardized with that half's statistics, and evaluated on the
    other half. Lower means the classes are easier to separate by
    hyperplanes.
    """
    latents = np.asarray(latents, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n = latents.shape[0]
    if latents.ndim != 2 or labels.shape != (n,):
        raise MetricError(
            f"latents {latents.shape} and labels {labels.shape} "
            "do not pair up"
        )
    if n < 20:
        raise MetricError(f"need at least 20 samples, got {n}")
    if np.unique(labels).size < 2:
        raise MetricError("separability needs at least 2 classes")
    classes = int(labels.max()) + 1

    train, test = split_halves(n, seed)
    x_train, x_test = standardize_halves(latents, train, test)
    weights, bias = fit_logistic(x_train, labels[train], classes)
    predicted = np.argmax(x_test @ weights + bias, axis=1)
    return conditional_entropy_bits(predicted, labels[test], classes)
