from dataclasses import dataclass

import numpy as np
from loguru import logger

from priorlab.errors import MetricError
from priorlab.metrics.linalg import check_symmetric, sym_sqrt

FRECHET_CLAMP = -1e-6


@dataclass(frozen=True)
class GaussianStats:
    mean: np.ndarray
    covariance: np.ndarray
    n: int

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def fit_gaussian(features: np.ndarray) -> GaussianStats:
    """Sample mean and unbiased, symmetrized covariance of the rows."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise MetricError(
            f"features must be [n x k], got {features.shape}"
        )
    n, k = features.shape
    if n < 2:
        raise MetricError(f"need at least 2 samples, got {n}")
    if n < k + 1:
        logger.warning(
            f"Gaussian fit of {k} features from only {n} samples is "
            "rank deficient"
        )
    mean = features.mean(axis=0)
    centered = features - mean
    cov = centered.T @ centered / (n - 1)
    return GaussianStats(mean, 0.5 * (cov + cov.T), n)


def standard_normal_stats(d: int) -> GaussianStats:
    """Exact moments of N(0, I_d); ``n`` is 0 for analytic stats."""
    return GaussianStats(np.zeros(d), np.eye(d), 0)


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    """
    ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2).

    Raises:
        MetricError: dimension mismatch, non-symmetric covariance, or
            a negative result beyond roundoff.
    """
    if a.dim != b.dim:
        raise MetricError(
            f"dimension mismatch: {a.dim} vs {b.dim} features"
        )
    cov_a = check_symmetric(a.covariance)
    cov_b = check_symmetric(b.covariance)
    root_a = sym_sqrt(cov_a)
    inner = root_a @ cov_b @ root_a
    cross = np.trace(sym_sqrt(0.5 * (inner + inner.T)))
    diff = a.mean - b.mean
    value = float(
        diff @ diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * cross
    )
    if value < 0.0:
        if value < FRECHET_CLAMP:
            raise MetricError(
                f"Frechet distance {value:.3e} is negative; "
                "covariances are not PSD"
            )
        value = 0.0
    return value
