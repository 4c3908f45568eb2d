"""Per-example log-densities and divergences shared by all objectives."""

import math
from typing import Optional

from priorlab.errors import ShapeError
from priorlab.gradcore import Tensor, no_grad
from priorlab.nets import LOGVAR_MAX, LOGVAR_MIN

LOG_2PI = math.log(2.0 * math.pi)


def _same_shape(kind: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(kind, [a.shape, b.shape])


def gaussian_recon_loglik(
    x: Tensor,
    x_hat: Tensor,
    gamma: float = 1.0,
    log_gamma: Optional[Tensor] = None,
) -> Tensor:
    """
    log N(x | x_hat, gamma I) per example.

    With ``log_gamma`` the variance is learned: gamma = exp(log_gamma)
    and the gradient reaches ``log_gamma``. At gamma = 1 the negative
    log-likelihood is the L2 cost plus a constant.
    """
    _same_shape("gaussian_recon_loglik", x, x_hat)
    dim = x.shape[1]
    sq = (x - x_hat).square().sum(axis=1)
    if log_gamma is None:
        if gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {gamma}")
        const = -0.5 * dim * (LOG_2PI + math.log(gamma))
        return sq * (-0.5 / gamma) + const
    precision = (-log_gamma).exp()
    const = (log_gamma + LOG_2PI) * (-0.5 * dim)
    return sq * precision * -0.5 + const


def probe_feature_loglik(x: Tensor, x_hat: Tensor, probe) -> Tensor:
    """
    Negative squared distance between the probe's hidden activations.

    Both hidden layers contribute. The probe's weights are frozen; the
    gradient flows into ``x_hat`` only.
    """
    _same_shape("probe_feature_loglik", x, x_hat)
    with no_grad():
        targets = probe.hidden_features(x)
    outputs = probe.hidden_features(x_hat, frozen=True)
    total = None
    for target, output in zip(targets, outputs):
        term = (output - target.detach()).square().sum(axis=1)
        total = term if total is None else total + term
    return -total


def diag_gaussian_logpdf(
    z: Tensor, mean: Tensor, logvar: Tensor
) -> Tensor:
    _same_shape("diag_gaussian_logpdf", z, mean)
    _same_shape("diag_gaussian_logpdf", mean, logvar)
    logvar = logvar.clip(LOGVAR_MIN, LOGVAR_MAX)
    sq = (z - mean).square() * (-logvar).exp()
    per_dim = logvar * -0.5 - sq * 0.5 - 0.5 * LOG_2PI
    return per_dim.sum(axis=1)


def kl_std_normal(mean: Tensor, logvar: Tensor) -> Tensor:
    """KL(N(mean, diag exp(logvar)) || N(0, I)) per example."""
    _same_shape("kl_std_normal", mean, logvar)
    inner = logvar.exp() + mean.square() - 1.0 - logvar
    return inner.sum(axis=1) * 0.5
