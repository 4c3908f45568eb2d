"""
Upper and lower objectives of the bilevel training problem.

The upper objective F trains the encoder and decoder; the lower
objective f trains the prior and, for the adversarial prior, g trains
the discriminator. All three are maximized. Every value is a batch mean
so beta does not depend on the batch size.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from priorlab.bundle import ModelBundle
from priorlab.errors import ConfigError, UnsupportedOperationError
from priorlab.gradcore import Tensor, no_grad
from priorlab.nets import reparameterize
from priorlab.objectives.likelihood import (
    diag_gaussian_logpdf,
    gaussian_recon_loglik,
    probe_feature_loglik,
)
from priorlab.priors import prior_log_prob, prior_sample
from priorlab.schemas import ObjectiveConfig


@dataclass
class ObjectiveValue:
    """
    A scalar objective with its decomposition total = recon - beta * reg.

    ``latents`` are the detached q(z|x) samples of the pass, reused by
    the lower objectives.
    """

    total: Tensor
    recon_term: Tensor
    reg_term: Tensor
    beta: float
    per_example: Dict[str, np.ndarray] = field(default_factory=dict)
    latents: Optional[Tensor] = None


def recon_loglik(
    x: Tensor, x_hat: Tensor, bundle: ModelBundle, cfg: ObjectiveConfig
) -> Tensor:
    if cfg.recon_loss == "probe_features":
        if bundle.feature_probe is None:
            raise ConfigError(
                "recon_loss = probe_features needs a trained probe",
                key="recon_loss",
            )
        return probe_feature_loglik(x, x_hat, bundle.feature_probe)
    if cfg.gamma_mode == "learned":
        return gaussian_recon_loglik(
            x, x_hat, log_gamma=bundle.decoder.log_gamma
        )
    return gaussian_recon_loglik(x, x_hat, gamma=cfg.gamma)


def _as_input(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _finish(
    recon_parts: List[Tensor],
    reg_parts: List[Tensor],
    beta: float,
    latents: List[np.ndarray],
) -> ObjectiveValue:
    k = float(len(recon_parts))
    recon_per = recon_parts[0]
    reg_per = reg_parts[0]
    for r, g in zip(recon_parts[1:], reg_parts[1:]):
        recon_per = recon_per + r
        reg_per = reg_per + g
    if k > 1:
        recon_per = recon_per * (1.0 / k)
        reg_per = reg_per * (1.0 / k)
    recon_term = recon_per.mean()
    reg_term = reg_per.mean()
    total = recon_term - reg_term * beta if beta > 0 else recon_term
    return ObjectiveValue(
        total=total,
        recon_term=recon_term,
        reg_term=reg_term,
        beta=beta,
        per_example={
            "recon": recon_per.data.copy(),
            "reg": reg_per.data.copy(),
        },
        latents=Tensor(np.concatenate(latents, axis=0)),
    )


def vae_upper(
    x,
    bundle: ModelBundle,
    cfg: ObjectiveConfig,
    rng: np.random.Generator,
    beta: Optional[float] = None,
) -> ObjectiveValue:
    """
    F = E_q[log p(x|z)] - beta * E_q[log q(z|x) - log p(z)].

    The regularizer is the single-sample log-density difference at the
    reparameterized z, averaged over ``mc_samples``. At beta = 0 it is
    still reported but computed off the graph, so F reaches neither the
    prior nor the encoder through it.
    """
    if bundle.prior.kind == "adversarial":
        raise UnsupportedOperationError(
            "vae_upper needs a density prior; use aae_upper"
        )
    beta = cfg.beta if beta is None else beta
    x = _as_input(x)
    mean, logvar = bundle.encoder(x)
    recon_parts, reg_parts, latents = [], [], []
    for _ in range(cfg.mc_samples):
        z = reparameterize(mean, logvar, rng)
        x_hat = bundle.decoder(z)
        recon_parts.append(recon_loglik(x, x_hat, bundle, cfg))
        if beta > 0:
            reg = diag_gaussian_logpdf(z, mean, logvar) - prior_log_prob(
                bundle.prior, z
            )
        else:
            with no_grad():
                reg = diag_gaussian_logpdf(
                    z.detach(), mean.detach(), logvar.detach()
                ) - prior_log_prob(bundle.prior, z.detach())
        reg_parts.append(reg)
        latents.append(z.data)
    return _finish(recon_parts, reg_parts, beta, latents)


def _posterior_samples(
    x, bundle: ModelBundle, rng: np.random.Generator
) -> Tensor:
    with no_grad():
        mean, logvar = bundle.encoder(_as_input(x))
        return reparameterize(mean, logvar, rng).detach()


def vae_lower(
    x,
    bundle: ModelBundle,
    rng: Optional[np.random.Generator] = None,
    latents: Optional[Tensor] = None,
) -> Tensor:
    """
    f = E_{z ~ q(z|x)}[log p_theta(z)] with z held constant.

    Reuses ``latents`` from the upper pass when given, otherwise draws
    fresh posterior samples.
    """
    if bundle.prior.kind != "flow":
        raise UnsupportedOperationError(
            f"vae_lower needs a flow prior, got {bundle.prior.kind}"
        )
    if latents is None:
        if rng is None:
            raise ValueError("fresh posterior samples need an rng")
        latents = _posterior_samples(x, bundle, rng)
    return prior_log_prob(bundle.prior, latents.detach()).mean()


def _require_discriminator(bundle: ModelBundle) -> None:
    if bundle.prior.kind != "adversarial":
        raise UnsupportedOperationError(
            "adversarial objectives need an adversarial prior"
        )
    if bundle.discriminator is None:
        raise UnsupportedOperationError(
            "adversarial objectives need a discriminator"
        )


def aae_upper(
    x,
    bundle: ModelBundle,
    cfg: ObjectiveConfig,
    rng: np.random.Generator,
    beta: Optional[float] = None,
) -> ObjectiveValue:
    """
    F = E_q[log p(x|z)] - beta * E_q[log(1 - D(z))].

    With ``aae_nonsaturating`` the penalty becomes -log D(z). The
    discriminator is frozen: gradients reach the encoder and decoder.
    """
    _require_discriminator(bundle)
    beta = cfg.beta if beta is None else beta
    x = _as_input(x)
    disc = bundle.discriminator
    mean, logvar = bundle.encoder(x)
    recon_parts, reg_parts, latents = [], [], []
    for _ in range(cfg.mc_samples):
        z = reparameterize(mean, logvar, rng)
        x_hat = bundle.decoder(z)
        recon_parts.append(recon_loglik(x, x_hat, bundle, cfg))
        source = z if beta > 0 else z.detach()
        logits = disc(source, frozen=True)
        if cfg.aae_nonsaturating:
            # -log D = softplus(-logit)
            reg = (-logits).softplus()
        else:
            # log(1 - D) = -softplus(logit)
            reg = -logits.softplus()
        reg_parts.append(reg if beta > 0 else reg.detach())
        latents.append(z.data)
    return _finish(recon_parts, reg_parts, beta, latents)


def aae_lower(
    bundle: ModelBundle,
    n: int,
    rng: np.random.Generator,
    samples: Optional[Tensor] = None,
) -> Tensor:
    """
    f = E_{z ~ p_theta}[log D(z)], the non-saturating generator form.

    Ascent on f lowers -log D. Pass ``samples`` to reuse generator
    output that is still attached to theta.
    """
    _require_discriminator(bundle)
    if samples is None:
        samples = prior_sample(bundle.prior, rng, n)
    logits = bundle.discriminator(samples, frozen=True)
    return logits.log_sigmoid().mean()


def aae_disc(
    x,
    bundle: ModelBundle,
    rng: np.random.Generator,
    latents: Optional[Tensor] = None,
    prior_samples: Optional[Tensor] = None,
) -> Tensor:
    """
    g = E_{p_theta}[log D(z)] + E_{q}[log(1 - D(z))].

    Prior samples are labelled real. Both sources are detached so the
    gradient reaches the discriminator only.
    """
    _require_discriminator(bundle)
    if latents is None:
        latents = _posterior_samples(x, bundle, rng)
    if prior_samples is None:
        with no_grad():
            prior_samples = prior_sample(
                bundle.prior, rng, latents.shape[0]
            )
    disc = bundle.discriminator
    real = disc(prior_samples.detach()).log_sigmoid().mean()
    fake = (-disc(latents.detach())).log_sigmoid().mean()
    return real + fake
