from priorlab.objectives.bilevel import (
    ObjectiveValue,
    aae_disc,
    aae_lower,
    aae_upper,
    recon_loglik,
    vae_lower,
    vae_upper,
)
from priorlab.objectives.checks import objective_cases, tiny_config
from priorlab.objectives.likelihood import (
    diag_gaussian_logpdf,
    gaussian_recon_loglik,
    kl_std_normal,
    probe_feature_loglik,
)

__all__ = [
    "ObjectiveValue",
    "aae_disc",
    "aae_lower",
    "aae_upper",
    "diag_gaussian_logpdf",
    "gaussian_recon_loglik",
    "kl_std_normal",
    "objective_cases",
    "probe_feature_loglik",
    "recon_loglik",
    "tiny_config",
    "vae_lower",
    "vae_upper",
]
