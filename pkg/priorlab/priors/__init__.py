from priorlab.priors.prior import (
    PRIOR_KINDS,
    Discriminator,
    PriorHandle,
    PriorKind,
    build_generator,
    build_prior,
    discriminate,
    prior_log_prob,
    prior_sample,
)

__all__ = [
    "Discriminator",
    "PRIOR_KINDS",
    "PriorHandle",
    "PriorKind",
    "build_generator",
    "build_prior",
    "discriminate",
    "prior_log_prob",
    "prior_sample",
]
