"""Finite-difference checks of the composed objectives on tiny networks."""

from typing import Callable, List, Sequence, Tuple

import numpy as np

from priorlab.bundle import ModelBundle, build_bundle
from priorlab.gradcore import Tensor
from priorlab.objectives.bilevel import (
    aae_disc,
    aae_lower,
    aae_upper,
    vae_lower,
    vae_upper,
)
from priorlab.objectives.likelihood import kl_std_normal
from priorlab.schemas import ModelConfig, ObjectiveConfig, TrainConfig

Case = Tuple[str, Callable[[], Tensor], Sequence[Tensor]]

DATA_DIM = 5
BATCH = 4


def tiny_config(seed: int, **objective) -> TrainConfig:
    return TrainConfig(
        seed=seed,
        batch_size=BATCH,
        model=ModelConfig(
            latent_dim=2,
            encoder_hidden=[6],
            decoder_hidden=[6],
            flow_depth=2,
            flow_width=4,
            prior_hidden=[4],
            disc_hidden=[4],
        ),
        objective=ObjectiveConfig(**objective),
    )


def _params(bundle: ModelBundle, *groups: str) -> List[Tensor]:
    found = bundle.param_groups()
    return [p for g in groups for p in found[g].values()]


def objective_cases(seed: int = 0) -> List[Case]:
    """One case per composed objective; noise is fixed per evaluation."""
    data_rng = np.random.default_rng(seed)
    x = Tensor(data_rng.uniform(size=(BATCH, DATA_DIM)))

    def fixed():
        return np.random.default_rng(seed + 1)

    cases: List[Case] = []

    cfg = tiny_config(seed, prior="standard_normal", beta=1.0)
    elbo = build_bundle(cfg, DATA_DIM)
    cases.append(
        (
            "elbo",
            lambda: vae_upper(x, elbo, cfg.objective, fixed()).total,
            _params(elbo, "upper"),
        )
    )

    mean = Tensor(data_rng.normal(size=(3, 2)), requires_grad=True)
    logvar = Tensor(data_rng.normal(size=(3, 2)), requires_grad=True)
    cases.append(
        (
            "kl_std_normal",
            lambda: kl_std_normal(mean, logvar).sum(),
            [mean, logvar],
        )
    )

    flow_cfg = tiny_config(
        seed, prior="flow", beta=0.5, gamma_mode="learned"
    )
    flow = build_bundle(flow_cfg, DATA_DIM)
    for p in _params(flow, "prior"):
        p.data = p.data + 0.1 * fixed().standard_normal(p.shape)
    cases.append(
        (
            "flow_upper",
            lambda: vae_upper(
                x, flow, flow_cfg.objective, fixed()
            ).total,
            _params(flow, "upper", "prior"),
        )
    )
    cases.append(
        (
            "flow_lower",
            lambda: vae_lower(x, flow, fixed()),
            _params(flow, "prior"),
        )
    )

    for nonsat in (False, True):
        aae_cfg = tiny_config(
            seed,
            prior="adversarial",
            beta=0.5,
            aae_nonsaturating=nonsat,
        )
        aae = build_bundle(aae_cfg, DATA_DIM)
        cases.append(
            (
                "aae_upper_nonsaturating" if nonsat else "aae_upper",
                lambda aae=aae, c=aae_cfg: aae_upper(
                    x, aae, c.objective, fixed()
                ).total,
                _params(aae, "upper"),
            )
        )
    cases.append(
        (
            "aae_lower",
            lambda: aae_lower(aae, BATCH, fixed()),
            _params(aae, "prior"),
        )
    )
    cases.append(
        (
            "aae_disc",
            lambda: aae_disc(x, aae, fixed()),
            _params(aae, "disc"),
        )
    )
    return cases
