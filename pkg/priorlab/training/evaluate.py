"""Turn a trained bundle into one `MetricReport` row."""

from typing import Callable, Dict, Optional

import numpy as np
from loguru import logger

from priorlab.bundle import ModelBundle
from priorlab.dataio.dataset import Dataset
from priorlab.errors import PriorLabError
from priorlab.latentops import encode_latents, to_z0
from priorlab.metrics import (
    MetricReport,
    ProbeNet,
    desk_frechet,
    discriminator_accuracy,
    diversity,
    fit_gaussian,
    frechet_distance,
    latent_divergence_diagnostic,
    linear_separability,
    perceptual_path_length,
    posterior_latents,
    recon_mse,
    sample_prior_latents,
    standard_normal_stats,
)
from priorlab.schemas import TrainConfig


def _attempt(
    name: str, fn: Callable[[], float], failures: Dict[str, str]
) -> Optional[float]:
    try:
        value = float(fn())
    except (PriorLabError, ValueError, np.linalg.LinAlgError) as err:
        failures[name] = str(err)
        logger.warning(f"metric {name} failed: {err}")
        return None
    if not np.isfinite(value):
        failures[name] = f"non-finite value {value}"
        logger.warning(f"metric {name} is not finite ({value})")
        return None
    return value


def evaluate_bundle(
    bundle: ModelBundle,
    test_set: Dataset,
    probe: Optional[ProbeNet],
    cfg: TrainConfig,
    seed: Optional[int] = None,
    run_id: str = "run",
) -> MetricReport:
    """
    Compute every metric of the report on ``test_set``.

    Features come from ``probe`` when given, raw pixels otherwise. A
    metric that cannot be computed for this bundle (Z_0 metrics without
    a flow, for example) is left empty instead of failing the report.
    Separability on Z_0, the q(z) vs N(0, I) distance and, for the
    adversarial prior, discriminator accuracy go to ``extra``.
    """
    seed = cfg.seed if seed is None else seed
    m = cfg.metrics
    feature_fn = probe.features if probe is not None else None
    is_flow = bundle.prior.kind == "flow" and bundle.prior.flow is not None
    failures: Dict[str, str] = {}
    bundle.eval()

    def rng(stream: int) -> np.random.Generator:
        return np.random.default_rng([seed, stream])

    n_sep = min(m.separability_samples, len(test_set))
    sep_set = test_set.sample(n_sep, rng(0))
    sep_latents = encode_latents(bundle, sep_set.images)

    def separability_zt() -> float:
        if sep_set.labels is None:
            raise ValueError("test set has no labels")
        return linear_separability(sep_latents, sep_set.labels, seed)

    def separability_z0() -> float:
        if sep_set.labels is None:
            raise ValueError("test set has no labels")
        return linear_separability(
            to_z0(bundle, sep_latents), sep_set.labels, seed
        )

    q_latents = posterior_latents(
        bundle, test_set, m.latent_samples, rng(1)
    )

    report = MetricReport(
        run_id=run_id,
        beta=cfg.objective.beta,
        latent_dim=bundle.latent_dim,
        prior=bundle.prior.kind,
        seed=cfg.seed,
        frechet=_attempt(
            "frechet",
            lambda: desk_frechet(
                bundle,
                test_set.images,
                feature_fn,
                min(m.frechet_samples, len(test_set)),
                rng(2),
            ),
            failures,
        ),
        separability_bits=_attempt(
            "separability_bits", separability_zt, failures
        ),
        ppl_z0=(
            _attempt(
                "ppl_z0",
                lambda: perceptual_path_length(
                    bundle,
                    feature_fn,
                    "Z0",
                    m.ppl_pairs,
                    rng(3),
                    m.ppl_epsilon,
                    m.ppl_reject_outliers,
                ),
                failures,
            )
            if is_flow
            else None
        ),
        ppl_zT=_attempt(
            "ppl_zT",
            lambda: perceptual_path_length(
                bundle,
                feature_fn,
                "ZT",
                m.ppl_pairs,
                rng(4),
                m.ppl_epsilon,
                m.ppl_reject_outliers,
            ),
            failures,
        ),
        diversity=_attempt(
            "diversity",
            lambda: diversity(
                bundle, feature_fn, m.diversity_samples, rng(5)
            ),
            failures,
        ),
        recon_mse=_attempt(
            "recon_mse",
            lambda: recon_mse(
                bundle, test_set.sample(n_sep, rng(6)).images
            ),
            failures,
        ),
        latent_frechet=_attempt(
            "latent_frechet",
            lambda: latent_divergence_diagnostic(
                bundle, test_set, m.latent_samples, rng(7)
            ),
            failures,
        ),
    )

    extra: Dict[str, Optional[float]] = {
        "frechet_std_normal": _attempt(
            "frechet_std_normal",
            lambda: frechet_distance(
                fit_gaussian(q_latents),
                standard_normal_stats(bundle.latent_dim),
            ),
            failures,
        ),
    }
    if is_flow:
        extra["separability_bits_z0"] = _attempt(
            "separability_bits_z0", separability_z0, failures
        )
    if bundle.discriminator is not None:
        held_out = posterior_latents(
            bundle, test_set, m.latent_samples, rng(8)
        )
        extra["disc_accuracy"] = _attempt(
            "disc_accuracy",
            lambda: discriminator_accuracy(
                bundle,
                held_out,
                sample_prior_latents(bundle, rng(9), held_out.shape[0]),
            ),
            failures,
        )
    if probe is not None and probe.held_out_accuracy is not None:
        extra["probe_accuracy"] = probe.held_out_accuracy
    report.extra = {k: v for k, v in extra.items() if v is not None}
    if failures:
        logger.info(
            f"{run_id}: {len(failures)} metric(s) left empty: "
            + ", ".join(sorted(failures))
        )
    return report
