"""
Simultaneous gradient ascent on the bilevel objectives.

Each step evaluates F on a batch, then f (and g for the adversarial
prior) from the same batch, takes every gradient, and only then moves
any parameter. Extra prior or discriminator steps requested by the
config run afterwards on fresh samples.
"""

import copy
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
import psutil
from loguru import logger

from priorlab.bundle import ModelBundle
from priorlab.dataio.dataset import Dataset
from priorlab.errors import (
    NonFiniteError,
    PriorLabError,
    UnsupportedOperationError,
)
from priorlab.gradcore import Adam, Tensor, backward
from priorlab.nets import BatchNorm
from priorlab.objectives import (
    aae_disc,
    aae_lower,
    aae_upper,
    vae_lower,
    vae_upper,
)
from priorlab.priors import prior_sample
from priorlab.schemas import TrainConfig
from priorlab.training.checkpoint import save_checkpoint

PathLike = Union[str, Path]

EPOCH_COLUMNS = [
    "epoch",
    "step",
    "F",
    "recon",
    "reg",
    "f_lower",
    "g_disc",
    "lr",
    "wall_ms",
]
EPOCH_LOG = "epochs.csv"
PRIOR_LOG = "prior_epochs.csv"
MAX_CONSECUTIVE_ABORTS = 3


@dataclass
class StepReport:
    """Objective values of one step, taken before the update."""

    upper: Optional[float]
    recon: Optional[float]
    reg: Optional[float]
    lower: Optional[float] = None
    disc: Optional[float] = None
    beta: float = 0.0


@dataclass
class TrainResult:
    bundle: ModelBundle
    optimizers: Dict[str, Adam]
    log: pd.DataFrame
    epoch: int = 0
    global_step: int = 0
    aborted_steps: int = 0
    history: List[StepReport] = field(default_factory=list)


def build_optimizers(
    bundle: ModelBundle, cfg: TrainConfig
) -> Dict[str, Adam]:
    """One Adam per parameter group that the config trains."""
    lr = cfg.learning_rate
    optimizers = {"upper": Adam(bundle.upper_params(), lr=lr)}
    prior_params = bundle.prior_params()
    if bundle.prior.kind != "standard_normal" and prior_params:
        optimizers["prior"] = Adam(prior_params, lr=lr)
    if bundle.discriminator is not None:
        optimizers["disc"] = Adam(bundle.disc_params(), lr=lr)
    return optimizers


def beta_at(cfg: TrainConfig, epoch: int) -> float:
    """Beta for a 0-based epoch, ramped linearly during warm-up."""
    beta = cfg.objective.beta
    warmup = cfg.objective.beta_warmup_epochs
    if warmup > 0:
        return beta * min(1.0, (epoch + 1) / warmup)
    return beta


def _scalar(value: Tensor) -> float:
    return float(np.asarray(value.data).reshape(-1)[0])


def _finite(term: str, value: Tensor) -> float:
    scalar = _scalar(value)
    if not np.isfinite(scalar):
        raise NonFiniteError(term, f"value {scalar}")
    return scalar


def _grads(
    term: str, loss: Tensor, optimizer: Adam
) -> Dict[Tensor, np.ndarray]:
    grads = backward(loss, list(optimizer.params.values()))
    for name, param in optimizer.params.items():
        if not np.all(np.isfinite(grads[param])):
            raise NonFiniteError(term, f"gradient of {name}")
    return grads


def _lower_pass(
    x: Tensor,
    bundle: ModelBundle,
    optimizers: Dict[str, Adam],
    cfg: TrainConfig,
    latents: Optional[Tensor],
) -> Tuple[List[Tuple[Adam, dict]], Optional[float], Optional[float]]:
    """Gradients of f and g; nothing is updated here."""
    rng = bundle.rng
    kind = bundle.prior.kind
    updates: List[Tuple[Adam, dict]] = []
    lower_value = disc_value = None
    if kind == "flow" and "prior" in optimizers:
        lower = vae_lower(x, bundle, rng, latents)
        lower_value = _finite("f", lower)
        updates.append(
            (optimizers["prior"], _grads("f", lower, optimizers["prior"]))
        )
    elif kind == "adversarial":
        samples = prior_sample(bundle.prior, rng, x.shape[0])
        lower = aae_lower(bundle, x.shape[0], rng, samples=samples)
        lower_value = _finite("f", lower)
        updates.append(
            (optimizers["prior"], _grads("f", lower, optimizers["prior"]))
        )
        disc = aae_disc(
            x, bundle, rng, latents, prior_samples=samples.detach()
        )
        disc_value = _finite("g", disc)
        updates.append(
            (optimizers["disc"], _grads("g", disc, optimizers["disc"]))
        )
    return updates, lower_value, disc_value


def _extra_steps(
    x: Tensor,
    bundle: ModelBundle,
    optimizers: Dict[str, Adam],
    cfg: TrainConfig,
) -> None:
    rng = bundle.rng
    kind = bundle.prior.kind
    for _ in range(cfg.prior_steps - 1):
        if kind == "flow" and "prior" in optimizers:
            lower = vae_lower(x, bundle, rng)
        elif kind == "adversarial":
            lower = aae_lower(bundle, x.shape[0], rng)
        else:
            break
        _finite("f", lower)
        optimizers["prior"].step(_grads("f", lower, optimizers["prior"]))
    if kind != "adversarial":
        return
    for _ in range(cfg.disc_steps - 1):
        disc = aae_disc(x, bundle, rng)
        _finite("g", disc)
        optimizers["disc"].step(_grads("g", disc, optimizers["disc"]))


def _snapshot(bundle: ModelBundle, optimizers: Dict[str, Adam]):
    params = {p: p.data for p in bundle.parameters()}
    buffers = {k: np.copy(v) for k, v in bundle.named_buffers().items()}
    states = {k: copy.deepcopy(o.state) for k, o in optimizers.items()}
    return params, buffers, states


def _restore(
    bundle: ModelBundle, optimizers: Dict[str, Adam], snapshot
) -> None:
    params, buffers, states = snapshot
    for param, data in params.items():
        param.data = data
    for name, value in buffers.items():
        bundle.load_buffer(name, value)
    for key, state in states.items():
        optimizers[key].state = state


@contextmanager
def _atomic_step(
    bundle: ModelBundle,
    optimizers: Dict[str, Adam],
    cfg: TrainConfig,
) -> Iterator[None]:
    """Roll the whole step back when it raises NonFiniteError."""
    # every gradient is checked before the first update
    partial = (
        cfg.prior_steps > 1
        or cfg.disc_steps > 1
        or _has_batchnorm(bundle)
    )
    if not partial:
        yield
        return
    snapshot = _snapshot(bundle, optimizers)
    try:
        yield
    except NonFiniteError:
        _restore(bundle, optimizers, snapshot)
        raise


def train_step(
    bundle: ModelBundle,
    batch: np.ndarray,
    optimizers: Dict[str, Adam],
    cfg: TrainConfig,
    beta: Optional[float] = None,
) -> StepReport:
    """
    One simultaneous ascent step on F, f and g from the same batch.

    Raises:
        NonFiniteError: An objective or gradient is NaN or infinite.
            Parameters, running statistics and optimizer state are
            left as they were before the step, also when an extra
            prior or discriminator step fails.
    """
    if batch.shape[0] < 1:
        raise ValueError("empty batch")
    obj = cfg.objective
    beta = obj.beta if beta is None else beta
    x = Tensor(np.asarray(batch, dtype=np.float64))
    rng = bundle.rng
    with _atomic_step(bundle, optimizers, cfg):
        if bundle.prior.kind == "adversarial":
            upper = aae_upper(x, bundle, obj, rng, beta)
        else:
            upper = vae_upper(x, bundle, obj, rng, beta)
        upper_value = _finite("F", upper.total)
        updates = [
            (
                optimizers["upper"],
                _grads("F", upper.total, optimizers["upper"]),
            )
        ]
        latents = None if obj.fresh_lower_samples else upper.latents
        lower_updates, lower_value, disc_value = _lower_pass(
            x, bundle, optimizers, cfg, latents
        )
        updates.extend(lower_updates)

        for optimizer, grads in updates:
            optimizer.step(grads)
        _extra_steps(x, bundle, optimizers, cfg)

    return StepReport(
        upper=upper_value,
        recon=_scalar(upper.recon_term),
        reg=_scalar(upper.reg_term),
        lower=lower_value,
        disc=disc_value,
        beta=beta,
    )


def prior_step(
    bundle: ModelBundle,
    batch: np.ndarray,
    optimizers: Dict[str, Adam],
    cfg: TrainConfig,
) -> StepReport:
    """
    Lower-level step only, on fresh q(z|x) samples; the encoder and
    decoder are read but never updated.
    """
    x = Tensor(np.asarray(batch, dtype=np.float64))
    with _atomic_step(bundle, optimizers, cfg):
        updates, lower_value, disc_value = _lower_pass(
            x, bundle, optimizers, cfg, None
        )
        for optimizer, grads in updates:
            optimizer.step(grads)
        _extra_steps(x, bundle, optimizers, cfg)
    return StepReport(
        upper=None,
        recon=None,
        reg=None,
        lower=lower_value,
        disc=disc_value,
    )


def _has_batchnorm(bundle: ModelBundle) -> bool:
    return any(isinstance(m, BatchNorm) for m in bundle.modules())


def epoch_batches(
    n: int,
    batch_size: int,
    rng: np.random.Generator,
    drop_singleton: bool,
) -> List[np.ndarray]:
    """Seeded permutation cut into batches."""
    order = rng.permutation(n)
    batches = [
        order[start : start + batch_size]
        for start in range(0, n, batch_size)
    ]
    if drop_singleton and batches and batches[-1].shape[0] == 1:
        batches.pop()
    return batches


def _rss_mb() -> float:
    return psutil.Process(os.getpid()).memory_info().rss / 2**20


def _mean(values: List[Optional[float]]) -> Optional[float]:
    kept = [v for v in values if v is not None]
    return float(np.mean(kept)) if kept else None


def write_epoch_log(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, na_rep="", float_format="%.10g")
    return path


def _previous_log(out_dir: Optional[Path], name: str, start: int):
    if out_dir is None or start == 0 or not (out_dir / name).exists():
        return []
    frame = pd.read_csv(out_dir / name)
    frame = frame[frame["epoch"] <= start]
    return frame.astype(object).where(frame.notna(), None).to_dict(
        "records"
    )


def _run_epochs(
    bundle: ModelBundle,
    dataset: Dataset,
    cfg: TrainConfig,
    optimizers: Dict[str, Adam],
    epochs: int,
    out_dir: Optional[Path],
    log_name: str,
    start_epoch: int,
    global_step: int,
    joint: bool,
) -> TrainResult:
    rows = _previous_log(out_dir, log_name, start_epoch)
    drop = _has_batchnorm(bundle)
    aborted = consecutive = 0
    history: List[StepReport] = []
    phase = "train" if joint else "prior-post"
    bundle.train()

    for epoch in range(start_epoch, epochs):
        started = time.perf_counter()
        beta = beta_at(cfg, epoch)
        lr = optimizers["upper" if joint else _lower_group(optimizers)].lr
        reports: List[StepReport] = []
        batches = epoch_batches(
            len(dataset), cfg.batch_size, bundle.rng, drop
        )
        for index, idx in enumerate(batches):
            batch = dataset.images[idx]
            try:
                if joint:
                    report = train_step(
                        bundle, batch, optimizers, cfg, beta
                    )
                else:
                    report = prior_step(bundle, batch, optimizers, cfg)
            except NonFiniteError as err:
                aborted += 1
                consecutive += 1
                logger.warning(
                    f"{phase} epoch {epoch + 1} batch {index}: step "
                    f"aborted, {err}"
                )
                if consecutive >= MAX_CONSECUTIVE_ABORTS:
                    raise NonFiniteError(
                        err.term,
                        f"{consecutive} consecutive aborted steps, last "
                        f"at epoch {epoch + 1} batch {index}",
                    ) from err
                continue
            except PriorLabError as err:
                logger.error(
                    f"{phase} epoch {epoch + 1} batch {index}: {err}"
                )
                raise
            consecutive = 0
            global_step += 1
            reports.append(report)
        history.extend(reports)

        wall_ms = (time.perf_counter() - started) * 1000.0
        row = {
            "epoch": epoch + 1,
            "step": global_step,
            "F": _mean([r.upper for r in reports]),
            "recon": _mean([r.recon for r in reports]),
            "reg": _mean([r.reg for r in reports]),
            "f_lower": _mean([r.lower for r in reports]),
            "g_disc": _mean([r.disc for r in reports]),
            "lr": lr,
            "wall_ms": round(wall_ms, 3),
        }
        rows.append(row)
        logger.info(
            f"{phase} epoch {epoch + 1}/{epochs} "
            + " ".join(
                f"{k}={v:.5g}"
                for k, v in row.items()
                if k in ("F", "recon", "reg", "f_lower", "g_disc")
                and v is not None
            )
            + f" lr={lr:.3g} rss={_rss_mb():.0f}MB"
        )

        k = cfg.lr_halve_every
        if k and (epoch + 1) % k == 0:
            for optimizer in optimizers.values():
                optimizer.lr = optimizer.lr / 2.0
        if out_dir is not None:
            write_epoch_log(
                pd.DataFrame(rows, columns=EPOCH_COLUMNS),
                out_dir / log_name,
            )
            every = cfg.checkpoint_every
            if joint and every and (epoch + 1) % every == 0:
                save_checkpoint(
                    bundle,
                    out_dir / "checkpoints" / f"epoch_{epoch + 1:04d}.lfck",
                    optimizers,
                    epoch=epoch + 1,
                    global_step=global_step,
                )

    return TrainResult(
        bundle=bundle,
        optimizers=optimizers,
        log=pd.DataFrame(rows, columns=EPOCH_COLUMNS),
        epoch=max(epochs, start_epoch),
        global_step=global_step,
        aborted_steps=aborted,
        history=history,
    )


def _lower_group(optimizers: Dict[str, Adam]) -> str:
    return "prior" if "prior" in optimizers else "disc"


def train(
    bundle: ModelBundle,
    dataset: Dataset,
    cfg: TrainConfig,
    optimizers: Optional[Dict[str, Adam]] = None,
    out_dir: Optional[PathLike] = None,
    start_epoch: int = 0,
    global_step: int = 0,
) -> TrainResult:
    """
    Joint training for ``cfg.epochs`` epochs.

    With ``out_dir`` the epoch CSV is rewritten after every epoch and
    checkpoints land in ``out_dir/checkpoints``. ``start_epoch`` and
    ``global_step`` continue a run restored from a checkpoint.
    """
    optimizers = optimizers or build_optimizers(bundle, cfg)
    out = Path(out_dir) if out_dir is not None else None
    logger.info(
        f"training {bundle.prior.kind} prior, beta={cfg.objective.beta}, "
        f"d={bundle.latent_dim}, {len(dataset)} examples, "
        f"epochs {start_epoch}->{cfg.epochs}"
    )
    return _run_epochs(
        bundle,
        dataset,
        cfg,
        optimizers,
        cfg.epochs,
        out,
        EPOCH_LOG,
        start_epoch,
        global_step,
        joint=True,
    )


def train_prior_post(
    bundle: ModelBundle,
    dataset: Dataset,
    cfg: TrainConfig,
    epochs: Optional[int] = None,
    optimizers: Optional[Dict[str, Adam]] = None,
    out_dir: Optional[PathLike] = None,
) -> TrainResult:
    """
    Train the prior (and discriminator) alone on q(z) of a fixed
    encoder.

    Raises:
        UnsupportedOperationError: The prior is the fixed standard
            normal.
    """
    if bundle.prior.kind == "standard_normal":
        raise UnsupportedOperationError(
            "prior post-training needs a learned prior"
        )
    epochs = cfg.prior_post_epochs if epochs is None else epochs
    optimizers = optimizers or build_optimizers(bundle, cfg)
    lower_only = {k: v for k, v in optimizers.items() if k != "upper"}
    if not lower_only:
        raise UnsupportedOperationError("prior has no parameters")
    out = Path(out_dir) if out_dir is not None else None
    logger.info(f"prior post-training for {epochs} epochs")
    result = _run_epochs(
        bundle,
        dataset,
        cfg,
        lower_only,
        epochs,
        out,
        PRIOR_LOG,
        0,
        0,
        joint=False,
    )
    result.optimizers = optimizers
    return result
