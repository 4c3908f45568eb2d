"""
Grid sweeps over beta, latent dimension and seed.

Every entry owns its bundle, optimizers and random streams, so entries
may run in worker processes; rows are merged in entry order after all
workers finish.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Sequence, Union

from loguru import logger

from priorlab.bundle import build_bundle
from priorlab.dataio.config import apply_overrides, dump_config
from priorlab.dataio.dataset import Dataset
from priorlab.dataio.loader import load_dataset
from priorlab.metrics import (
    MetricReport,
    ProbeNet,
    load_probe,
    save_probe,
    train_probe,
    write_reports,
)
from priorlab.schemas import DataConfig, TrainConfig
from priorlab.training.checkpoint import save_checkpoint
from priorlab.training.evaluate import evaluate_bundle
from priorlab.training.trainer import train, train_prior_post

PathLike = Union[str, Path]

# train and test split of the last two data settings
DATASET_CACHE_SIZE = 4


@dataclass(frozen=True)
class SweepEntry:
    run_id: str
    config: TrainConfig


def _fmt(value: float) -> str:
    return f"{value:g}"


def expand_sweep(
    base: TrainConfig,
    betas: Optional[Sequence[float]] = None,
    latent_dims: Optional[Sequence[int]] = None,
    seeds: Optional[Sequence[int]] = None,
) -> List[SweepEntry]:
    """
    Cartesian grid of configs, seed innermost.

    The same seed list is used for every beta and latent dimension, so
    runs with equal seed index differ only in the swept values.
    """
    betas = list(betas) if betas else [base.objective.beta]
    dims = list(latent_dims) if latent_dims else [base.latent_dim]
    seeds = list(seeds) if seeds else [base.seed]
    entries = []
    for beta in betas:
        for d in dims:
            for seed in seeds:
                cfg = apply_overrides(
                    base,
                    [
                        f"beta={float(beta)!r}",
                        f"latent_dim={int(d)}",
                        f"seed={int(seed)}",
                    ],
                )
                run_id = f"beta{_fmt(beta)}_d{d}_seed{seed}"
                entries.append(SweepEntry(run_id, cfg))
    return entries


@lru_cache(maxsize=DATASET_CACHE_SIZE)
def _load_split(data_json: str, split: str) -> Dataset:
    return load_dataset(DataConfig.model_validate_json(data_json), split)


def cached_dataset(cfg: TrainConfig, split: str) -> Dataset:
    """Load a split once per distinct data setting, in this process."""
    return _load_split(cfg.data.model_dump_json(), split)


def failed_report(entry: SweepEntry) -> MetricReport:
    cfg = entry.config
    return MetricReport(
        run_id=entry.run_id,
        beta=cfg.objective.beta,
        latent_dim=cfg.latent_dim,
        prior=cfg.objective.prior,
        seed=cfg.seed,
        extra={"failed": 1.0},
    )


def run_entry(
    entry: SweepEntry,
    out_dir: PathLike,
    probe_path: Optional[PathLike] = None,
) -> MetricReport:
    """Train, post-train the prior, checkpoint and evaluate one entry."""
    cfg = entry.config
    run_dir = Path(out_dir) / entry.run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "manifest.txt").write_text(dump_config(cfg))
    train_set = cached_dataset(cfg, "train")
    test_set = cached_dataset(cfg, "test")
    probe = load_probe(probe_path) if probe_path else None

    bundle = build_bundle(cfg, train_set.data_dim)
    if cfg.objective.recon_loss == "probe_features":
        bundle.attach_probe(probe)
    result = train(bundle, train_set, cfg, out_dir=run_dir)
    if cfg.prior_post_epochs > 0 and bundle.prior.kind != "standard_normal":
        train_prior_post(
            bundle,
            train_set,
            cfg,
            optimizers=result.optimizers,
            out_dir=run_dir,
        )
    save_checkpoint(
        bundle,
        run_dir / "model.lfck",
        result.optimizers,
        epoch=result.epoch,
        global_step=result.global_step,
    )
    report = evaluate_bundle(
        bundle, test_set, probe, cfg, run_id=entry.run_id
    )
    write_reports([report], run_dir)
    return report


def _guarded(
    entry: SweepEntry,
    out_dir: PathLike,
    probe_path: Optional[PathLike],
) -> MetricReport:
    try:
        return run_entry(entry, out_dir, probe_path)
    except Exception as err:
        logger.exception(f"sweep entry {entry.run_id} failed: {err}")
        return failed_report(entry)


def ensure_probe(
    cfg: TrainConfig,
    out_dir: PathLike,
    probe_path: Optional[PathLike] = None,
) -> Optional[Path]:
    """Path of a probe shared by all entries, training one if needed."""
    if probe_path is not None:
        return Path(probe_path)
    train_set = cached_dataset(cfg, "train")
    if train_set.labels is None or train_set.num_classes < 2:
        logger.warning("no labels for a probe; metrics use raw pixels")
        return None
    probe: ProbeNet = train_probe(
        train_set, seed=0, epochs=cfg.metrics.probe_epochs
    )
    return save_probe(probe, Path(out_dir) / "probe.lfck")


def sweep(
    entries: Sequence[SweepEntry],
    out_dir: PathLike,
    jobs: int = 1,
    probe_path: Optional[PathLike] = None,
) -> List[MetricReport]:
    """
    Run every entry and write the merged ``metrics.csv``.

    A failing entry is logged and recorded as a row with empty metrics;
    the remaining entries still run.
    """
    if not entries:
        raise ValueError("sweep has no entries")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    probe_path = ensure_probe(entries[0].config, out_dir, probe_path)
    logger.info(f"sweep of {len(entries)} runs with {jobs} job(s)")

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_guarded, entry, out_dir, probe_path)
                for entry in entries
            ]
            reports = [future.result() for future in futures]
    else:
        reports = [
            _guarded(entry, out_dir, probe_path) for entry in entries
        ]

    failed = [r.run_id for r in reports if r.extra.get("failed")]
    if failed:
        logger.warning(f"{len(failed)} sweep run(s) failed: {failed}")
    write_reports(reports, out_dir)
    return reports
