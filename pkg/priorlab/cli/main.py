"""
The ``priorlab`` command line.

Exit codes: 0 on success, 1 for usage and configuration errors, 2 for
any failure while running a verb.
"""

import argparse
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import ValidationError

from priorlab.bundle import build_bundle
from priorlab.dataio import (
    Dataset,
    apply_overrides,
    dump_config,
    load_dataset,
    parse_config,
    split_override,
    write_image_grid,
)
from priorlab.errors import ConfigError
from priorlab.gradcore import run_gradcheck_suite
from priorlab.latentops import (
    InterpolationSpec,
    direction_paths,
    decode_latents,
    encode_latents,
    interpolate_sequence,
    pca_fit,
    pca_traverse,
    rate_of_change_profile,
    semantic_direction,
    write_profile_csv,
)
from priorlab.metrics import (
    MetricReport,
    aggregate_reports,
    collect_reports,
    generate_images,
    load_probe,
    save_probe,
    train_probe,
    write_aggregate,
    write_reports,
)
from priorlab.objectives import objective_cases
from priorlab.schemas import TrainConfig
from priorlab.training import (
    evaluate_bundle,
    expand_sweep,
    load_checkpoint,
    save_checkpoint,
    sweep,
    train,
    train_prior_post,
)
from priorlab.utils import formatter, initialize_logger

DEFAULT_CONFIG = "mnist_flow_desk"
SWEEP_KEYS = ("sweep.beta", "sweep.latent_dim")


class UsageError(Exception):
    """Bad verb, flag or flag value."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.format_usage()}{self.prog}: {message}")


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        default=DEFAULT_CONFIG,
        help="Config file or preset name",
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override one config key (repeatable)",
    )


def _add_checkpoint_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--checkpoint", required=True, help="Model checkpoint (.lfck)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="priorlab",
        description="Generative autoencoders with learned priors.",
    )
    parser.add_argument("--log-level", default=None)
    verbs = parser.add_subparsers(dest="verb", parser_class=_Parser)
    verbs.required = True

    p = verbs.add_parser("train", help="Joint training of one config")
    _add_config_args(p)
    p.add_argument("--out", default="runs/train")
    p.add_argument("--resume", default=None, help="Checkpoint to continue")
    p.add_argument("--probe", default=None, help="Probe for feature loss")

    p = verbs.add_parser("prior-post", help="Train the prior alone")
    _add_checkpoint_arg(p)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--out", default="runs/prior_post")

    p = verbs.add_parser("sweep", help="Grid over beta / latent_dim")
    _add_config_args(p)
    p.add_argument("--seeds", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--probe", default=None)
    p.add_argument("--out", default="runs/sweep")

    p = verbs.add_parser("sample", help="Grid of prior samples")
    _add_checkpoint_arg(p)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--cols", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="runs/sample")

    p = verbs.add_parser("interpolate", help="Paths between test images")
    _add_checkpoint_arg(p)
    p.add_argument("--space", choices=["Z0", "ZT"], default="ZT")
    p.add_argument("--scheme", choices=["lerp", "slerp"], default=None)
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--pairs", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="runs/interpolate")

    p = verbs.add_parser(
        "direction", help="Class direction and its rate of change"
    )
    _add_checkpoint_arg(p)
    p.add_argument("--attribute", type=int, required=True)
    p.add_argument("--space", choices=["Z0", "ZT"], default="ZT")
    p.add_argument("--steps", type=int, default=16)
    p.add_argument("--bases", type=int, default=100)
    p.add_argument("--probe", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="runs/direction")

    p = verbs.add_parser("pca-traverse", help="Walk a principal axis")
    _add_checkpoint_arg(p)
    p.add_argument("--component", type=int, default=0)
    p.add_argument("--range", dest="value_range", default="-1.5,1.5")
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--images", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="runs/pca")

    p = verbs.add_parser("metrics", help="Evaluate a checkpoint")
    _add_checkpoint_arg(p)
    p.add_argument("--probe", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--run-id", default=None)
    p.add_argument("--out", default="runs/metrics")

    p = verbs.add_parser("probe-train", help="Train the feature probe")
    _add_config_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--out", default="runs/probe")

    p = verbs.add_parser("grad-check", help="Finite-difference suite")
    p.add_argument("--seed", type=int, default=0)

    p = verbs.add_parser("report", help="Aggregate metric tables")
    p.add_argument("run_dirs", nargs="+")
    p.add_argument("--out", default=None)
    return parser


def split_sweep_overrides(
    overrides: Sequence[str],
) -> Tuple[List[str], Dict[str, List[str]]]:
    """Separate ``sweep.*=a,b,c`` lists from plain overrides."""
    plain, lists = [], {}
    for item in overrides:
        key, value = split_override(item)
        if key in SWEEP_KEYS:
            values = [v.strip() for v in value.split(",") if v.strip()]
            if not values:
                raise ConfigError(f"{key} needs at least one value", key=key)
            lists[key] = values
        elif key.startswith("sweep."):
            raise ConfigError(
                f"unknown sweep key {key!r}; use "
                + " or ".join(SWEEP_KEYS),
                key=key,
            )
        else:
            plain.append(item)
    return plain, lists


def resolve_config(source: str, overrides: Sequence[str]) -> TrainConfig:
    cfg = parse_config(source)
    return apply_overrides(cfg, overrides) if overrides else cfg


def write_manifest(cfg: TrainConfig, out_dir: Path, **extra) -> Path:
    """Resolved config as ``key = value`` lines plus run arguments."""
    lines = dump_config(cfg)
    if extra:
        lines += "".join(
            f"# {key} = {value}\n" for key, value in sorted(extra.items())
        )
    path = out_dir / "manifest.txt"
    path.write_text(lines, encoding="utf-8")
    return path


def image_shape(cfg: TrainConfig, data_dim: int) -> Tuple[int, int]:
    h, w = cfg.data.image_height, cfg.data.image_width
    if cfg.data.dataset == "mnist" and h * w == data_dim:
        return h, w
    side = int(np.sqrt(data_dim))
    return (side, side) if side * side == data_dim else (1, data_dim)


def _grid(images: np.ndarray, cols: int, path: Path, shape) -> Path:
    cols = max(1, min(cols, images.shape[0]))
    rows = -(-images.shape[0] // cols)
    return write_image_grid(images, rows, cols, path, shape)


def _feature_fn(probe_path: Optional[str]):
    return load_probe(probe_path).features if probe_path else None


def _show_report(report: MetricReport) -> None:
    rows = [(key, value) for key, value in report.row().items()]
    rows += [(f"extra.{k}", v) for k, v in sorted(report.extra.items())]
    formatter.print_table(
        f"metrics: {report.run_id}", ["name", "value"], rows
    )


def cmd_train(args, out: Path) -> int:
    if args.resume:
        ckpt = load_checkpoint(args.resume)
        cfg = ckpt.bundle.config
        if args.overrides:
            cfg = apply_overrides(cfg, args.overrides)
            ckpt.bundle.config = cfg
        bundle, optimizers = ckpt.bundle, ckpt.optimizers
        start, step = ckpt.epoch, ckpt.global_step
    else:
        cfg = resolve_config(args.config, args.overrides)
        bundle, optimizers, start, step = None, None, 0, 0
    write_manifest(cfg, out, verb="train")
    train_set = load_dataset(cfg.data, "train")
    if bundle is None:
        bundle = build_bundle(cfg, train_set.data_dim)
    if cfg.objective.recon_loss == "probe_features":
        if not args.probe:
            raise ConfigError(
                "recon_loss = probe_features needs --probe",
                key="recon_loss",
            )
        bundle.attach_probe(load_probe(args.probe))
    result = train(
        bundle,
        train_set,
        cfg,
        optimizers=optimizers,
        out_dir=out,
        start_epoch=start,
        global_step=step,
    )
    if cfg.prior_post_epochs > 0 and bundle.prior.kind != "standard_normal":
        train_prior_post(
            bundle, train_set, cfg, optimizers=result.optimizers, out_dir=out
        )
    save_checkpoint(
        bundle,
        out / "model.lfck",
        result.optimizers,
        epoch=result.epoch,
        global_step=result.global_step,
    )
    return 0


def cmd_prior_post(args, out: Path) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    cfg = ckpt.bundle.config
    write_manifest(cfg, out, verb="prior-post", checkpoint=args.checkpoint)
    train_set = load_dataset(cfg.data, "train")
    result = train_prior_post(
        ckpt.bundle,
        train_set,
        cfg,
        epochs=args.epochs,
        optimizers=ckpt.optimizers,
        out_dir=out,
    )
    save_checkpoint(
        ckpt.bundle,
        out / "model.lfck",
        result.optimizers,
        epoch=ckpt.epoch,
        global_step=ckpt.global_step,
    )
    return 0


def cmd_sweep(args, out: Path) -> int:
    plain, lists = split_sweep_overrides(args.overrides)
    cfg = resolve_config(args.config, plain)
    try:
        betas = [float(v) for v in lists.get("sweep.beta", [])]
        dims = [int(v) for v in lists.get("sweep.latent_dim", [])]
    except ValueError as err:
        raise ConfigError(f"bad sweep value: {err}") from None
    if args.seeds is not None and args.seeds < 1:
        raise UsageError("--seeds must be >= 1")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    seeds = list(range(1, args.seeds + 1)) if args.seeds else None
    entries = expand_sweep(cfg, betas or None, dims or None, seeds)
    write_manifest(
        cfg,
        out,
        verb="sweep",
        **{key: ",".join(values) for key, values in lists.items()},
        seeds=",".join(str(s) for s in seeds or [cfg.seed]),
    )
    reports = sweep(entries, out, jobs=args.jobs, probe_path=args.probe)
    failed = [r.run_id for r in reports if r.extra.get("failed")]
    return 2 if failed else 0


def cmd_sample(args, out: Path) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    bundle = ckpt.bundle
    write_manifest(bundle.config, out, verb="sample", seed=args.seed)
    images = generate_images(
        bundle, np.random.default_rng(args.seed), args.n
    )
    path = _grid(
        images,
        args.cols,
        out / "samples.pgm",
        image_shape(bundle.config, bundle.data_dim),
    )
    logger.info(f"wrote {args.n} samples to {path}")
    return 0


def _test_set(cfg: TrainConfig) -> Dataset:
    return load_dataset(cfg.data, "test")


def cmd_interpolate(args, out: Path) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    bundle, cfg = ckpt.bundle, ckpt.bundle.config
    write_manifest(cfg, out, verb="interpolate", space=args.space)
    spec = InterpolationSpec(
        space=args.space, scheme=args.scheme, steps=args.steps
    )
    test = _test_set(cfg)
    rng = np.random.default_rng(args.seed)
    picked = rng.choice(len(test), size=(args.pairs, 2), replace=False)
    rows = [
        interpolate_sequence(
            bundle, test.images[a], test.images[b], spec
        )
        for a, b in picked
    ]
    path = _grid(
        np.concatenate(rows, axis=0),
        args.steps,
        out / f"interpolate_{args.space}.pgm",
        test.image_shape,
    )
    logger.info(f"wrote {args.pairs} interpolations to {path}")
    return 0


def cmd_direction(args, out: Path) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    bundle, cfg = ckpt.bundle, ckpt.bundle.config
    write_manifest(
        cfg, out, verb="direction", attribute=args.attribute
    )
    test = _test_set(cfg)
    if test.labels is None:
        raise UsageError("direction needs a labelled test set")
    latents = encode_latents(bundle, test.images)
    direction = semantic_direction(
        latents, test.labels == args.attribute, str(args.attribute)
    )
    rng = np.random.default_rng(args.seed)
    negatives = np.flatnonzero(test.labels != args.attribute)
    count = min(args.bases, negatives.shape[0])
    base = latents[np.sort(rng.choice(negatives, count, replace=False))]
    profile = rate_of_change_profile(
        bundle,
        _feature_fn(args.probe),
        direction,
        base,
        steps=args.steps,
        space=args.space,
    )
    write_profile_csv(profile, out / f"profile_{args.space}.csv")
    shown = base[: min(4, count)]
    paths = direction_paths(
        bundle, direction.vector, shown, args.steps, args.space
    )
    images = decode_latents(bundle, paths.reshape(-1, bundle.latent_dim))
    _grid(
        np.clip(images, 0.0, 1.0),
        args.steps,
        out / f"direction_{args.space}.pgm",
        test.image_shape,
    )
    return 0


def _parse_range(text: str) -> Tuple[float, float]:
    try:
        low, high = (float(part) for part in text.split(","))
    except ValueError:
        raise UsageError(f"--range expects low,high, got {text!r}")
    return low, high


def cmd_pca_traverse(args, out: Path) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    bundle, cfg = ckpt.bundle, ckpt.bundle.config
    value_range = _parse_range(args.value_range)
    write_manifest(
        cfg, out, verb="pca-traverse", component=args.component
    )
    test = _test_set(cfg)
    fit = pca_fit(encode_latents(bundle, test.images))
    rng = np.random.default_rng(args.seed)
    picked = rng.choice(len(test), size=args.images, replace=False)
    rows = [
        pca_traverse(
            bundle,
            test.images[i],
            fit,
            args.component,
            value_range,
            args.steps,
        )
        for i in picked
    ]
    _grid(
        np.concatenate(rows, axis=0),
        args.steps,
        out / f"pca_{args.component}.pgm",
        test.image_shape,
    )
    return 0


def cmd_metrics(args, out: Path) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    bundle, cfg = ckpt.bundle, ckpt.bundle.config
    write_manifest(cfg, out, verb="metrics")
    probe = load_probe(args.probe) if args.probe else None
    report = evaluate_bundle(
        bundle,
        _test_set(cfg),
        probe,
        cfg,
        seed=args.seed,
        run_id=args.run_id or Path(args.checkpoint).parent.name,
    )
    write_reports([report], out)
    _show_report(report)
    return 0


def cmd_probe_train(args, out: Path) -> int:
    cfg = resolve_config(args.config, args.overrides)
    write_manifest(cfg, out, verb="probe-train", seed=args.seed)
    probe = train_probe(
        load_dataset(cfg.data, "train"),
        seed=args.seed,
        epochs=args.epochs or cfg.metrics.probe_epochs,
    )
    save_probe(probe, out / "probe.lfck")
    formatter.print_panel(
        f"held-out accuracy {probe.held_out_accuracy:.4f}",
        title="probe",
    )
    return 0


def cmd_grad_check(args, out: Optional[Path]) -> int:
    results = run_gradcheck_suite(args.seed)
    results += run_gradcheck_suite(
        args.seed, cases=objective_cases(args.seed)
    )
    formatter.print_table(
        "gradient check",
        ["case", "relative error", "tolerance", "status"],
        [
            (
                r.name,
                r.relative_error,
                r.tolerance,
                "ok" if r.passed else "FAIL",
            )
            for r in results
        ],
    )
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(f"gradient check failed for {failed}")
        return 2
    return 0


def cmd_report(args, out: Optional[Path]) -> int:
    aggregate = aggregate_reports(collect_reports(args.run_dirs))
    if out is not None:
        write_aggregate(aggregate, out / "aggregate.csv")
    means = [c for c in aggregate.columns if not c.endswith("_std")]
    formatter.print_table(
        "report (mean over seeds)",
        means,
        aggregate[means].itertuples(index=False, name=None),
    )
    return 0


COMMANDS: Dict[str, Callable[..., int]] = {
    "train": cmd_train,
    "prior-post": cmd_prior_post,
    "sweep": cmd_sweep,
    "sample": cmd_sample,
    "interpolate": cmd_interpolate,
    "direction": cmd_direction,
    "pca-traverse": cmd_pca_traverse,
    "metrics": cmd_metrics,
    "probe-train": cmd_probe_train,
    "grad-check": cmd_grad_check,
    "report": cmd_report,
}


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """Run one verb and return its exit code."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as err:
        sys.stderr.write(f"{err}\n")
        return 1

    out = Path(args.out) if getattr(args, "out", None) else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        initialize_logger(out / "logs", args.log_level)
    else:
        initialize_logger(Path("logs"), args.log_level)

    try:
        return COMMANDS[args.verb](args, out)
    except UsageError as err:
        sys.stderr.write(f"priorlab {args.verb}: {err}\n")
        return 1
    except (ConfigError, ValidationError) as err:
        logger.error(f"configuration error: {err}")
        return 1
    except Exception as err:
        logger.exception(f"{args.verb} failed: {err}")
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
