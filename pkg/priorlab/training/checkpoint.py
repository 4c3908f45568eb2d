"""
Model checkpoints in the LFCK container.

Blocks are named ``param/<name>``, ``buffer/<name>``,
``adam/<group>/m/<name>`` and ``adam/<group>/v/<name>``; a probe
attached for the feature loss is stored under ``probe/<name>``. The
metadata holds the resolved config, counters, optimizer step/lr and the
training random state, which is all a bit-exact continuation needs.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import numpy as np
from loguru import logger

from priorlab.bundle import ModelBundle, build_bundle
from priorlab.dataio.config import dump_config, parse_config_text
from priorlab.dataio.lfck import read_container, write_container
from priorlab.errors import CheckpointError, ConfigError
from priorlab.gradcore import Adam, Tensor
from priorlab.metrics.probe import ProbeNet

PathLike = Union[str, Path]

CHECKPOINT_KIND = "model"


@dataclass
class Checkpoint:
    bundle: ModelBundle
    optimizers: Dict[str, Adam] = field(default_factory=dict)
    epoch: int = 0
    global_step: int = 0
    metadata: Dict[str, Any] = field(default_factory=dict)


def _probe_state(bundle: ModelBundle):
    probe = bundle.feature_probe
    if probe is None:
        return None, {}
    meta = {
        "data_dim": probe.data_dim,
        "num_classes": probe.num_classes,
        "hidden": probe.hidden,
        "seed": probe.seed,
        "held_out_accuracy": probe.held_out_accuracy,
    }
    blocks = {
        f"probe/{name}": p.data
        for name, p in probe.named_parameters().items()
    }
    return meta, blocks


def checkpoint_blocks(
    bundle: ModelBundle,
    optimizers: Optional[Mapping[str, Adam]] = None,
) -> Dict[str, np.ndarray]:
    blocks: Dict[str, np.ndarray] = {}
    for name, param in bundle.named_parameters().items():
        blocks[f"param/{name}"] = param.data
    for name, value in bundle.named_buffers().items():
        blocks[f"buffer/{name}"] = np.asarray(value)
    for group, opt in sorted((optimizers or {}).items()):
        state = opt.state
        for name in opt.params:
            if name in state.first_moment:
                blocks[f"adam/{group}/m/{name}"] = state.first_moment[name]
                blocks[f"adam/{group}/v/{name}"] = state.second_moment[
                    name
                ]
    blocks.update(_probe_state(bundle)[1])
    return blocks


def save_checkpoint(
    bundle: ModelBundle,
    path: PathLike,
    optimizers: Optional[Mapping[str, Adam]] = None,
    epoch: int = 0,
    global_step: int = 0,
) -> Path:
    """Write the bundle, optimizer moments and random state to ``path``."""
    if bundle.config is None:
        raise CheckpointError("missing config", "bundle has no config")
    metadata = {
        "kind": CHECKPOINT_KIND,
        "config": dump_config(bundle.config),
        "data_dim": bundle.data_dim,
        "epoch": epoch,
        "global_step": global_step,
        "optimizers": {
            group: {"step": opt.state.step, "lr": opt.lr}
            for group, opt in sorted((optimizers or {}).items())
        },
        "rng": bundle.rng.bit_generator.state,
        "probe": _probe_state(bundle)[0],
    }
    path = write_container(
        path, metadata, checkpoint_blocks(bundle, optimizers)
    )
    logger.debug(f"checkpoint written to {path} (epoch {epoch})")
    return path


def _take(
    blocks: Dict[str, np.ndarray], key: str, shape
) -> np.ndarray:
    if key not in blocks:
        raise CheckpointError("missing block", key)
    value = blocks.pop(key)
    if value.shape != tuple(shape):
        raise CheckpointError(
            "shape mismatch", f"{key}: {value.shape} vs {tuple(shape)}"
        )
    return value.copy()


def _restore_probe(bundle: ModelBundle, meta, blocks) -> None:
    probe = ProbeNet(
        meta["data_dim"],
        meta["num_classes"],
        np.random.default_rng(0),
        meta["hidden"],
    )
    for name, param in probe.named_parameters().items():
        param.data = _take(blocks, f"probe/{name}", param.shape)
    probe.seed = meta.get("seed")
    probe.held_out_accuracy = meta.get("held_out_accuracy")
    probe.eval()
    bundle.attach_probe(probe)


def load_checkpoint(path: PathLike) -> Checkpoint:
    """
    Rebuild the bundle and its optimizers from a checkpoint file.

    Raises:
        CheckpointError: Container errors, a non-model file, missing
            blocks or shapes that disagree with the stored config.
    """
    from priorlab.training.trainer import build_optimizers

    metadata, blocks = read_container(path)
    if metadata.get("kind") != CHECKPOINT_KIND:
        raise CheckpointError(
            "wrong kind", f"{metadata.get('kind')!r} is not a model"
        )
    try:
        cfg = parse_config_text(metadata["config"])
    except (KeyError, ConfigError) as err:
        raise CheckpointError("bad metadata", str(err)) from None

    bundle = build_bundle(cfg, int(metadata["data_dim"]))
    for name, param in bundle.named_parameters().items():
        param.data = _take(blocks, f"param/{name}", param.shape)
    for name, value in bundle.named_buffers().items():
        bundle.load_buffer(
            name, _take(blocks, f"buffer/{name}", np.shape(value))
        )
    bundle.rng.bit_generator.state = metadata["rng"]

    optimizers = build_optimizers(bundle, cfg)
    for group, saved in metadata.get("optimizers", {}).items():
        if group not in optimizers:
            raise CheckpointError(
                "bad metadata", f"unknown optimizer group {group!r}"
            )
        opt = optimizers[group]
        opt.state.step = int(saved["step"])
        opt.lr = float(saved["lr"])
        for name, param in opt.params.items():
            key = f"adam/{group}/m/{name}"
            if key in blocks:
                opt.state.first_moment[name] = _take(
                    blocks, key, param.shape
                )
                opt.state.second_moment[name] = _take(
                    blocks, f"adam/{group}/v/{name}", param.shape
                )
    if metadata.get("probe"):
        _restore_probe(bundle, metadata["probe"], blocks)
    if blocks:
        raise CheckpointError(
            "unexpected blocks", ", ".join(sorted(blocks)[:5])
        )
    return Checkpoint(
        bundle=bundle,
        optimizers=optimizers,
        epoch=int(metadata.get("epoch", 0)),
        global_step=int(metadata.get("global_step", 0)),
        metadata=metadata,
    )


def tensor_snapshot(params: Mapping[str, Tensor]) -> Dict[str, bytes]:
    """Raw bytes of every parameter, for exact equality checks."""
    return {name: p.data.tobytes() for name, p in params.items()}
