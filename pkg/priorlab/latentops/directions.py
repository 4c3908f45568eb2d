from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
import pandas as pd

from priorlab.bundle import ModelBundle
from priorlab.latentops.interpolate import (
    Space,
    decode_latents,
    from_z0,
    slerp,
    to_z0,
)

FeatureFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SemanticDirection:
    vector: np.ndarray
    attribute: str
    n_positive: int
    n_negative: int


def semantic_direction(
    latents: np.ndarray, flags: np.ndarray, attribute: str = ""
) -> SemanticDirection:
    """Mean Z_T code with the attribute minus mean code without it."""
    latents = np.asarray(latents, dtype=np.float64)
    flags = np.asarray(flags, dtype=bool)
    if flags.shape != (latents.shape[0],):
        raise ValueError(
            f"{flags.shape[0]} flags for {latents.shape[0]} latents"
        )
    positive, negative = latents[flags], latents[~flags]
    if not positive.shape[0] or not negative.shape[0]:
        raise ValueError(
            f"attribute {attribute!r} needs examples with and without it"
        )
    vector = positive.mean(axis=0) - negative.mean(axis=0)
    return SemanticDirection(
        vector, attribute, positive.shape[0], negative.shape[0]
    )


@dataclass(frozen=True)
class RateProfile:
    p5: np.ndarray
    median: np.ndarray
    p95: np.ndarray
    distances: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "index": np.arange(self.median.shape[0]),
                "p5": self.p5,
                "median": self.median,
                "p95": self.p95,
            }
        )


def direction_paths(
    bundle: ModelBundle,
    direction: np.ndarray,
    base: np.ndarray,
    steps: int,
    space: Space,
) -> np.ndarray:
    """[m, steps, d] Z_T codes from each base code to base + direction."""
    t = np.linspace(0.0, 1.0, steps)[None, :, None]
    start = base[:, None, :]
    if space == "ZT":
        return start + t * direction[None, None, :]
    m, d = base.shape
    a = to_z0(bundle, base)[:, None, :]
    b = to_z0(bundle, base + direction)[:, None, :]
    path = slerp(
        np.broadcast_to(a, (m, steps, d)),
        np.broadcast_to(b, (m, steps, d)),
        np.broadcast_to(t, (m, steps, 1)),
    )
    return from_z0(bundle, path.reshape(m * steps, d)).reshape(
        m, steps, d
    )


def rate_of_change_profile(
    bundle: ModelBundle,
    feature_fn: Optional[FeatureFn],
    direction: Union[np.ndarray, SemanticDirection],
    base_latents: np.ndarray,
    steps: int = 16,
    space: Space = "ZT",
) -> RateProfile:
    """
    Feature distance between adjacent images along direction paths.

    Returns per-index 5th percentile, median and 95th percentile over
    the base codes; every array has ``steps - 1`` entries.
    """
    if isinstance(direction, SemanticDirection):
        direction = direction.vector
    direction = np.asarray(direction, dtype=np.float64)
    base = np.atleast_2d(np.asarray(base_latents, dtype=np.float64))
    if base.shape[0] < 1:
        raise ValueError("need at least one base latent")
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    m, d = base.shape
    paths = direction_paths(bundle, direction, base, steps, space)
    images = decode_latents(bundle, paths.reshape(m * steps, d))
    feats = images if feature_fn is None else feature_fn(images)
    feats = feats.reshape(m, steps, -1)
    distances = np.linalg.norm(np.diff(feats, axis=1), axis=2)
    p5, median, p95 = np.percentile(distances, [5, 50, 95], axis=0)
    return RateProfile(p5, median, p95, distances)


def write_profile_csv(
    profile: RateProfile, path: Union[str, Path]
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    profile.to_frame().to_csv(path, index=False)
    return path
