"""
Interpolation in the encoder space Z_T and the flow base space Z_0.

Z_T paths are straight lines; Z_0 paths are great circles between the
flow images of the endpoints, mapped back through the inverse flow.
"""

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from priorlab.bundle import ModelBundle
from priorlab.errors import DomainError, UnsupportedOperationError
from priorlab.flows import flow_forward, flow_inverse
from priorlab.gradcore import Tensor, no_grad
from priorlab.nets import reparameterize

Space = Literal["Z0", "ZT"]
Scheme = Literal["lerp", "slerp"]

SLERP_FALLBACK = 1e-6


def lerp(a: np.ndarray, b: np.ndarray, t) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return (1.0 - t) * a + t * b


def slerp(a: np.ndarray, b: np.ndarray, t) -> np.ndarray:
    """
    Spherical interpolation along the last axis.

    Rows whose endpoints are (anti)parallel fall back to lerp.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    norm_a = np.linalg.norm(a, axis=-1, keepdims=True)
    norm_b = np.linalg.norm(b, axis=-1, keepdims=True)
    if np.any(norm_a == 0.0) or np.any(norm_b == 0.0):
        raise DomainError("slerp endpoints must be nonzero")
    dot = np.clip(
        np.sum((a / norm_a) * (b / norm_b), axis=-1, keepdims=True),
        -1.0,
        1.0,
    )
    omega = np.arccos(dot)
    so = np.sin(omega)
    if t.ndim and t.shape[-1] != 1:
        t = t[..., None]
    degenerate = so < SLERP_FALLBACK
    safe = np.where(degenerate, 1.0, so)
    out = (np.sin((1.0 - t) * omega) * a + np.sin(t * omega) * b) / safe
    return np.where(degenerate, lerp(a, b, t), out)


def default_scheme(space: Space) -> Scheme:
    return "slerp" if space == "Z0" else "lerp"


@dataclass(frozen=True)
class InterpolationSpec:
    space: Space = "ZT"
    scheme: Optional[Scheme] = None
    steps: int = 8

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError(f"steps must be >= 2, got {self.steps}")
        if self.scheme is None:
            object.__setattr__(self, "scheme", default_scheme(self.space))


def _require_flow(bundle: ModelBundle, what: str) -> None:
    if bundle.prior.kind != "flow":
        raise UnsupportedOperationError(
            f"{what} in Z0 needs a flow prior, got {bundle.prior.kind}"
        )


def encode_latents(
    bundle: ModelBundle,
    images: np.ndarray,
    rng: Optional[np.random.Generator] = None,
    batch_size: int = 1000,
) -> np.ndarray:
    """Posterior means, or posterior samples when ``rng`` is given."""
    images = np.atleast_2d(np.asarray(images, dtype=np.float64))
    out = []
    with no_grad():
        for start in range(0, images.shape[0], batch_size):
            mean, logvar = bundle.encoder(
                Tensor(images[start : start + batch_size])
            )
            z = mean if rng is None else reparameterize(mean, logvar, rng)
            out.append(z.data)
    return np.concatenate(out, axis=0)


def decode_latents(
    bundle: ModelBundle, latents: np.ndarray, batch_size: int = 1000
) -> np.ndarray:
    latents = np.atleast_2d(np.asarray(latents, dtype=np.float64))
    out = []
    with no_grad():
        for start in range(0, latents.shape[0], batch_size):
            chunk = Tensor(latents[start : start + batch_size])
            out.append(bundle.decoder(chunk).data)
    return np.concatenate(out, axis=0)


def to_z0(bundle: ModelBundle, z_t: np.ndarray) -> np.ndarray:
    _require_flow(bundle, "mapping")
    with no_grad():
        z0, _ = flow_forward(bundle.prior.flow, np.atleast_2d(z_t))
    return z0.data


def from_z0(bundle: ModelBundle, z0: np.ndarray) -> np.ndarray:
    _require_flow(bundle, "mapping")
    return flow_inverse(bundle.prior.flow, np.atleast_2d(z0)).data


def interpolate_latents(
    bundle: ModelBundle,
    z_a: np.ndarray,
    z_b: np.ndarray,
    spec: InterpolationSpec,
) -> np.ndarray:
    """Z_T codes at evenly spaced t between the two endpoints."""
    t = np.linspace(0.0, 1.0, spec.steps)[:, None]
    a, b = np.asarray(z_a).reshape(1, -1), np.asarray(z_b).reshape(1, -1)
    if spec.space == "Z0":
        a, b = to_z0(bundle, a), to_z0(bundle, b)
    mix = slerp if spec.scheme == "slerp" else lerp
    path = mix(np.repeat(a, spec.steps, 0), np.repeat(b, spec.steps, 0), t)
    if spec.space == "Z0":
        path = from_z0(bundle, path)
    return path


def interpolate_sequence(
    bundle: ModelBundle,
    x_a: np.ndarray,
    x_b: np.ndarray,
    spec: InterpolationSpec,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """
    Decoded images along the path between two encoded images.

    Endpoints are posterior means unless ``rng`` is given, in which
    case they are posterior samples.
    """
    if spec.space == "Z0":
        _require_flow(bundle, "interpolation")
    ends = encode_latents(bundle, np.stack([x_a, x_b]), rng)
    path = interpolate_latents(bundle, ends[0], ends[1], spec)
    return np.clip(decode_latents(bundle, path), 0.0, 1.0)
