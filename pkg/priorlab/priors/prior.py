"""
The latent sampling distribution p_theta(z) and the discriminator D_omega.

`PriorHandle` houses one of three families: the fixed standard normal,
a normalizing-flow prior with exact density, or an adversarial prior
whose generator pushes Gaussian noise through FC -> BN -> ReLU blocks.
"""

from typing import List, Literal, Optional, Sequence, Union

import numpy as np

from priorlab.errors import ShapeError, UnsupportedOperationError
from priorlab.flows import (
    FlowStack,
    flow_log_prob,
    flow_sample,
    standard_normal_log_prob,
)
from priorlab.gradcore import Tensor
from priorlab.nets import (
    BatchNorm,
    DenseLayer,
    Module,
    build_mlp,
    mlp_forward,
)

PriorKind = Literal["standard_normal", "flow", "adversarial"]
PRIOR_KINDS = ("standard_normal", "flow", "adversarial")


class PriorHandle(Module):
    def __init__(
        self,
        kind: PriorKind,
        latent_dim: int,
        flow: Optional[FlowStack] = None,
        generator: Optional[List[Union[DenseLayer, BatchNorm]]] = None,
        noise_dim: Optional[int] = None,
    ):
        if kind not in PRIOR_KINDS:
            raise ValueError(
                f"unknown prior kind {kind!r}; expected one of "
                f"{PRIOR_KINDS}"
            )
        if (flow is not None) != (kind == "flow"):
            raise ValueError("a flow is required iff kind == 'flow'")
        if (generator is not None) != (kind == "adversarial"):
            raise ValueError(
                "a generator is required iff kind == 'adversarial'"
            )
        self.kind = kind
        self.latent_dim = latent_dim
        self.flow = flow
        self.generator = generator
        self.noise_dim = noise_dim or latent_dim

    def generate(self, noise: Tensor, frozen: bool = False) -> Tensor:
        """Push noise through the generator blocks."""
        if self.generator is None:
            raise UnsupportedOperationError(
                f"{self.kind} prior has no generator"
            )
        h = noise
        for layer in self.generator:
            h = layer(h, frozen=frozen)
            if isinstance(layer, BatchNorm):
                h = h.relu()
        return h


class Discriminator(Module):
    """FC -> ReLU blocks ending in one logit per example."""

    def __init__(
        self,
        latent_dim: int,
        hidden: Sequence[int],
        rng: np.random.Generator,
    ):
        self.latent_dim = latent_dim
        self.layers = build_mlp([latent_dim, *hidden, 1], rng)

    def __call__(self, z: Tensor, frozen: bool = False) -> Tensor:
        if z.ndim != 2 or z.shape[1] != self.latent_dim:
            raise ShapeError(
                "discriminate", [z.shape, (self.latent_dim,)]
            )
        logits = mlp_forward(self.layers, z, frozen)
        return logits.reshape(z.shape[0])


def build_generator(
    noise_dim: int,
    hidden: Sequence[int],
    latent_dim: int,
    rng: np.random.Generator,
    momentum: float = 0.9,
) -> List[Union[DenseLayer, BatchNorm]]:
    layers: List[Union[DenseLayer, BatchNorm]] = []
    fan_in = noise_dim
    for width in hidden:
        layers.append(DenseLayer(fan_in, width, "identity", rng))
        layers.append(BatchNorm(width, momentum=momentum))
        fan_in = width
    layers.append(DenseLayer(fan_in, latent_dim, "identity", rng))
    return layers


def build_prior(
    kind: PriorKind,
    latent_dim: int,
    rng: np.random.Generator,
    flow_depth: int = 8,
    flow_width: int = 256,
    generator_hidden: Sequence[int] = (256, 256, 256),
    bn_momentum: float = 0.9,
) -> PriorHandle:
    if kind == "flow":
        stack = FlowStack(latent_dim, flow_depth, flow_width, rng)
        return PriorHandle(kind, latent_dim, flow=stack)
    if kind == "adversarial":
        generator = build_generator(
            latent_dim, generator_hidden, latent_dim, rng, bn_momentum
        )
        return PriorHandle(kind, latent_dim, generator=generator)
    return PriorHandle(kind, latent_dim)


def prior_sample(
    prior: PriorHandle,
    rng: np.random.Generator,
    n: int,
    frozen: bool = False,
) -> Tensor:
    """
    Draw n latents from the prior.

    Adversarial samples stay attached to the generator parameters so
    the lower objective can reach them; the other families return
    constants. Generator batchnorm follows the prior's train/eval mode.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if prior.kind == "flow":
        return flow_sample(prior.flow, rng, n)
    if prior.kind == "adversarial":
        noise = Tensor(rng.standard_normal((n, prior.noise_dim)))
        return prior.generate(noise, frozen)
    return Tensor(rng.standard_normal((n, prior.latent_dim)))


def prior_log_prob(prior: PriorHandle, z: Tensor) -> Tensor:
    if z.ndim != 2 or z.shape[1] != prior.latent_dim:
        raise ShapeError("prior_log_prob", [z.shape, (prior.latent_dim,)])
    if prior.kind == "flow":
        return flow_log_prob(prior.flow, z)
    if prior.kind == "standard_normal":
        return standard_normal_log_prob(z)
    raise UnsupportedOperationError(
        "the adversarial prior has no tractable density"
    )


def discriminate(
    disc: Discriminator, z: Tensor, frozen: bool = False
) -> Tensor:
    """Raw logit per example; D(z) = sigmoid(logit)."""
    return disc(z, frozen)
