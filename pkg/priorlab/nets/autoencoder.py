from typing import Sequence, Tuple

import numpy as np

from priorlab.errors import ShapeError
from priorlab.gradcore import Tensor
from priorlab.nets.layers import (
    Activation,
    DenseLayer,
    Init,
    build_mlp,
    mlp_forward,
)
from priorlab.nets.module import Module

LOGVAR_MIN = -20.0
LOGVAR_MAX = 20.0


class EncoderNet(Module):
    """Diagonal-Gaussian posterior q(z|x): ReLU trunk, mean/logvar heads."""

    def __init__(
        self,
        data_dim: int,
        hidden: Sequence[int],
        latent_dim: int,
        rng: np.random.Generator,
        head_init: Init = "glorot",
    ):
        self.data_dim = data_dim
        self.latent_dim = latent_dim
        sizes = [data_dim, *hidden]
        self.trunk = build_mlp(sizes, rng, final_activation="relu")
        width = sizes[-1]
        self.mean_head = DenseLayer(
            width, latent_dim, "identity", rng, head_init
        )
        self.logvar_head = DenseLayer(
            width, latent_dim, "identity", rng, head_init
        )

    def __call__(
        self, x: Tensor, frozen: bool = False
    ) -> Tuple[Tensor, Tensor]:
        if x.ndim != 2 or x.shape[1] != self.data_dim:
            raise ShapeError(
                "encode", [x.shape, (self.data_dim,)]
            )
        h = mlp_forward(self.trunk, x, frozen)
        return self.mean_head(h, frozen), self.logvar_head(h, frozen)


class DecoderNet(Module):
    """Deterministic decoder G_psi(z) plus the shared log-variance log(gamma)."""

    def __init__(
        self,
        latent_dim: int,
        hidden: Sequence[int],
        data_dim: int,
        rng: np.random.Generator,
        output_activation: Activation = "sigmoid",
        output_init: Init = "glorot",
        learn_gamma: bool = False,
    ):
        self.latent_dim = latent_dim
        self.data_dim = data_dim
        sizes = [latent_dim, *hidden, data_dim]
        self.layers = build_mlp(
            sizes,
            rng,
            final_activation=output_activation,
            final_init=output_init,
        )
        self.log_gamma = Tensor(
            np.zeros(1), requires_grad=learn_gamma
        )

    def __call__(self, z: Tensor, frozen: bool = False) -> Tensor:
        if z.ndim != 2 or z.shape[1] != self.latent_dim:
            raise ShapeError(
                "decode", [z.shape, (self.latent_dim,)]
            )
        return mlp_forward(self.layers, z, frozen)


def encode(enc: EncoderNet, x: Tensor) -> Tuple[Tensor, Tensor]:
    return enc(x)


def decode(dec: DecoderNet, z: Tensor) -> Tensor:
    return dec(z)


def reparameterize(
    mean: Tensor, logvar: Tensor, rng: np.random.Generator
) -> Tensor:
    """z = mean + exp(logvar / 2) * u with u ~ N(0, I) held constant."""
    if mean.shape != logvar.shape:
        raise ShapeError("reparameterize", [mean.shape, logvar.shape])
    noise = rng.standard_normal(mean.shape)
    std = (logvar.clip(LOGVAR_MIN, LOGVAR_MAX) * 0.5).exp()
    return mean + std * noise

