"""Fully connected building blocks, Glorot init and batch normalization."""

from typing import List, Literal, Sequence, Union

import numpy as np

from priorlab.errors import ShapeError
from priorlab.gradcore import Tensor, is_grad_enabled
from priorlab.nets.module import Module

Activation = Literal["relu", "sigmoid", "tanh", "identity"]
Init = Literal["glorot", "zeros"]


def glorot_uniform(
    fan_in: int, fan_out: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw a [fan_in x fan_out] matrix from U(-L, L), L = sqrt(6/(in+out))."""
    if fan_in < 1 or fan_out < 1:
        raise ValueError(
            f"fan_in and fan_out must be >= 1, got {fan_in}, {fan_out}"
        )
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _activate(x: Tensor, activation: str) -> Tensor:
    if activation == "relu":
        return x.relu()
    if activation == "sigmoid":
        return x.sigmoid()
    if activation == "tanh":
        return x.tanh()
    return x


class DenseLayer(Module):
    def __init__(
        self,
        fan_in: int,
        fan_out: int,
        activation: Activation = "identity",
        rng: np.random.Generator = None,
        init: Init = "glorot",
    ):
        self.fan_in = fan_in
        self.fan_out = fan_out
        self.activation = activation
        if init == "zeros":
            weights = np.zeros((fan_in, fan_out))
        else:
            if rng is None:
                raise ValueError("glorot init needs an rng")
            weights = glorot_uniform(fan_in, fan_out, rng)
        self.weights = Tensor(weights, requires_grad=True)
        self.bias = Tensor(np.zeros(fan_out), requires_grad=True)

    def __call__(self, x: Tensor, frozen: bool = False) -> Tensor:
        if x.ndim != 2 or x.shape[1] != self.fan_in:
            raise ShapeError(
                "dense",
                [x.shape, self.weights.shape],
                f"expected width {self.fan_in}",
            )
        w, b = self.weights, self.bias
        if frozen:
            w, b = w.detach(), b.detach()
        return _activate(x @ w + b, self.activation)


class BatchNorm(Module):
    """Per-feature batch normalization with running statistics.

    Train mode normalizes by the batch mean and (biased) variance and
    folds them into the running estimates; eval mode uses the running
    estimates only. Train-mode passes under `no_grad` normalize by the
    batch but leave the running estimates alone.
    """

    _buffers = ("running_mean", "running_var")

    def __init__(
        self, features: int, momentum: float = 0.9, eps: float = 1e-5
    ):
        if not 0.0 < momentum < 1.0:
            raise ValueError(f"momentum must be in (0, 1), got {momentum}")
        self.features = features
        self.momentum = momentum
        self.eps = eps
        self.scale = Tensor(np.ones(features), requires_grad=True)
        self.shift = Tensor(np.zeros(features), requires_grad=True)
        self.running_mean = np.zeros(features)
        self.running_var = np.ones(features)
        self.training = True

    def __call__(self, x: Tensor, frozen: bool = False) -> Tensor:
        if x.ndim != 2 or x.shape[1] != self.features:
            raise ShapeError(
                "batchnorm", [x.shape, (self.features,)]
            )
        scale, shift = self.scale, self.shift
        if frozen:
            scale, shift = scale.detach(), shift.detach()

        if not self.training:
            inv_std = 1.0 / np.sqrt(self.running_var + self.eps)
            normalized = (x - self.running_mean) * inv_std
            return normalized * scale + shift

        n = x.shape[0]
        if n < 2:
            raise ShapeError(
                "batchnorm",
                [x.shape],
                "train mode needs a batch of at least 2",
            )
        mean = x.mean(axis=0, keepdims=True)
        centered = x - mean
        var = centered.square().mean(axis=0, keepdims=True)
        inv_std = ((var + self.eps).log() * -0.5).exp()
        normalized = centered * inv_std
        if not is_grad_enabled():
            return normalized * scale + shift

        m = self.momentum
        batch_var = var.data.reshape(-1) * (n / (n - 1))
        self.running_mean = (
            m * self.running_mean + (1.0 - m) * mean.data.reshape(-1)
        )
        self.running_var = np.maximum(
            m * self.running_var + (1.0 - m) * batch_var, 0.0
        )
        return normalized * scale + shift


def batchnorm(x: Tensor, state: BatchNorm) -> Tensor:
    return state(x)


Layer = Union[DenseLayer, BatchNorm]


def mlp_forward(
    layers: Sequence[Layer], x: Tensor, frozen: bool = False
) -> Tensor:
    """Apply ``layers`` in order; ``frozen`` cuts parameter gradients."""
    for layer in layers:
        x = layer(x, frozen=frozen)
    return x


def build_mlp(
    sizes: Sequence[int],
    rng: np.random.Generator,
    activation: Activation = "relu",
    final_activation: Activation = "identity",
    final_init: Init = "glorot",
) -> List[DenseLayer]:
    """Dense stack through ``sizes``; hidden layers share ``activation``."""
    layers = []
    last = len(sizes) - 2
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        layers.append(
            DenseLayer(
                fan_in,
                fan_out,
                final_activation if i == last else activation,
                rng,
                final_init if i == last else "glorot",
            )
        )
    return layers
