import math
from typing import List, Tuple, Union

import numpy as np
from loguru import logger

from priorlab.errors import ShapeError
from priorlab.flows.layers import Actnorm, CouplingLayer
from priorlab.gradcore import Tensor
from priorlab.nets import Module

FlowLayer = Union[Actnorm, CouplingLayer]

LOG_2PI = math.log(2.0 * math.pi)


class FlowStack(Module):
    """
    f = f_T o ... o f_1 mapping the encoder space Z_T onto Z_0.

    An actnorm precedes every second coupling, starting with the
    first; coupling parities alternate so consecutive pairs touch
    every coordinate.

    Args:
        d: Latent width.
        depth: Number of coupling transforms T (0 gives the identity).
        width: Hidden width of each coupling network.
        rng: Source for the Glorot draws.
    """

    def __init__(
        self,
        d: int,
        depth: int,
        width: int,
        rng: np.random.Generator,
    ):
        if depth < 0:
            raise ValueError(f"depth must be >= 0, got {depth}")
        self.d = d
        self.depth = depth
        self.width = width
        self.layers: List[FlowLayer] = []
        for t in range(depth):
            if t % 2 == 0:
                self.layers.append(Actnorm(d))
            parity = (
                "first-half-conditions"
                if t % 2 == 0
                else "second-half-conditions"
            )
            self.layers.append(CouplingLayer(d, width, parity, rng))
        self.clamp_count = 0

    def forward(self, z: Tensor) -> Tuple[Tensor, Tensor]:
        if z.ndim != 2 or z.shape[1] != self.d:
            raise ShapeError("flow_forward", [z.shape, (self.d,)])
        logdet = Tensor(np.zeros(z.shape[0]))
        for layer in self.layers:
            z, step = layer.forward(z)
            logdet = logdet + step
        return z, logdet

    def inverse(self, z0: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        z = np.asarray(z0, dtype=np.float64)
        if z.ndim != 2 or z.shape[1] != self.d:
            raise ShapeError("flow_inverse", [z.shape, (self.d,)])
        logdet = np.zeros(z.shape[0])
        clamps = 0
        for layer in reversed(self.layers):
            z, step, clamped = layer.inverse(z)
            logdet = logdet + step
            clamps += clamped
        if clamps:
            self.clamp_count += clamps
            logger.warning(
                f"flow inverse clamped {clamps} scale entries "
                f"(total {self.clamp_count})"
            )
        return z, logdet


def _as_tensor(z: Union[Tensor, np.ndarray]) -> Tensor:
    return z if isinstance(z, Tensor) else Tensor(z)


def flow_forward(
    stack: FlowStack, z_t: Union[Tensor, np.ndarray]
) -> Tuple[Tensor, Tensor]:
    """Map Z_T -> Z_0 and return (z0, per-example log|det J|)."""
    return stack.forward(_as_tensor(z_t))


def flow_inverse(
    stack: FlowStack,
    z0: Union[Tensor, np.ndarray],
    return_logdet: bool = False,
):
    """Map Z_0 -> Z_T with the analytic inverses, without gradients."""
    data = z0.data if isinstance(z0, Tensor) else z0
    z_t, logdet = stack.inverse(data)
    if return_logdet:
        return Tensor(z_t), logdet
    return Tensor(z_t)


def standard_normal_log_prob(z: Tensor) -> Tensor:
    d = z.shape[1]
    return z.square().sum(axis=1) * -0.5 - 0.5 * d * LOG_2PI


def flow_log_prob(
    stack: FlowStack, z: Union[Tensor, np.ndarray]
) -> Tensor:
    """log N(f(z); 0, I) + log|det df/dz| per example."""
    z0, logdet = flow_forward(stack, z)
    return standard_normal_log_prob(z0) + logdet


def flow_sample(
    stack: FlowStack, rng: np.random.Generator, n: int
) -> Tensor:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    z0 = rng.standard_normal((n, stack.d))
    return flow_inverse(stack, z0)
