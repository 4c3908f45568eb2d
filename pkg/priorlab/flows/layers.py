"""
Bijective flow layers.

Both layers map in the Z_T -> Z_0 direction in ``forward`` and expose
an analytic ``inverse`` on plain arrays. Forward returns the per-example
log|det J| as a tensor so it can take part in training objectives;
inverse is only ever used for sampling and interpolation and therefore
works on arrays.
"""

import math
from typing import Literal, Tuple

import numpy as np

from priorlab.errors import ShapeError
from priorlab.gradcore import Tensor, concat, no_grad
from priorlab.gradcore.functional import stable_sigmoid
from priorlab.nets import Module, build_mlp, mlp_forward

Parity = Literal["first-half-conditions", "second-half-conditions"]

GAMMA_FLOOR = 1e-8
SIGMA_FLOOR = 1e-6
SIGMA_OFFSET = 2.0


def _check_width(kind: str, z: Tensor, d: int) -> None:
    if z.ndim != 2 or z.shape[1] != d:
        raise ShapeError(kind, [z.shape, (d,)])


class Actnorm(Module):
    """z -> gamma * z + beta, initialized as the identity."""

    def __init__(self, d: int):
        self.d = d
        self.gamma = Tensor(np.ones(d), requires_grad=True)
        self.beta = Tensor(np.zeros(d), requires_grad=True)

    def forward(self, z: Tensor) -> Tuple[Tensor, Tensor]:
        _check_width("actnorm", z, self.d)
        out = z * self.gamma + self.beta
        # log|gamma| written as log(gamma^2) / 2 to stay differentiable
        total = (self.gamma.square().log() * 0.5).sum()
        logdet = total.reshape(1).broadcast_to((z.shape[0],))
        return out, logdet

    def inverse(self, out: np.ndarray) -> Tuple[np.ndarray, np.ndarray, int]:
        gamma = self.gamma.data
        small = np.abs(gamma) < GAMMA_FLOOR
        safe = np.where(
            small, np.where(gamma < 0, -GAMMA_FLOOR, GAMMA_FLOOR), gamma
        )
        z = (out - self.beta.data) / safe
        logdet = np.full(out.shape[0], -np.sum(np.log(np.abs(safe))))
        return z, logdet, int(small.sum())


class CouplingLayer(Module):
    """
    Affine coupling with the scale applied after the shift:
    z_b <- sigmoid(s + 2) * (z_b + mu), with (mu, s) = NN(z_a).

    The conditioning part always holds ceil(d/2) coordinates; the
    parity decides whether it sits at the front or the back.
    """

    def __init__(
        self,
        d: int,
        width: int,
        parity: Parity,
        rng: np.random.Generator,
    ):
        if d < 2:
            raise ShapeError(
                "coupling", [(d,)], "coupling needs d >= 2"
            )
        self.d = d
        self.parity = parity
        self.n_cond = math.ceil(d / 2)
        self.n_trans = d - self.n_cond
        self.nn = build_mlp(
            [self.n_cond, width, width, 2 * self.n_trans],
            rng,
            final_init="zeros",
        )

    def _split(self, z):
        if self.parity == "first-half-conditions":
            return z[:, : self.n_cond], z[:, self.n_cond :]
        return z[:, self.n_trans :], z[:, : self.n_trans]

    def _join(self, z_a, z_b):
        if self.parity == "first-half-conditions":
            return z_a, z_b
        return z_b, z_a

    def forward(self, z: Tensor) -> Tuple[Tensor, Tensor]:
        _check_width("coupling", z, self.d)
        z_a, z_b = self._split(z)
        h = mlp_forward(self.nn, z_a)
        mu = h[:, : self.n_trans]
        pre = h[:, self.n_trans :] + SIGMA_OFFSET
        z_b = pre.sigmoid() * (z_b + mu)
        logdet = pre.log_sigmoid().sum(axis=1)
        return concat(list(self._join(z_a, z_b)), axis=1), logdet

    def inverse(self, out: np.ndarray) -> Tuple[np.ndarray, np.ndarray, int]:
        z_a, z_b = self._split(out)
        with no_grad():
            h = mlp_forward(self.nn, Tensor(z_a)).data
        mu = h[:, : self.n_trans]
        sigma = stable_sigmoid(h[:, self.n_trans :] + SIGMA_OFFSET)
        small = sigma < SIGMA_FLOOR
        sigma = np.maximum(sigma, SIGMA_FLOOR)
        z_b = z_b / sigma - mu
        logdet = -np.sum(np.log(sigma), axis=1)
        z = np.concatenate(self._join(z_a, z_b), axis=1)
        return z, logdet, int(small.sum())
