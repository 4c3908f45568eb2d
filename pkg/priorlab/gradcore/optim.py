"""Adam with bias correction, stepping toward higher objective values."""

from dataclasses import dataclass, field
from typing import Dict, Mapping

import numpy as np

from priorlab.errors import GraphError, ShapeError
from priorlab.gradcore.tensor import Tensor

# Adam defaults
DEFAULT_BETA1 = 0.9
DEFAULT_BETA2 = 0.999
DEFAULT_EPS = 1e-8


@dataclass
class AdamState:
    learning_rate: float = 1e-4
    beta1: float = DEFAULT_BETA1
    beta2: float = DEFAULT_BETA2
    eps: float = DEFAULT_EPS
    step: int = 0
    first_moment: Dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: Mapping[str, Tensor],
    grads: Mapping[Tensor, np.ndarray],
    state: AdamState,
    maximize: bool = True,
) -> AdamState:
    """Apply one bias-corrected Adam update in place.

    With ``maximize`` (the default) parameters move along the gradient,
    i.e. ascent on the objective whose gradients are given.

    Raises:
        GraphError: A parameter has no gradient in ``grads``.
        ShapeError: Stored moments do not match a parameter's shape.
    """
    for name, param in params.items():
        if param not in grads:
            raise GraphError(f"no gradient for parameter {name!r}")
        for moments in (state.first_moment, state.second_moment):
            if name not in moments:
                moments[name] = np.zeros_like(param.data)
            elif moments[name].shape != param.shape:
                raise ShapeError(
                    "adam", [moments[name].shape, param.shape], name
                )

    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    sign = 1.0 if maximize else -1.0
    for name, param in params.items():
        g = grads[param]
        if g.shape != param.shape:
            raise ShapeError("adam", [g.shape, param.shape], name)
        m = b1 * state.first_moment[name] + (1.0 - b1) * g
        v = b2 * state.second_moment[name] + (1.0 - b2) * g * g
        state.first_moment[name] = m
        state.second_moment[name] = v
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        delta = state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
        param.data = param.data + sign * delta
    return state


class Adam:
    """Adam over a named parameter group."""

    def __init__(
        self,
        params: Mapping[str, Tensor],
        lr: float = 1e-4,
        beta1: float = DEFAULT_BETA1,
        beta2: float = DEFAULT_BETA2,
        eps: float = DEFAULT_EPS,
        maximize: bool = True,
    ):
        self.params = dict(params)
        self.maximize = maximize
        self.state = AdamState(
            learning_rate=lr, beta1=beta1, beta2=beta2, eps=eps
        )

    @property
    def lr(self) -> float:
        return self.state.learning_rate

    @lr.setter
    def lr(self, value: float) -> None:
        self.state.learning_rate = float(value)

    def step(self, grads: Mapping[Tensor, np.ndarray]) -> None:
        adam_step(self.params, grads, self.state, self.maximize)

    def zero_grad(self) -> None:
        for param in self.params.values():
            param.grad = None
