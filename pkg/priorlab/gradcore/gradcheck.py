"""Central finite differences as an oracle for the backward pass."""

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from loguru import logger

from priorlab.errors import NonFiniteError
from priorlab.gradcore.autograd import backward
from priorlab.gradcore.tensor import Tensor, concat, no_grad

Scalar = Union[Tensor, float]

# Relative-error denominators never drop below this floor.
_ERROR_FLOOR = 1e-6


def _value(out: Scalar) -> float:
    if isinstance(out, Tensor):
        return out.item()
    return float(out)


def finite_difference_gradient(
    f: Callable[[Tensor], Scalar], x: Tensor, h: float = 1e-5
) -> np.ndarray:
    """Estimate df/dx by central differences, one coordinate at a time.

    ``x.data`` is perturbed in place and restored afterwards, so ``f``
    may ignore its argument and read a parameter directly.

    Raises:
        ValueError: ``h`` is not positive.
        NonFiniteError: ``f`` is not finite at a perturbed point.
    """
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h}")
    original = x.data
    flat = np.array(original, dtype=np.float64).reshape(-1)
    estimate = np.zeros(flat.size)
    try:
        with no_grad():
            for i in range(flat.size):
                values = []
                for step in (h, -h):
                    probe = flat.copy()
                    probe[i] += step
                    x.data = probe.reshape(original.shape).astype(
                        original.dtype
                    )
                    values.append(_value(f(x)))
                if not np.all(np.isfinite(values)):
                    raise NonFiniteError(
                        "finite difference", f"coordinate {i}"
                    )
                estimate[i] = (values[0] - values[1]) / (2.0 * h)
    finally:
        x.data = original
    return estimate.reshape(original.shape)


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    diff = np.linalg.norm(np.ravel(analytic) - np.ravel(numeric))
    scale = max(
        np.linalg.norm(analytic) + np.linalg.norm(numeric),
        _ERROR_FLOOR,
    )
    return float(diff / scale)


@dataclass
class GradCheckResult:
    name: str
    relative_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.relative_error < self.tolerance


def check_gradients(
    name: str,
    objective: Callable[[], Tensor],
    params: Sequence[Tensor],
    h: float = 1e-5,
    tolerance: float = 1e-4,
) -> GradCheckResult:
    """Compare backward() against finite differences for ``params``."""
    grads = backward(objective(), params)
    worst = 0.0
    for p in params:
        numeric = finite_difference_gradient(
            lambda _: objective(), p, h
        )
        worst = max(worst, relative_error(grads[p], numeric))
    result = GradCheckResult(name, worst, tolerance)
    if not result.passed:
        logger.warning(
            f"gradient check {name} failed: rel err {worst:.3e}"
        )
    return result


def _primitive_cases(rng: np.random.Generator):
    def leaf(*shape, low=-2.0, high=2.0):
        return Tensor(
            rng.uniform(low, high, size=shape), requires_grad=True
        )

    a, b = leaf(3, 4), leaf(3, 4)
    row = leaf(1, 4)
    m = leaf(4, 2)
    pos = leaf(3, 4, low=0.5, high=2.0)
    weight = Tensor(rng.uniform(-1.0, 1.0, size=(3, 4)))

    def weighted(t: Tensor) -> Tensor:
        return (t * weight).sum()

    return [
        ("add", lambda: weighted(a + row), [a, row]),
        ("sub", lambda: weighted(a - b), [a, b]),
        ("mul", lambda: weighted(a * b), [a, b]),
        ("div", lambda: weighted(a / pos), [a, pos]),
        ("matmul", lambda: (a @ m).square().sum(), [a, m]),
        ("relu", lambda: weighted(a.relu()), [a]),
        ("sigmoid", lambda: weighted(a.sigmoid()), [a]),
        ("tanh", lambda: weighted(a.tanh()), [a]),
        ("exp", lambda: weighted(a.exp()), [a]),
        ("log", lambda: weighted(pos.log()), [pos]),
        ("square", lambda: weighted(a.square()), [a]),
        ("softplus", lambda: weighted(a.softplus()), [a]),
        ("clip", lambda: weighted(a.clip(-1.0, 1.0)), [a]),
        (
            "sum",
            lambda: (a.sum(axis=1) * weight[:, 0]).sum(),
            [a],
        ),
        (
            "mean",
            lambda: (a.mean(axis=0, keepdims=True).square()).sum(),
            [a],
        ),
        (
            "broadcast",
            lambda: weighted(row.broadcast_to((3, 4))),
            [row],
        ),
        (
            "reshape",
            lambda: (a.reshape(6, 2) @ m.reshape(2, 4)).square().sum(),
            [a, m],
        ),
        (
            "concat",
            lambda: weighted(concat([a[:, :1], b[:, 1:]], axis=1)),
            [a, b],
        ),
        ("slice", lambda: a[1:, 2:].square().sum(), [a]),
    ]


def run_gradcheck_suite(
    seed: int = 0, cases: Optional[List] = None
) -> List[GradCheckResult]:
    """Check every primitive at a random double-precision point."""
    rng = np.random.default_rng(seed)
    results = []
    for name, objective, params in cases or _primitive_cases(rng):
        results.append(check_gradients(name, objective, params))
    return results
