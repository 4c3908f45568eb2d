"""Primitive operations: forward on arrays, backward on gradients."""

from typing import Any, Dict, Optional, Tuple

import numpy as np

from priorlab.errors import DomainError, ShapeError
from priorlab.gradcore.tensor import (
    Function,
    Tensor,
    broadcast_pair,
    is_checked,
    register,
)

Grads = Tuple[Optional[np.ndarray], ...]


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` over the axes that broadcasting expanded."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class _Binary(Function):
    @classmethod
    def prepare(
        cls, inputs: Tuple[Tensor, ...], attrs: Dict[str, Any]
    ) -> Tuple[Tensor, ...]:
        a, b = inputs
        return broadcast_pair(cls.kind, a, b)


@register("add")
class Add(_Binary):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a + b

    def backward(self, grad: np.ndarray) -> Grads:
        return grad, grad


@register("sub")
class Sub(_Binary):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a - b

    def backward(self, grad: np.ndarray) -> Grads:
        return grad, -grad


@register("mul")
class Mul(_Binary):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        self.saved["a"], self.saved["b"] = a, b
        return a * b

    def backward(self, grad: np.ndarray) -> Grads:
        return grad * self.saved["b"], grad * self.saved["a"]


@register("div")
class Div(_Binary):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if is_checked() and np.any(b == 0):
            raise DomainError("div: zero denominator")
        self.saved["a"], self.saved["b"] = a, b
        return a / b

    def backward(self, grad: np.ndarray) -> Grads:
        a, b = self.saved["a"], self.saved["b"]
        return grad / b, -grad * a / (b * b)


@register("matmul")
class Matmul(Function):
    @classmethod
    def prepare(
        cls, inputs: Tuple[Tensor, ...], attrs: Dict[str, Any]
    ) -> Tuple[Tensor, ...]:
        a, b = inputs
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise ShapeError(
                "matmul",
                [a.shape, b.shape],
                "expected [m x k] @ [k x n]",
            )
        return inputs

    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        self.saved["a"], self.saved["b"] = a, b
        return a @ b

    def backward(self, grad: np.ndarray) -> Grads:
        a, b = self.saved["a"], self.saved["b"]
        return grad @ b.T, a.T @ grad


@register("relu")
class Relu(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        mask = x > 0
        self.saved["mask"] = mask
        return np.where(mask, x, 0.0).astype(x.dtype, copy=False)

    def backward(self, grad: np.ndarray) -> Grads:
        return (grad * self.saved["mask"],)


def stable_sigmoid(x: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -x))


@register("sigmoid")
class Sigmoid(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        out = stable_sigmoid(x)
        self.saved["out"] = out
        return out

    def backward(self, grad: np.ndarray) -> Grads:
        out = self.saved["out"]
        return (grad * out * (1.0 - out),)


@register("tanh")
class Tanh(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        out = np.tanh(x)
        self.saved["out"] = out
        return out

    def backward(self, grad: np.ndarray) -> Grads:
        out = self.saved["out"]
        return (grad * (1.0 - out * out),)


@register("exp")
class Exp(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        out = np.exp(x)
        self.saved["out"] = out
        return out

    def backward(self, grad: np.ndarray) -> Grads:
        return (grad * self.saved["out"],)


@register("log")
class Log(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        if is_checked() and np.any(x <= 0):
            raise DomainError("log: non-positive input")
        self.saved["x"] = x
        return np.log(x)

    def backward(self, grad: np.ndarray) -> Grads:
        return (grad / self.saved["x"],)


@register("square")
class Square(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.saved["x"] = x
        return x * x

    def backward(self, grad: np.ndarray) -> Grads:
        return (2.0 * grad * self.saved["x"],)


@register("softplus")
class Softplus(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.saved["x"] = x
        return np.logaddexp(0.0, x)

    def backward(self, grad: np.ndarray) -> Grads:
        return (grad * stable_sigmoid(self.saved["x"]),)


@register("clip")
class Clip(Function):
    def forward(
        self, x: np.ndarray, low: float, high: float
    ) -> np.ndarray:
        self.saved["mask"] = (x >= low) & (x <= high)
        return np.clip(x, low, high)

    def backward(self, grad: np.ndarray) -> Grads:
        return (grad * self.saved["mask"],)


def _expand_reduced(
    grad: np.ndarray,
    shape: Tuple[int, ...],
    axis: Optional[int],
    keepdims: bool,
) -> np.ndarray:
    if axis is not None and not keepdims:
        grad = np.expand_dims(grad, axis)
    return np.broadcast_to(grad, shape)


@register("sum")
class Sum(Function):
    def forward(
        self,
        x: np.ndarray,
        axis: Optional[int] = None,
        keepdims: bool = False,
    ) -> np.ndarray:
        self.saved.update(shape=x.shape, axis=axis, keepdims=keepdims)
        return np.sum(x, axis=axis, keepdims=keepdims)

    def backward(self, grad: np.ndarray) -> Grads:
        s = self.saved
        return (
            _expand_reduced(grad, s["shape"], s["axis"], s["keepdims"]),
        )


@register("mean")
class Mean(Function):
    def forward(
        self,
        x: np.ndarray,
        axis: Optional[int] = None,
        keepdims: bool = False,
    ) -> np.ndarray:
        count = x.size if axis is None else x.shape[axis]
        self.saved.update(
            shape=x.shape, axis=axis, keepdims=keepdims, count=count
        )
        return np.mean(x, axis=axis, keepdims=keepdims)

    def backward(self, grad: np.ndarray) -> Grads:
        s = self.saved
        expanded = _expand_reduced(
            grad, s["shape"], s["axis"], s["keepdims"]
        )
        return (expanded / s["count"],)


@register("broadcast")
class Broadcast(Function):
    @classmethod
    def prepare(
        cls, inputs: Tuple[Tensor, ...], attrs: Dict[str, Any]
    ) -> Tuple[Tensor, ...]:
        (x,) = inputs
        try:
            np.broadcast_shapes(x.shape, tuple(attrs["shape"]))
        except ValueError:
            raise ShapeError(
                "broadcast", [x.shape, tuple(attrs["shape"])]
            ) from None
        return inputs

    def forward(self, x: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
        self.saved["shape"] = x.shape
        return np.broadcast_to(x, shape)

    def backward(self, grad: np.ndarray) -> Grads:
        return (unbroadcast(grad, self.saved["shape"]),)


@register("reshape")
class Reshape(Function):
    @classmethod
    def prepare(
        cls, inputs: Tuple[Tensor, ...], attrs: Dict[str, Any]
    ) -> Tuple[Tensor, ...]:
        (x,) = inputs
        shape = tuple(attrs["shape"])
        known = int(np.prod([s for s in shape if s != -1]))
        if -1 in shape:
            fits = known > 0 and x.size % known == 0
        else:
            fits = known == x.size
        if not fits:
            raise ShapeError("reshape", [x.shape, shape])
        return inputs

    def forward(self, x: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
        self.saved["shape"] = x.shape
        return x.reshape(shape)

    def backward(self, grad: np.ndarray) -> Grads:
        return (grad.reshape(self.saved["shape"]),)


@register("concat")
class Concat(Function):
    @classmethod
    def prepare(
        cls, inputs: Tuple[Tensor, ...], attrs: Dict[str, Any]
    ) -> Tuple[Tensor, ...]:
        ref = inputs[0].shape
        axis = attrs.get("axis", -1) % len(ref)

        def others(shape: Tuple[int, ...]) -> Tuple[int, ...]:
            return shape[:axis] + shape[axis + 1 :]

        for t in inputs[1:]:
            if t.ndim != len(ref) or others(t.shape) != others(ref):
                raise ShapeError("concat", [ref, t.shape])
        return inputs

    def forward(self, *arrays: np.ndarray, axis: int = -1) -> np.ndarray:
        self.saved["sizes"] = [a.shape[axis] for a in arrays]
        self.saved["axis"] = axis
        return np.concatenate(arrays, axis=axis)

    def backward(self, grad: np.ndarray) -> Grads:
        cuts = np.cumsum(self.saved["sizes"])[:-1]
        return tuple(np.split(grad, cuts, axis=self.saved["axis"]))


@register("slice")
class Slice(Function):
    def forward(self, x: np.ndarray, index: Any) -> np.ndarray:
        self.saved["shape"] = x.shape
        self.saved["index"] = index
        return x[index]

    def backward(self, grad: np.ndarray) -> Grads:
        index = self.saved["index"]
        full = np.zeros(self.saved["shape"], dtype=grad.dtype)
        parts = index if isinstance(index, tuple) else (index,)
        if all(isinstance(p, (slice, int)) for p in parts):
            full[index] = grad
        else:
            np.add.at(full, index, grad)
        return (full,)


@register("detach")
class Detach(Function):
    differentiable = False

    def forward(self, x: np.ndarray) -> np.ndarray:
        return x

    def backward(self, grad: np.ndarray) -> Grads:
        return (None,)
