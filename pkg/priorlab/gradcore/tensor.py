"""
Dense tensors participating in a reverse-mode differentiation graph.

A `Tensor` wraps a NumPy array. Every differentiable primitive is a
`Function` subclass registered under a kind name; `op_apply` runs the
forward pass and, when any input requires gradients, links the output
to the function instance so `backward` can walk the graph later.
"""

import itertools
from contextlib import contextmanager
from contextvars import ContextVar
from typing import (
    Any,
    Callable,
    Dict,
    Iterator,
    Optional,
    Sequence,
    Tuple,
    Type,
    Union,
)

import numpy as np

from priorlab.errors import (
    NonFiniteError,
    ShapeError,
    UnsupportedOperationError,
)

ArrayLike = Union[np.ndarray, float, int, Sequence[Any]]

_GRAD_ENABLED: ContextVar[bool] = ContextVar(
    "priorlab_grad_enabled", default=True
)
_CHECKED: ContextVar[bool] = ContextVar(
    "priorlab_checked", default=False
)
_DEFAULT_DTYPE: ContextVar[Any] = ContextVar(
    "priorlab_default_dtype", default=np.float64
)

# Monotone ids: an op's inputs always carry smaller ids than its
# output, so sorting by id is a topological order.
_IDS = itertools.count()

_OPS: Dict[str, Type["Function"]] = {}


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording inside the block."""
    token = _GRAD_ENABLED.set(False)
    try:
        yield
    finally:
        _GRAD_ENABLED.reset(token)


@contextmanager
def checked() -> Iterator[None]:
    """Enable NaN/Inf and domain checks on every primitive."""
    token = _CHECKED.set(True)
    try:
        yield
    finally:
        _CHECKED.reset(token)


@contextmanager
def default_dtype(dtype: Any) -> Iterator[None]:
    """Set the dtype used when wrapping plain Python data."""
    token = _DEFAULT_DTYPE.set(np.dtype(dtype).type)
    try:
        yield
    finally:
        _DEFAULT_DTYPE.reset(token)


def is_grad_enabled() -> bool:
    return _GRAD_ENABLED.get()


def is_checked() -> bool:
    return _CHECKED.get()


def register(kind: str) -> Callable[[Type["Function"]], Type["Function"]]:
    """Class decorator adding a `Function` to the primitive registry."""

    def wrap(cls: Type["Function"]) -> Type["Function"]:
        cls.kind = kind
        _OPS[kind] = cls
        return cls

    return wrap


def registered_kinds() -> Tuple[str, ...]:
    return tuple(sorted(_OPS))


class Function:
    """
    Base class for differentiable primitives.

    Subclasses implement `forward` on raw arrays and `backward`, which
    maps the gradient of the output to one gradient per input (None
    for inputs that receive no gradient). Values needed by `backward`
    go into `self.saved`; they are dropped once the graph is consumed.
    """

    kind = "function"
    differentiable = True

    def __init__(self, inputs: Tuple["Tensor", ...]):
        self.inputs = inputs
        self.saved: Dict[str, Any] = {}
        self.consumed = False

    @classmethod
    def prepare(
        cls, inputs: Tuple["Tensor", ...], attrs: Dict[str, Any]
    ) -> Tuple["Tensor", ...]:
        """Validate and, where needed, rewrite inputs before forward."""
        return inputs

    def forward(self, *arrays: np.ndarray, **attrs: Any) -> np.ndarray:
        raise NotImplementedError(
            f"forward not implemented for {self.kind}"
        )

    def backward(
        self, grad: np.ndarray
    ) -> Tuple[Optional[np.ndarray], ...]:
        raise NotImplementedError(
            f"backward not implemented for {self.kind}"
        )


def as_tensor(value: Union["Tensor", ArrayLike], like=None) -> "Tensor":
    if isinstance(value, Tensor):
        return value
    dtype = like.data.dtype if like is not None else None
    return Tensor(value, dtype=dtype)


def op_apply(kind: str, *inputs: Any, **attrs: Any) -> "Tensor":
    """Apply the primitive ``kind`` to ``inputs``.

    Args:
        kind: Registered primitive name (``matmul``, ``add``, ...).
        *inputs: Tensors or array-likes; array-likes become constants.
        **attrs: Primitive attributes (``axis``, ``shape``, ...).

    Returns:
        Tensor: The output, attached to the graph when any input
        requires gradients and recording is enabled.

    Raises:
        UnsupportedOperationError: Unknown kind.
        ShapeError: Inputs do not conform for the kind.
        NonFiniteError: Checked mode saw a NaN/Inf output.
    """
    try:
        cls = _OPS[kind]
    except KeyError:
        raise UnsupportedOperationError(
            f"unknown primitive {kind!r}; known: {registered_kinds()}"
        ) from None

    like = next((x for x in inputs if isinstance(x, Tensor)), None)
    tensors = tuple(as_tensor(x, like) for x in inputs)
    tensors = cls.prepare(tensors, attrs)
    fn = cls(tensors)
    out = fn.forward(*(t.data for t in tensors), **attrs)

    if _CHECKED.get() and not np.all(np.isfinite(out)):
        raise NonFiniteError(
            kind,
            "output of shapes "
            + ", ".join(str(t.shape) for t in tensors),
        )

    record = (
        cls.differentiable
        and _GRAD_ENABLED.get()
        and any(t.requires_grad for t in tensors)
    )
    if not record:
        fn.saved.clear()
        fn.inputs = ()
    return Tensor._from_op(out, fn if record else None, record)


def broadcast_pair(
    kind: str, a: "Tensor", b: "Tensor"
) -> Tuple["Tensor", "Tensor"]:
    """Insert explicit broadcast nodes so both operands share a shape."""
    if a.shape == b.shape:
        return a, b
    try:
        shape = np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(kind, [a.shape, b.shape]) from None
    if a.shape != shape:
        a = op_apply("broadcast", a, shape=shape)
    if b.shape != shape:
        b = op_apply("broadcast", b, shape=shape)
    return a, b


class Tensor:
    """
    A dense real array with an optional gradient.

    Leaves created by the user carry ``creator = None``; outputs of
    recorded operations point at the `Function` that produced them.
    Tensors without graph attachment are never mutated by the library
    except for optimizer updates of parameters.
    """

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        name: Optional[str] = None,
        dtype: Any = None,
    ):
        dtype = dtype or _DEFAULT_DTYPE.get()
        self.data = np.array(data, dtype=dtype)
        self.requires_grad = requires_grad
        self.name = name
        self.grad: Optional[np.ndarray] = None
        self.creator: Optional[Function] = None
        self.id = next(_IDS)

    @classmethod
    def _from_op(
        cls,
        data: np.ndarray,
        creator: Optional[Function],
        requires_grad: bool,
    ) -> "Tensor":
        out = cls.__new__(cls)
        out.data = np.asarray(data)
        out.requires_grad = requires_grad
        out.name = None
        out.grad = None
        out.creator = creator
        out.id = next(_IDS)
        return out

    # ------------------------------------------------------------------
    # Introspection

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return (
            f"Tensor(shape={self.shape}, "
            f"requires_grad={self.requires_grad}{label})"
        )

    def __len__(self) -> int:
        return self.shape[0]

    # ------------------------------------------------------------------
    # Arithmetic

    def __add__(self, other: Any) -> "Tensor":
        return op_apply("add", self, other)

    def __radd__(self, other: Any) -> "Tensor":
        return op_apply("add", other, self)

    def __sub__(self, other: Any) -> "Tensor":
        return op_apply("sub", self, other)

    def __rsub__(self, other: Any) -> "Tensor":
        return op_apply("sub", other, self)

    def __mul__(self, other: Any) -> "Tensor":
        return op_apply("mul", self, other)

    def __rmul__(self, other: Any) -> "Tensor":
        return op_apply("mul", other, self)

    def __truediv__(self, other: Any) -> "Tensor":
        return op_apply("div", self, other)

    def __rtruediv__(self, other: Any) -> "Tensor":
        return op_apply("div", other, self)

    def __neg__(self) -> "Tensor":
        return op_apply("mul", self, -1.0)

    def __matmul__(self, other: Any) -> "Tensor":
        return op_apply("matmul", self, other)

    def __getitem__(self, index: Any) -> "Tensor":
        return op_apply("slice", self, index=index)

    # ------------------------------------------------------------------
    # Elementwise

    def relu(self) -> "Tensor":
        return op_apply("relu", self)

    def sigmoid(self) -> "Tensor":
        return op_apply("sigmoid", self)

    def tanh(self) -> "Tensor":
        return op_apply("tanh", self)

    def exp(self) -> "Tensor":
        return op_apply("exp", self)

    def log(self) -> "Tensor":
        return op_apply("log", self)

    def square(self) -> "Tensor":
        return op_apply("square", self)

    def softplus(self) -> "Tensor":
        return op_apply("softplus", self)

    def log_sigmoid(self) -> "Tensor":
        # log(sigmoid(x)) = -softplus(-x)
        return -((-self).softplus())

    def clip(self, low: float, high: float) -> "Tensor":
        return op_apply("clip", self, low=low, high=high)

    # ------------------------------------------------------------------
    # Reductions and movement

    def sum(
        self, axis: Optional[int] = None, keepdims: bool = False
    ) -> "Tensor":
        return op_apply("sum", self, axis=axis, keepdims=keepdims)

    def mean(
        self, axis: Optional[int] = None, keepdims: bool = False
    ) -> "Tensor":
        return op_apply("mean", self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape: Any) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return op_apply("reshape", self, shape=tuple(shape))

    def broadcast_to(self, shape: Sequence[int]) -> "Tensor":
        return op_apply("broadcast", self, shape=tuple(shape))

    def detach(self) -> "Tensor":
        """Return a constant view of the same values (stop-gradient)."""
        return Tensor._from_op(self.data, None, False)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    return op_apply("concat", *tensors, axis=axis)
