"""Graph extraction and the reverse-mode backward pass."""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from priorlab.errors import GraphError
from priorlab.gradcore.tensor import Function, Tensor

GradMap = Dict[Tensor, np.ndarray]


@dataclass(frozen=True)
class NodeRecord:
    id: int
    kind: str
    input_ids: Tuple[int, ...]
    output: Tensor
    function: Function


class Graph:
    """Topologically ordered operation records reachable from a loss."""

    def __init__(
        self, nodes: List[NodeRecord], leaves: List[Tensor]
    ):
        self.nodes = nodes
        self.leaves = leaves

    @classmethod
    def from_loss(cls, loss: Tensor) -> "Graph":
        seen: Dict[int, Tensor] = {}
        stack = [loss]
        while stack:
            tensor = stack.pop()
            if tensor.id in seen:
                continue
            seen[tensor.id] = tensor
            fn = tensor.creator
            if fn is None:
                continue
            if fn.consumed:
                raise GraphError(
                    f"graph through {fn.kind!r} was already consumed "
                    "by an earlier backward; rebuild the forward pass"
                )
            stack.extend(t for t in fn.inputs if t.requires_grad)

        ordered = sorted(seen.values(), key=lambda t: t.id)
        nodes = [
            NodeRecord(
                id=t.id,
                kind=t.creator.kind,
                input_ids=tuple(i.id for i in t.creator.inputs),
                output=t,
                function=t.creator,
            )
            for t in ordered
            if t.creator is not None
        ]
        leaves = [t for t in ordered if t.creator is None]
        return cls(nodes, leaves)

    def release(self) -> None:
        for node in self.nodes:
            node.function.saved.clear()
            node.function.inputs = ()
            node.function.consumed = True

    def __len__(self) -> int:
        return len(self.nodes)


def backward(
    loss: Tensor, params: Optional[Sequence[Tensor]] = None
) -> GradMap:
    """Propagate d(loss)/d(leaf) through the recorded graph.

    Gradients of tensors used more than once are summed. Leaf tensors
    also accumulate into their ``.grad`` field. The graph is consumed:
    a second call on the same loss raises `GraphError`.

    Args:
        loss: Scalar tensor.
        params: When given, the returned map holds exactly these
            tensors, with zeros for those the loss does not reach.

    Returns:
        Mapping from leaf tensor to its gradient array.
    """
    if not isinstance(loss, Tensor) or loss.size != 1:
        shape = getattr(loss, "shape", None)
        raise GraphError(
            f"backward needs a scalar loss, got shape {shape}"
        )

    grads: GradMap = {}
    if loss.requires_grad:
        graph = Graph.from_loss(loss)
        pending: Dict[int, np.ndarray] = {
            loss.id: np.ones_like(loss.data)
        }
        for node in reversed(graph.nodes):
            upstream = pending.pop(node.id, None)
            if upstream is None:
                continue
            fn = node.function
            for inp, g in zip(fn.inputs, fn.backward(upstream)):
                if g is None or not inp.requires_grad:
                    continue
                if inp.id in pending:
                    pending[inp.id] = pending[inp.id] + g
                else:
                    pending[inp.id] = g

        for leaf in graph.leaves:
            g = pending.get(leaf.id)
            if g is None:
                continue
            g = np.array(g, dtype=leaf.data.dtype).reshape(leaf.shape)
            leaf.grad = g if leaf.grad is None else leaf.grad + g
            grads[leaf] = g
        graph.release()

    if params is None:
        return grads
    return {
        p: grads[p] if p in grads else np.zeros_like(p.data)
        for p in params
    }
