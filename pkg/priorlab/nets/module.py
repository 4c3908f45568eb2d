from typing import Dict, Iterator, List, Tuple

import numpy as np

from priorlab.gradcore import Tensor


class Module:
    """
    Base class for anything that owns parameters.

    Parameters are discovered from attributes: trainable `Tensor`s,
    nested `Module`s and lists of modules, in attribute order. Names
    listed in ``_buffers`` are NumPy arrays carried through checkpoints
    but never optimized (batchnorm running statistics).
    """

    _buffers: Tuple[str, ...] = ()
    training: bool = True

    def _children(self) -> Iterator[Tuple[str, object]]:
        for key, value in vars(self).items():
            if key.startswith("_"):
                continue
            yield key, value

    def named_parameters(self, prefix: str = "") -> Dict[str, Tensor]:
        found: Dict[str, Tensor] = {}
        for key, value in self._children():
            name = f"{prefix}{key}"
            if isinstance(value, Tensor) and value.requires_grad:
                found[name] = value
            elif isinstance(value, Module):
                found.update(value.named_parameters(f"{name}."))
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        found.update(
                            item.named_parameters(f"{name}.{i}.")
                        )
        return found

    def named_buffers(self, prefix: str = "") -> Dict[str, np.ndarray]:
        found = {
            f"{prefix}{key}": getattr(self, key) for key in self._buffers
        }
        for key, value in self._children():
            name = f"{prefix}{key}"
            if isinstance(value, Module):
                found.update(value.named_buffers(f"{name}."))
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        found.update(item.named_buffers(f"{name}.{i}."))
        return found

    def load_buffer(self, dotted: str, value: np.ndarray) -> None:
        owner: object = self
        *path, last = dotted.split(".")
        for part in path:
            owner = (
                owner[int(part)]
                if isinstance(owner, (list, tuple))
                else getattr(owner, part)
            )
        setattr(owner, last, np.array(value))

    def parameters(self) -> List[Tensor]:
        return list(self.named_parameters().values())

    def modules(self) -> Iterator["Module"]:
        yield self
        for _, value in self._children():
            if isinstance(value, Module):
                yield from value.modules()
            elif isinstance(value, (list, tuple)):
                for item in value:
                    if isinstance(item, Module):
                        yield from item.modules()

    def train(self) -> "Module":
        for module in self.modules():
            module.training = True
        return self

    def eval(self) -> "Module":
        for module in self.modules():
            module.training = False
        return self
