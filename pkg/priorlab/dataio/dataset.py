from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from priorlab.errors import DatasetFormatError


@dataclass(frozen=True)
class Dataset:
    """Flattened images in [0, 1] with optional integer labels."""

    images: np.ndarray
    labels: Optional[np.ndarray] = None
    split: str = "train"
    source: str = ""
    image_shape: Tuple[int, int] = (28, 28)

    def __post_init__(self):
        images = np.asarray(self.images, dtype=np.float64)
        if images.ndim != 2:
            raise DatasetFormatError(
                f"images must be [n x D], got shape {images.shape}"
            )
        if images.size and (images.min() < 0.0 or images.max() > 1.0):
            raise DatasetFormatError("pixel values must lie in [0, 1]")
        object.__setattr__(self, "images", images)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (images.shape[0],):
                raise DatasetFormatError(
                    f"{labels.shape[0]} labels for "
                    f"{images.shape[0]} images"
                )
            if labels.size and labels.min() < 0:
                raise DatasetFormatError("labels must be >= 0")
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.images.shape[0]

    @property
    def data_dim(self) -> int:
        return self.images.shape[1]

    @property
    def num_classes(self) -> int:
        if self.labels is None or not self.labels.size:
            return 0
        return int(self.labels.max()) + 1

    def subset(self, indices: Sequence[int]) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        labels = None if self.labels is None else self.labels[indices]
        return Dataset(
            self.images[indices],
            labels,
            self.split,
            self.source,
            self.image_shape,
        )

    def sample(
        self, n: int, rng: np.random.Generator
    ) -> "Dataset":
        """Seeded subset of at most ``n`` examples, in original order."""
        if n >= len(self):
            return self
        picked = np.sort(rng.permutation(len(self))[:n])
        return self.subset(picked)
