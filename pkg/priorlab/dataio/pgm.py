from pathlib import Path
from typing import Tuple, Union

import numpy as np

from priorlab.errors import ShapeError


def to_bytes(values: np.ndarray) -> np.ndarray:
    """[0, 1] floats to bytes, clamped, rounding half up."""
    clipped = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    return np.floor(clipped * 255.0 + 0.5).astype(np.uint8)


def write_image_grid(
    images: np.ndarray,
    rows: int,
    cols: int,
    path: Union[str, Path],
    image_shape: Tuple[int, int] = (28, 28),
) -> Path:
    """
    Tile flattened images row-major into one binary PGM (P5) file.

    Cells past the last image stay black.
    """
    images = np.asarray(images, dtype=np.float64)
    if images.ndim == 1:
        images = images[None, :]
    height, width = image_shape
    if images.shape[1] != height * width:
        raise ShapeError(
            "write_image_grid",
            [images.shape, image_shape],
            "pixel count does not match the image shape",
        )
    if images.shape[0] > rows * cols:
        raise ValueError(
            f"{images.shape[0]} images do not fit a {rows}x{cols} grid"
        )
    canvas = np.zeros((rows * height, cols * width), dtype=np.uint8)
    for k, image in enumerate(images):
        r, c = divmod(k, cols)
        canvas[
            r * height : (r + 1) * height, c * width : (c + 1) * width
        ] = to_bytes(image.reshape(height, width))
    header = f"P5\n{cols * width} {rows * height}\n255\n".encode("ascii")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(header + canvas.tobytes())
    return path
