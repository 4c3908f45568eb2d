"""
Reader and writer for the big-endian IDX format used by MNIST.

Header: two zero bytes, a type byte (0x08 = unsigned byte), the number
of dimensions, then one u32 per dimension. Gzip-compressed files are
recognized by their magic bytes and read transparently.
"""

import gzip
import os
import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np
from dotenv import load_dotenv
from loguru import logger

from priorlab.dataio.dataset import Dataset
from priorlab.errors import DatasetFormatError

PathLike = Union[str, Path]

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
_UBYTE = 0x08
_GZIP_MAGIC = b"\x1f\x8b"

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def _read_bytes(path: PathLike) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == _GZIP_MAGIC:
        raw = gzip.decompress(raw)
    return raw


def read_idx(path: PathLike, expected_magic: Optional[int] = None):
    """Parse one IDX file into a uint8 array."""
    raw = _read_bytes(path)
    if len(raw) < 4:
        raise DatasetFormatError(
            f"{path}: truncated header ({len(raw)} bytes)"
        )
    (magic,) = struct.unpack(">I", raw[:4])
    ndim = magic & 0xFF
    if magic >> 16 != 0 or (magic >> 8) & 0xFF != _UBYTE or ndim == 0:
        raise DatasetFormatError(f"{path}: bad magic 0x{magic:08x}")
    if expected_magic is not None and magic != expected_magic:
        raise DatasetFormatError(
            f"{path}: bad magic 0x{magic:08x}, "
            f"expected 0x{expected_magic:08x}"
        )
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise DatasetFormatError(
            f"{path}: truncated header ({len(raw)} bytes)"
        )
    dims = struct.unpack(f">{ndim}I", raw[4:header])
    expected = int(np.prod(dims))
    actual = len(raw) - header
    if actual < expected:
        raise DatasetFormatError(
            f"{path}: truncated payload: expected {expected} bytes, "
            f"got {actual}"
        )
    payload = np.frombuffer(raw, dtype=np.uint8, count=expected, offset=header)
    return payload.reshape(dims)


def write_idx(path: PathLike, array: np.ndarray, compress: bool = False):
    """Write a uint8 array as IDX; ``compress`` gzips the result."""
    array = np.asarray(array)
    if array.dtype != np.uint8:
        raise DatasetFormatError(
            f"IDX export needs uint8 values, got {array.dtype}"
        )
    header = struct.pack(
        f">I{array.ndim}I", (_UBYTE << 8) | array.ndim, *array.shape
    )
    raw = header + array.tobytes(order="C")
    if compress:
        raw = gzip.compress(raw, mtime=0)
    Path(path).write_bytes(raw)


def load_idx(
    images_path: PathLike,
    labels_path: Optional[PathLike] = None,
    split: str = "train",
) -> Dataset:
    images = read_idx(images_path, IMAGES_MAGIC)
    labels = None
    if labels_path is not None:
        labels = read_idx(labels_path, LABELS_MAGIC)
        if labels.shape[0] != images.shape[0]:
            raise DatasetFormatError(
                f"count mismatch: {images.shape[0]} images vs "
                f"{labels.shape[0]} labels"
            )
    n, height, width = images.shape
    return Dataset(
        images.reshape(n, height * width).astype(np.float64) / 255.0,
        labels,
        split,
        str(images_path),
        (height, width),
    )


def resolve_data_dir(data_dir: Optional[PathLike] = None) -> Path:
    """Explicit directory, else PRIORLAB_DATA_DIR (``.env`` honoured)."""
    if data_dir is None:
        load_dotenv()
        data_dir = os.getenv("PRIORLAB_DATA_DIR")
    if not data_dir:
        raise DatasetFormatError(
            "no MNIST directory given and PRIORLAB_DATA_DIR is unset"
        )
    return Path(data_dir)


def _find(directory: Path, stem: str) -> Optional[Path]:
    for name in (stem, f"{stem}.gz"):
        candidate = directory / name
        if candidate.exists():
            return candidate
    return None


def mnist_available(data_dir: Optional[PathLike] = None) -> bool:
    try:
        directory = resolve_data_dir(data_dir)
    except DatasetFormatError:
        return False
    return all(
        _find(directory, stem) is not None
        for pair in MNIST_FILES.values()
        for stem in pair
    )


def load_mnist(
    data_dir: Optional[PathLike] = None,
    split: str = "train",
    subset: Optional[int] = None,
    seed: int = 0,
) -> Dataset:
    """Load an MNIST split, optionally a seeded subset of it."""
    if split not in MNIST_FILES:
        raise ValueError(f"split must be train or test, got {split!r}")
    directory = resolve_data_dir(data_dir)
    images_stem, labels_stem = MNIST_FILES[split]
    images_path = _find(directory, images_stem)
    labels_path = _find(directory, labels_stem)
    if images_path is None or labels_path is None:
        raise DatasetFormatError(
            f"{directory}: missing {images_stem} or {labels_stem}"
        )
    dataset = load_idx(images_path, labels_path, split)
    if subset is not None:
        dataset = dataset.sample(subset, np.random.default_rng(seed))
    logger.info(
        f"loaded MNIST {split}: {len(dataset)} images from {directory}"
    )
    return dataset
