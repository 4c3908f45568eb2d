"""
The LFCK container: named float64 arrays plus JSON metadata.

Layout, all integers little-endian::

    b"LFCK" | u32 version | u32 len + metadata JSON (UTF-8)
    | u32 block count
    | per block: u32 len + name (UTF-8) | u32 rank | u64 dims...
      | float64 values
    | u32 CRC32 of everything before it

Writing the same metadata and arrays always produces the same bytes.
"""

import json
import struct
import zlib
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple, Union

import numpy as np

from priorlab.errors import CheckpointError

MAGIC = b"LFCK"
VERSION = 1

PathLike = Union[str, Path]


def encode(
    metadata: Mapping[str, Any], blocks: Mapping[str, np.ndarray]
) -> bytes:
    meta = json.dumps(
        metadata, sort_keys=True, separators=(",", ":")
    ).encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<I", VERSION),
        struct.pack("<I", len(meta)),
        meta,
        struct.pack("<I", len(blocks)),
    ]
    for name, array in blocks.items():
        values = np.ascontiguousarray(array, dtype="<f8")
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<I", values.ndim))
        parts.append(struct.pack(f"<{values.ndim}Q", *values.shape))
        parts.append(values.tobytes(order="C"))
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


class _Reader:
    def __init__(self, raw: bytes):
        self.raw = raw
        self.offset = 0

    def take(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self.raw):
            raise CheckpointError(
                "truncated",
                f"needed {end} bytes, file has {len(self.raw)}",
            )
        chunk = self.raw[self.offset : end]
        self.offset = end
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]


def decode(raw: bytes) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    """
    Parse a container.

    Raises:
        CheckpointError: reason ``bad magic``, ``unsupported version``,
            ``truncated`` or ``crc mismatch``.
    """
    reader = _Reader(raw)
    magic = raw[:4]
    if magic != MAGIC:
        raise CheckpointError("bad magic", repr(magic))
    reader.take(4)
    version = reader.u32()
    if version != VERSION:
        raise CheckpointError(
            "unsupported version", f"{version} (expected {VERSION})"
        )
    meta_raw = reader.take(reader.u32())
    count = reader.u32()
    blocks: Dict[str, np.ndarray] = {}
    for _ in range(count):
        name = reader.take(reader.u32()).decode("utf-8")
        rank = reader.u32()
        dims = struct.unpack(f"<{rank}Q", reader.take(8 * rank))
        size = int(np.prod(dims)) if rank else 1
        values = np.frombuffer(reader.take(8 * size), dtype="<f8")
        blocks[name] = values.reshape(dims).astype(np.float64)
    body_end = reader.offset
    (stored,) = struct.unpack("<I", reader.take(4))
    if reader.offset != len(raw):
        raise CheckpointError(
            "trailing bytes", f"{len(raw) - reader.offset} after CRC"
        )
    if zlib.crc32(raw[:body_end]) & 0xFFFFFFFF != stored:
        raise CheckpointError("crc mismatch")
    try:
        metadata = json.loads(meta_raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise CheckpointError("bad metadata", str(err)) from None
    return metadata, blocks


def write_container(
    path: PathLike,
    metadata: Mapping[str, Any],
    blocks: Mapping[str, np.ndarray],
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode(metadata, blocks))
    return path


def read_container(
    path: PathLike,
) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    return decode(Path(path).read_bytes())
