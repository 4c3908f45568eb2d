import numpy as np
import pytest

from priorlab.dataio import (
    MAGIC,
    decode,
    encode,
    read_container,
    write_container,
)
from priorlab.errors import CheckpointError


@pytest.fixture
def payload():
    meta = {"kind": "model", "epoch": 3}
    blocks = {
        "param/w": np.arange(6.0).reshape(2, 3),
        "scalar": np.array(2.5),
    }
    return meta, blocks


def test_decode_restores_blocks(payload):
    """Names, shapes and values come back unchanged."""
    meta, blocks = payload
    got_meta, got_blocks = decode(encode(meta, blocks))
    assert got_meta == meta
    assert list(got_blocks) == ["param/w", "scalar"]
    assert got_blocks["param/w"].shape == (2, 3)
    assert np.array_equal(got_blocks["param/w"], blocks["param/w"])
    assert got_blocks["scalar"].shape == ()


def test_encoding_is_deterministic(payload):
    """Equal inputs give identical bytes, metadata key order aside."""
    meta, blocks = payload
    reordered = {"epoch": 3, "kind": "model"}
    assert encode(meta, blocks) == encode(reordered, blocks)


def test_header_layout(payload):
    """The file starts with the magic and version 1."""
    raw = encode(*payload)
    assert raw[:4] == MAGIC
    assert raw[4:8] == (1).to_bytes(4, "little")


def test_bad_magic(payload):
    """A different magic is rejected by reason."""
    raw = b"XXXX" + encode(*payload)[4:]
    with pytest.raises(CheckpointError) as info:
        decode(raw)
    assert info.value.reason == "bad magic"


def test_truncated(payload):
    """Cutting the file short is detected."""
    raw = encode(*payload)
    with pytest.raises(CheckpointError) as info:
        decode(raw[:-12])
    assert info.value.reason == "truncated"


def test_corrupted_value(payload):
    """A flipped payload byte fails the CRC."""
    raw = bytearray(encode(*payload))
    raw[-10] ^= 0xFF
    with pytest.raises(CheckpointError) as info:
        decode(bytes(raw))
    assert info.value.reason == "crc mismatch"


def test_unsupported_version(payload):
    """Only version 1 is read."""
    raw = bytearray(encode(*payload))
    raw[4] = 2
    with pytest.raises(CheckpointError) as info:
        decode(bytes(raw))
    assert info.value.reason == "unsupported version"


def test_file_helpers(tmp_path, payload):
    """write_container creates parents and read_container reads back."""
    path = write_container(tmp_path / "a" / "b.lfck", *payload)
    meta, blocks = read_container(path)
    assert meta["epoch"] == 3
    assert np.array_equal(blocks["param/w"], payload[1]["param/w"])
