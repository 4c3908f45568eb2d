import numpy as np
import pytest

from priorlab.dataio import Dataset, write_container
from priorlab.errors import CheckpointError, MetricError
from priorlab.gradcore import Tensor
from priorlab.metrics import load_probe, log_softmax, save_probe, train_probe


def test_log_softmax_normalizes():
    """exp(log_softmax) sums to one per row."""
    out = log_softmax(Tensor(np.array([[1.0, 2.0, 3.0], [0.0, 0.0, 0.0]])))
    assert np.allclose(np.exp(out.data).sum(axis=1), 1.0)
    assert out.data[1, 0] == pytest.approx(-np.log(3.0))


def test_probe_is_seeded(tiny_data):
    """The same seed gives identical weights."""
    train, _ = tiny_data
    a = train_probe(train, seed=4, epochs=1)
    b = train_probe(train, seed=4, epochs=1)
    for p, q in zip(a.parameters(), b.parameters()):
        assert np.array_equal(p.data, q.data)
    assert a.held_out_accuracy is not None


def test_probe_learns_separated_modes(tiny_data):
    """Two well separated modes are classified almost perfectly."""
    train, test = tiny_data
    probe = train_probe(train, seed=0, epochs=30, batch_size=16, lr=1e-2)
    accuracy = np.mean(probe.predict(test.images) == test.labels)
    assert accuracy > 0.9


def test_features_shape(tiny_data):
    """Features are the 64-wide penultimate activations."""
    train, _ = tiny_data
    probe = train_probe(train, seed=0, epochs=1)
    feats = probe.features(train.images[:5])
    assert feats.shape == (5, 64)
    assert np.array_equal(feats, probe.features(train.images[:5]))


def test_probe_needs_labels():
    """Unlabelled data cannot train a probe."""
    with pytest.raises(MetricError):
        train_probe(Dataset(np.zeros((4, 3))))


def test_save_and_load(tmp_path, tiny_data):
    """A saved probe reloads with identical features."""
    train, _ = tiny_data
    probe = train_probe(train, seed=1, epochs=1)
    path = save_probe(probe, tmp_path / "probe.lfck")
    loaded = load_probe(path)
    assert loaded.seed == 1
    assert np.allclose(
        loaded.features(train.images), probe.features(train.images)
    )


def test_load_rejects_other_containers(tmp_path):
    """Only containers of kind probe are accepted."""
    path = write_container(tmp_path / "x.lfck", {"kind": "model"}, {})
    with pytest.raises(CheckpointError):
        load_probe(path)
