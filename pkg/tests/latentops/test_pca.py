import numpy as np
import pytest

from priorlab.bundle import build_bundle
from priorlab.latentops import (
    pca_fit,
    pca_project,
    pca_reconstruct,
    pca_traverse,
    pca_traverse_latents,
)


@pytest.fixture
def cloud():
    rng = np.random.default_rng(0)
    return rng.normal(size=(500, 3)) * np.array([3.0, 1.0, 0.2])


def test_components_sorted_by_variance(cloud):
    """The first component follows the widest axis."""
    fit = pca_fit(cloud)
    assert np.all(np.diff(fit.variances) <= 0)
    assert abs(fit.components[0, 0]) > 0.99
    assert fit.variances[0] == pytest.approx(9.0, rel=0.15)


def test_sign_convention(cloud):
    """The largest-magnitude entry of each component is positive."""
    fit = pca_fit(-cloud)
    for row in fit.components:
        assert row[np.argmax(np.abs(row))] > 0


def test_full_rank_reconstruction(cloud):
    """Projecting on all components and back is lossless."""
    fit = pca_fit(cloud)
    coords = pca_project(fit, cloud[:5])
    assert np.allclose(pca_reconstruct(fit, coords), cloud[:5])


def test_fit_argument_checks(cloud):
    """k above d and too few samples are rejected."""
    with pytest.raises(ValueError):
        pca_fit(cloud, k=4)
    with pytest.raises(ValueError):
        pca_fit(cloud[:3])


def test_traverse_moves_along_one_component(cloud):
    """Only the chosen coordinate changes, in standard deviations."""
    fit = pca_fit(cloud)
    z = cloud[0]
    path = pca_traverse_latents(fit, z, 1, (-1.0, 1.0), steps=3)
    coords = pca_project(fit, path)
    base = pca_project(fit, z)[0]
    assert np.allclose(coords[:, 0], base[0])
    assert np.allclose(coords[:, 2], base[2])
    spread = coords[2, 1] - coords[0, 1]
    assert spread == pytest.approx(2.0 * np.sqrt(fit.variances[1]))
    with pytest.raises(IndexError):
        pca_traverse_latents(fit, z, 3)


def test_traverse_decodes(tiny_config, tiny_data):
    """Decoded traversals are images in [0, 1]."""
    train, _ = tiny_data
    bundle = build_bundle(tiny_config(), 16)
    fit = pca_fit(np.random.default_rng(1).normal(size=(20, 2)))
    images = pca_traverse(bundle, train.images[0], fit, 0, steps=4)
    assert images.shape == (4, 16)
    assert images.min() >= 0.0 and images.max() <= 1.0
