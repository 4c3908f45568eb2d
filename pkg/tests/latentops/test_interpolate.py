import numpy as np
import pytest

from priorlab.bundle import build_bundle
from priorlab.errors import DomainError, UnsupportedOperationError
from priorlab.latentops import (
    InterpolationSpec,
    decode_latents,
    encode_latents,
    from_z0,
    interpolate_latents,
    interpolate_sequence,
    lerp,
    slerp,
    to_z0,
)


def test_lerp_midpoint_and_ends():
    """lerp hits both endpoints and the midpoint."""
    a, b = np.array([0.0, 0.0]), np.array([2.0, 4.0])
    assert np.allclose(lerp(a, b, 0.0), a)
    assert np.allclose(lerp(a, b, 1.0), b)
    assert np.allclose(lerp(a, b, 0.5), [1.0, 2.0])


def test_lerp_is_affine():
    """lerp(t1) + lerp(t2) = 2 lerp((t1 + t2) / 2)."""
    a, b = np.array([1.0, -1.0]), np.array([3.0, 5.0])
    left = lerp(a, b, 0.2) + lerp(a, b, 0.7)
    assert np.allclose(left, 2.0 * lerp(a, b, 0.45))


def test_slerp_orthonormal_midpoint():
    """Orthonormal endpoints meet at (a + b) / sqrt(2)."""
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    mid = slerp(a, b, 0.5)
    assert np.allclose(mid, [0.70711, 0.70711], atol=1e-5)
    assert np.allclose(slerp(a, b, 0.0), a)
    assert np.allclose(slerp(a, b, 1.0), b)


def test_slerp_parallel_falls_back_to_lerp():
    """Parallel endpoints give the straight line."""
    a, b = np.array([1.0, 1.0]), np.array([2.0, 2.0])
    assert np.allclose(slerp(a, b, 0.25), lerp(a, b, 0.25))


def test_slerp_rejects_zero_vectors():
    """Directions of zero vectors are undefined."""
    with pytest.raises(DomainError):
        slerp(np.zeros(2), np.ones(2), 0.5)


def test_spec_defaults():
    """Z0 defaults to slerp, ZT to lerp; two steps minimum."""
    assert InterpolationSpec("Z0").scheme == "slerp"
    assert InterpolationSpec("ZT").scheme == "lerp"
    with pytest.raises(ValueError):
        InterpolationSpec(steps=1)


@pytest.fixture
def flow_bundle(tiny_config):
    return build_bundle(tiny_config(), 16)


def test_two_steps_are_reconstructions(flow_bundle, tiny_data):
    """With two steps the sequence is the endpoint reconstructions."""
    train, _ = tiny_data
    x_a, x_b = train.images[0], train.images[1]
    seq = interpolate_sequence(
        flow_bundle, x_a, x_b, InterpolationSpec("ZT", steps=2)
    )
    recon = decode_latents(
        flow_bundle, encode_latents(flow_bundle, np.stack([x_a, x_b]))
    )
    assert seq.shape == (2, 16)
    assert np.allclose(seq, np.clip(recon, 0.0, 1.0))


def test_sequence_length_and_range(flow_bundle, tiny_data):
    """Every step is an image in [0, 1]."""
    train, _ = tiny_data
    seq = interpolate_sequence(
        flow_bundle,
        train.images[0],
        train.images[5],
        InterpolationSpec("Z0", steps=7),
    )
    assert seq.shape == (7, 16)
    assert seq.min() >= 0.0 and seq.max() <= 1.0


def test_identity_flow_spaces_agree(tiny_config):
    """Without couplings Z0 and ZT paths coincide for one scheme."""
    bundle = build_bundle(tiny_config("flow_depth=0"), 16)
    a, b = np.array([1.0, -0.5]), np.array([-0.3, 2.0])
    z0_path = interpolate_latents(
        bundle, a, b, InterpolationSpec("Z0", "lerp", 5)
    )
    zt_path = interpolate_latents(
        bundle, a, b, InterpolationSpec("ZT", "lerp", 5)
    )
    assert np.allclose(z0_path, zt_path)


def test_z0_mapping_round_trip(flow_bundle):
    """from_z0 inverts to_z0."""
    z = np.random.default_rng(0).normal(size=(4, 2))
    assert np.allclose(from_z0(flow_bundle, to_z0(flow_bundle, z)), z)


def test_z0_needs_flow(tiny_config, tiny_data):
    """Z0 interpolation without a flow prior is unsupported."""
    train, _ = tiny_data
    bundle = build_bundle(tiny_config("prior=standard_normal"), 16)
    with pytest.raises(UnsupportedOperationError):
        interpolate_sequence(
            bundle,
            train.images[0],
            train.images[1],
            InterpolationSpec("Z0"),
        )


def test_posterior_sample_endpoints_are_seeded(flow_bundle, tiny_data):
    """Sampled endpoints depend only on the rng seed."""
    train, _ = tiny_data
    spec = InterpolationSpec("ZT", steps=3)
    runs = [
        interpolate_sequence(
            flow_bundle,
            train.images[0],
            train.images[1],
            spec,
            np.random.default_rng(9),
        )
        for _ in range(2)
    ]
    assert np.array_equal(runs[0], runs[1])
