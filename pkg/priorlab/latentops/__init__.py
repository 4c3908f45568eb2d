from priorlab.latentops.interpolate import (
    InterpolationSpec,
    decode_latents,
    default_scheme,
    encode_latents,
    from_z0,
    interpolate_latents,
    interpolate_sequence,
    lerp,
    slerp,
    to_z0,
)
from priorlab.latentops.directions import (
    RateProfile,
    SemanticDirection,
    direction_paths,
    rate_of_change_profile,
    semantic_direction,
    write_profile_csv,
)
from priorlab.latentops.pca import (
    PCAFit,
    pca_fit,
    pca_project,
    pca_reconstruct,
    pca_traverse,
    pca_traverse_latents,
)

__all__ = [
    "InterpolationSpec",
    "PCAFit",
    "RateProfile",
    "SemanticDirection",
    "decode_latents",
    "default_scheme",
    "direction_paths",
    "encode_latents",
    "from_z0",
    "interpolate_latents",
    "interpolate_sequence",
    "lerp",
    "pca_fit",
    "pca_project",
    "pca_reconstruct",
    "pca_traverse",
    "pca_traverse_latents",
    "rate_of_change_profile",
    "semantic_direction",
    "slerp",
    "to_z0",
    "write_profile_csv",
]
