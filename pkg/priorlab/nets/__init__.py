from priorlab.nets.autoencoder import (
    LOGVAR_MAX,
    LOGVAR_MIN,
    DecoderNet,
    EncoderNet,
    decode,
    encode,
    reparameterize,
)
from priorlab.nets.layers import (
    BatchNorm,
    DenseLayer,
    batchnorm,
    build_mlp,
    glorot_uniform,
    mlp_forward,
)
from priorlab.nets.module import Module

__all__ = [
    "BatchNorm",
    "DecoderNet",
    "DenseLayer",
    "EncoderNet",
    "LOGVAR_MAX",
    "LOGVAR_MIN",
    "Module",
    "batchnorm",
    "build_mlp",
    "decode",
    "encode",
    "glorot_uniform",
    "mlp_forward",
    "reparameterize",
]
