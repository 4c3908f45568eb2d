from priorlab.schemas.config import (
    DataConfig,
    MetricsConfig,
    ModelConfig,
    ObjectiveConfig,
    TrainConfig,
)

__all__ = [
    "DataConfig",
    "MetricsConfig",
    "ModelConfig",
    "ObjectiveConfig",
    "TrainConfig",
]
