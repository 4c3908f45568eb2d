from dotenv import load_dotenv

load_dotenv()

from priorlab.errors import PriorLabError  # noqa: E402
from priorlab.schemas import TrainConfig  # noqa: E402
from priorlab.bundle import ModelBundle, build_bundle  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "ModelBundle",
    "PriorLabError",
    "TrainConfig",
    "build_bundle",
]
