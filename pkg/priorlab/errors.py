"""Exception hierarchy shared by every priorlab subpackage."""

from typing import Optional, Sequence, Tuple


class PriorLabError(Exception):
    """Base class for all priorlab errors."""


class ShapeError(PriorLabError, ValueError):
    """Raised when operand shapes do not conform for an operation."""

    def __init__(
        self,
        kind: str,
        shapes: Sequence[Tuple[int, ...]],
        detail: Optional[str] = None,
    ):
        self.kind = kind
        self.shapes = tuple(tuple(s) for s in shapes)
        shown = " vs ".join(str(s) for s in self.shapes)
        message = f"{kind}: incompatible shapes {shown}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class DomainError(PriorLabError, ValueError):
    """Raised in checked mode when an input leaves an op's domain."""


class GraphError(PriorLabError, RuntimeError):
    """Raised on misuse of the differentiation graph."""


class NonFiniteError(PriorLabError, FloatingPointError):
    """Raised when a value that must be finite is NaN or infinite."""

    def __init__(self, term: str, detail: Optional[str] = None):
        self.term = term
        message = f"non-finite value in {term}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class UnsupportedOperationError(PriorLabError, NotImplementedError):
    """Raised when an operation is not defined for a configuration."""


class ConfigError(PriorLabError, ValueError):
    """Raised for unreadable or invalid configuration."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        key: Optional[str] = None,
    ):
        self.line = line
        self.key = key
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CheckpointError(PriorLabError, ValueError):
    """Raised when a checkpoint file cannot be read back."""

    def __init__(self, reason: str, detail: Optional[str] = None):
        self.reason = reason
        message = reason if detail is None else f"{reason}: {detail}"
        super().__init__(message)


class DatasetFormatError(PriorLabError, ValueError):
    """Raised for malformed dataset files."""


class MetricError(PriorLabError, ValueError):
    """Raised when a metric cannot be computed from its inputs."""
