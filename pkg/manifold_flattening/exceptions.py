"""Exceptions raised by the manifold flattening simulator."""
from __future__ import annotations

from .const import EXIT_INSTABILITY, EXIT_USAGE


class ManifoldFlatteningError(Exception):
    """Base class for all simulator errors."""

    exit_code = EXIT_USAGE


class UsageError(ManifoldFlatteningError):
    """Invalid argument, configuration or input shape."""


class IngestionError(UsageError):
    """A point cloud file could not be read."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None) -> None:
        """Initialize with the 1-based row/column of the offending cell."""
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.row = row
        self.column = column


class ManifestError(UsageError):
    """A run directory is missing its manifest or the manifest is corrupt."""


class InstabilityError(ManifoldFlatteningError):
    """The integration produced non-finite values."""

    exit_code = EXIT_INSTABILITY

    def __init__(self, message: str, point_index: int | None = None, step_index: int | None = None) -> None:
        """Initialize with the offending point and step, when known."""
        super().__init__(message)
        self.point_index = point_index
        self.step_index = step_index
