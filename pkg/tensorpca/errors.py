"""Exception hierarchy shared by every tensorpca module."""
from __future__ import annotations

from typing import Any, Optional


class TensorPCAError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(TensorPCAError, ValueError):
    """Bad dimension, radius, variance, vector or tag."""


class DegenerateInputError(TensorPCAError):
    """Input has no usable direction (e.g. an all-zero z vector)."""


class DegenerateStepError(TensorPCAError):
    """A contraction or matvec produced a (near-)zero vector."""


class StalledError(TensorPCAError):
    """Line search made no progress; carries the best point seen so far."""

    def __init__(self, message: str, best_point: Any = None, best_value: float = float("nan"),
                 stage: Optional[int] = None):
        super().__init__(message)
        self.best_point = best_point
        self.best_value = best_value
        self.stage = stage

    def at_stage(self, stage: int) -> "StalledError":
        err = StalledError(f"stage {stage}: {self}", self.best_point, self.best_value, stage)
        return err


class NonConvergenceError(TensorPCAError):
    """An iterative eigen-solver ran out of iterations."""

    def __init__(self, message: str, estimate: Any = None):
        super().__init__(message)
        self.estimate = estimate


class ResourceGuardError(TensorPCAError):
    """Refused: dimension or storage above the configured budget."""


class TensorFileError(TensorPCAError, OSError):
    """Malformed tensor file, or an I/O failure with path context."""
