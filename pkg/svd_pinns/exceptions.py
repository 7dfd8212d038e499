"""
Error types raised across the solver toolkit.

Numerical services raise these directly; the command layer turns
ConfigurationError into click usage errors and reports everything else with
the offending path, group or key attached.
"""

from typing import Iterable, Optional


class SvdPinnsError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(SvdPinnsError, ValueError):
    """Array shapes do not fit together."""


class NumericError(SvdPinnsError, ArithmeticError):
    """A non-finite value appeared where a finite one is required."""

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message)
        self.stage = stage


class ConvergenceError(NumericError):
    """Jacobi sweeps ran out before the columns became orthogonal."""

    def __init__(self, off_diagonal: float, sweeps: int):
        super().__init__(
            f"SVD did not converge after {sweeps} sweeps "
            f"(achieved off-diagonal measure {off_diagonal:.3e})",
            stage="svd",
        )
        self.off_diagonal = off_diagonal
        self.sweeps = sweeps


class PointRejectedError(SvdPinnsError, ValueError):
    """Evaluation requested on a singular shell (origin or unit sphere)."""


class ConfigurationError(SvdPinnsError, ValueError):
    """Invalid run configuration; lists every offending key."""

    def __init__(self, message: str, keys: Iterable[str] = ()):
        self.keys = sorted(set(keys))
        if self.keys:
            message = f"{message} (offending keys: {', '.join(self.keys)})"
        super().__init__(message)


class TrainingDivergedError(NumericError):
    """Loss became non-finite; keeps the last finite record for diagnostics."""

    def __init__(self, iteration: int, last_record=None):
        super().__init__(
            f"Loss became non-finite at iteration {iteration}", stage="training"
        )
        self.iteration = iteration
        self.last_record = last_record


class CheckpointError(SvdPinnsError, ValueError):
    """A checkpoint or basis archive could not be read or does not fit."""
