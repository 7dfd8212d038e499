from dataclasses import dataclass
from enum import Enum

import numpy as np

from svd_pinns.exceptions import DimensionError


class SampleKind(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    INITIAL = "initial"
    TEST = "test"


@dataclass(frozen=True)
class SampleBatch:
    """Collocation points: times (n,) and spatial points (n, d)."""

    kind: SampleKind
    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        if self.points.ndim != 2 or self.times.shape != (self.points.shape[0],):
            raise DimensionError(
                f"{self.kind.value} batch has times {self.times.shape} "
                f"and points {self.points.shape}"
            )

    @property
    def count(self) -> int:
        return self.times.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def concat(self, other: "SampleBatch") -> "SampleBatch":
        if other.kind != self.kind:
            raise DimensionError(f"cannot join {self.kind.value} and {other.kind.value} batches")
        return SampleBatch(
            self.kind,
            np.concatenate([self.times, other.times]),
            np.concatenate([self.points, other.points]),
        )


@dataclass(frozen=True)
class TrainingSet:
    interior: SampleBatch
    boundary: SampleBatch
    initial: SampleBatch

    def batches(self):
        return (self.interior, self.boundary, self.initial)
