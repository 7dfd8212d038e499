from dataclasses import dataclass

import numpy as np

from svd_pinns.exceptions import DimensionError


@dataclass(frozen=True)
class Jet:
    """
    Network output and its input derivatives at a batch of n points.

    Shapes: value (n, r), dt (n, r), grad_x (n, r, d), laplacian_x (n, r).
    """

    value: np.ndarray
    dt: np.ndarray
    grad_x: np.ndarray
    laplacian_x: np.ndarray

    def __post_init__(self):
        n, r = self.value.shape
        d = self.grad_x.shape[2]
        expected = {
            "dt": (n, r),
            "grad_x": (n, r, d),
            "laplacian_x": (n, r),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise DimensionError(
                    f"jet.{name} has shape {getattr(self, name).shape}, expected {shape}"
                )

    @property
    def count(self) -> int:
        return self.value.shape[0]

    @property
    def out_dim(self) -> int:
        return self.value.shape[1]

    @property
    def spatial_dim(self) -> int:
        return self.grad_x.shape[2]

    @classmethod
    def zeros(cls, n: int, r: int, d: int) -> "Jet":
        return cls(
            value=np.zeros((n, r)),
            dt=np.zeros((n, r)),
            grad_x=np.zeros((n, r, d)),
            laplacian_x=np.zeros((n, r)),
        )

    def is_finite(self) -> bool:
        return all(
            np.all(np.isfinite(part))
            for part in (self.value, self.dt, self.grad_x, self.laplacian_x)
        )
