from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np


@dataclass(frozen=True)
class LossReport:
    """Terms of the PINN objective; total = nu * interior + boundary + initial."""

    interior_term: float
    boundary_term: float
    initial_term: float
    nu: float

    @property
    def total(self) -> float:
        return self.nu * self.interior_term + self.boundary_term + self.initial_term

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.total))


@dataclass(frozen=True)
class ErrorReport:
    relative_error: float
    n_points: int
    problem: str
    epsilon: float
    iteration: int = 0


@dataclass(frozen=True)
class RunRecord:
    iteration: int
    loss: LossReport
    relative_error: float
    wall_ms: float
    sigma: Optional[np.ndarray] = None

    def as_row(self, sigma_head: int = 0) -> Dict[str, float]:
        """Flatten into one CSV row (column names of the run log)."""
        row = {
            "iter": self.iteration,
            "loss_total": self.loss.total,
            "loss_int": self.loss.interior_term,
            "loss_bc": self.loss.boundary_term,
            "loss_ic": self.loss.initial_term,
            "rel_err": self.relative_error,
            "wall_ms": self.wall_ms,
        }
        for k in range(sigma_head):
            value = np.nan
            if self.sigma is not None and k < self.sigma.shape[0]:
                value = float(self.sigma[k])
            row[f"sigma_{k}"] = value
        return row
