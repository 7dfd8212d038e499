from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    """
    In-memory form of a checkpoint or basis archive.

    ``blocks`` maps block names to float64 arrays. Parameter blocks use the
    parameter names (w0, b0, w1 or sigma, b1, w2, b2); optimizer moments are
    stored as ``opt.<group>.<moment>.<name>``. Factored checkpoints carry
    ``basis_id`` instead of the u and v blocks.
    """

    kind: str
    config_hash: str
    iteration: int = 0
    blocks: Dict[str, np.ndarray] = field(default_factory=dict)
    mode: Optional[str] = None
    basis_id: Optional[str] = None
    optimizers: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    rng_state: Optional[Dict[str, Any]] = None
    extra: Dict[str, Any] = field(default_factory=dict)
    version: int = FORMAT_VERSION

    def metadata(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "config_hash": self.config_hash,
            "iteration": self.iteration,
            "mode": self.mode,
            "basis_id": self.basis_id,
            "optimizers": self.optimizers,
            "rng_state": self.rng_state,
            "extra": self.extra,
        }

    def parameter_blocks(self) -> Dict[str, np.ndarray]:
        return {name: value for name, value in self.blocks.items() if not name.startswith("opt.")}

    def scalar_count(self) -> int:
        """Number of stored parameter scalars (optimizer moments excluded)."""
        return int(sum(value.size for value in self.parameter_blocks().values()))
