"""
Parameter containers for the two-hidden-layer network.

    u(t, x) = W2 · tanh(W1 · tanh(W0 · (t, x) + b0) + b1) + b2

W1 is stored either densely or as frozen singular vectors with trainable
singular values (W1 = U · diag(sigma) · Vᵀ).
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Optional, Union

import numpy as np

from svd_pinns.exceptions import DimensionError, NumericError

ORTHONORMALITY_TOLERANCE = 1e-8


class Activation(str, Enum):
    TANH = "tanh"


def _as_array(value, name: str, ndim: int) -> np.ndarray:
    array = np.array(value, dtype=np.float64)
    if array.ndim != ndim:
        raise DimensionError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise NumericError(f"{name} contains non-finite entries", stage=name)
    return array


@dataclass(frozen=True)
class DenseHidden:
    w1: np.ndarray

    def __post_init__(self):
        w1 = _as_array(self.w1, "w1", 2)
        if w1.shape[0] != w1.shape[1]:
            raise DimensionError(f"w1 must be square, got shape {w1.shape}")
        object.__setattr__(self, "w1", w1)

    @property
    def width(self) -> int:
        return self.w1.shape[0]

    def matrix(self) -> np.ndarray:
        return self.w1


@dataclass(frozen=True)
class FactoredHidden:
    """Hidden weight W1 = u · diag(sigma) · vᵀ with u and v frozen."""

    u: np.ndarray
    v: np.ndarray
    sigma: np.ndarray
    check_basis: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        u = _as_array(self.u, "u", 2)
        v = _as_array(self.v, "v", 2)
        sigma = _as_array(self.sigma, "sigma", 1)
        m = sigma.shape[0]
        if u.shape != (m, m) or v.shape != (m, m):
            raise DimensionError(
                f"factors must be {m}x{m}, got u {u.shape} and v {v.shape}"
            )
        if np.any(sigma < 0):
            raise NumericError("sigma must be nonnegative", stage="sigma")
        if self.check_basis:
            identity = np.eye(m)
            for name, factor in (("u", u), ("v", v)):
                defect = np.max(np.abs(factor.T @ factor - identity)) if m else 0.0
                if defect > ORTHONORMALITY_TOLERANCE:
                    raise DimensionError(
                        f"{name} is not orthonormal (deviation {defect:.3e})"
                    )
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "sigma", sigma)

    @property
    def width(self) -> int:
        return self.sigma.shape[0]

    def matrix(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T


HiddenWeight = Union[DenseHidden, FactoredHidden]


@dataclass(frozen=True)
class NetworkParams:
    w0: np.ndarray
    b0: np.ndarray
    hidden: HiddenWeight
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    activation: Activation = Activation.TANH

    def __post_init__(self):
        w0 = _as_array(self.w0, "w0", 2)
        b0 = _as_array(self.b0, "b0", 1)
        b1 = _as_array(self.b1, "b1", 1)
        w2 = _as_array(self.w2, "w2", 2)
        b2 = _as_array(self.b2, "b2", 1)
        m = self.hidden.width
        if w0.shape[0] != m or b0.shape != (m,) or b1.shape != (m,):
            raise DimensionError(
                f"first layer shapes w0 {w0.shape}, b0 {b0.shape}, b1 {b1.shape} "
                f"do not match hidden width {m}"
            )
        if w2.shape[1] != m or b2.shape != (w2.shape[0],):
            raise DimensionError(
                f"output layer shapes w2 {w2.shape}, b2 {b2.shape} do not match width {m}"
            )
        for name, value in (("w0", w0), ("b0", b0), ("b1", b1), ("w2", w2), ("b2", b2)):
            object.__setattr__(self, name, value)

    @property
    def d_in(self) -> int:
        return self.w0.shape[1]

    @property
    def width(self) -> int:
        return self.hidden.width

    @property
    def out_dim(self) -> int:
        return self.w2.shape[0]

    @property
    def is_factored(self) -> bool:
        return isinstance(self.hidden, FactoredHidden)

    def w1(self) -> np.ndarray:
        """Effective hidden matrix."""
        return self.hidden.matrix()

    def blocks(self) -> Dict[str, np.ndarray]:
        """Named parameter arrays; factored weights expose u, v and sigma."""
        blocks = {"w0": self.w0, "b0": self.b0, "b1": self.b1, "w2": self.w2, "b2": self.b2}
        if self.is_factored:
            blocks.update(u=self.hidden.u, v=self.hidden.v, sigma=self.hidden.sigma)
        else:
            blocks["w1"] = self.hidden.w1
        return blocks

    def with_blocks(self, updates: Dict[str, np.ndarray]) -> "NetworkParams":
        """Return a copy with the named blocks replaced."""
        unknown = set(updates) - set(self.blocks())
        if unknown:
            raise DimensionError(f"unknown parameter blocks: {sorted(unknown)}")
        hidden = self.hidden
        if "w1" in updates:
            hidden = DenseHidden(updates["w1"])
        elif {"u", "v", "sigma"} & set(updates):
            hidden = FactoredHidden(
                updates.get("u", hidden.u),
                updates.get("v", hidden.v),
                updates.get("sigma", hidden.sigma),
                check_basis=bool({"u", "v"} & set(updates)),
            )
        layer_updates = {
            name: value for name, value in updates.items() if name in ("w0", "b0", "b1", "w2", "b2")
        }
        for name, value in layer_updates.items():
            if np.shape(value) != getattr(self, name).shape:
                raise DimensionError(
                    f"{name} has shape {np.shape(value)}, expected {getattr(self, name).shape}"
                )
        return replace(self, hidden=hidden, **layer_updates)

    def densified(self) -> "NetworkParams":
        """Same network with W1 stored as a dense matrix."""
        if not self.is_factored:
            return self
        return replace(self, hidden=DenseHidden(self.hidden.matrix()))

    def copy(self) -> "NetworkParams":
        return self.with_blocks({name: value.copy() for name, value in self.blocks().items()})


@dataclass
class ParamGrad:
    """Gradient of a scalar with respect to every parameter block.

    ``w1`` always holds the gradient with respect to the effective hidden matrix;
    ``sigma`` is filled when the hidden weight is factored.
    """

    w0: np.ndarray
    b0: np.ndarray
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    sigma: Optional[np.ndarray] = None

    @classmethod
    def zeros_like(cls, params: NetworkParams) -> "ParamGrad":
        return cls(
            w0=np.zeros_like(params.w0),
            b0=np.zeros_like(params.b0),
            w1=np.zeros((params.width, params.width)),
            b1=np.zeros_like(params.b1),
            w2=np.zeros_like(params.w2),
            b2=np.zeros_like(params.b2),
            sigma=np.zeros(params.width) if params.is_factored else None,
        )

    def blocks(self) -> Dict[str, np.ndarray]:
        blocks = {
            "w0": self.w0,
            "b0": self.b0,
            "w1": self.w1,
            "b1": self.b1,
            "w2": self.w2,
            "b2": self.b2,
        }
        if self.sigma is not None:
            blocks["sigma"] = self.sigma
        return blocks

    def __add__(self, other: "ParamGrad") -> "ParamGrad":
        if (self.sigma is None) != (other.sigma is None):
            raise DimensionError("cannot add dense and factored gradients")
        return ParamGrad(
            w0=self.w0 + other.w0,
            b0=self.b0 + other.b0,
            w1=self.w1 + other.w1,
            b1=self.b1 + other.b1,
            w2=self.w2 + other.w2,
            b2=self.b2 + other.b2,
            sigma=None if self.sigma is None else self.sigma + other.sigma,
        )

    def norm(self) -> float:
        blocks = self.blocks()
        if self.sigma is not None:
            # w1 is not a free parameter in the factored case
            blocks.pop("w1")
        return float(np.sqrt(sum(np.sum(value**2) for value in blocks.values())))
