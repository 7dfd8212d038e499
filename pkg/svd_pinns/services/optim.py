"""
First-order optimizers applied to one named parameter group at a time.

A run owns two groups: ``main`` (the layer weights and biases, always Adam)
and ``sigma`` (the singular values, configurable, followed by clipping at 0).
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, Tuple

import numpy as np

from svd_pinns.exceptions import CheckpointError, DimensionError, NumericError
from svd_pinns.models import OptimizerKind

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
RMSPROP_DECAY = 0.9
DENOMINATOR_EPS = 1e-8

Arrays = Dict[str, np.ndarray]


@dataclass(frozen=True)
class OptimizerState:
    """
    Hyperparameters, step count and moment accumulators of one group.

    ``first_moment`` is only used by Adam; ``second_moment`` by RMSProp and
    Adam. Accumulators are created lazily, shaped like the parameters.
    """

    kind: OptimizerKind
    lr: float
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = DENOMINATOR_EPS
    step_count: int = 0
    first_moment: Arrays = field(default_factory=dict)
    second_moment: Arrays = field(default_factory=dict)

    def hyperparams(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "step_count": self.step_count,
        }

    def moment_blocks(self, group: str) -> Arrays:
        """Accumulators as checkpoint blocks ``opt.<group>.<m|v>.<name>``."""
        blocks = {f"opt.{group}.m.{name}": value for name, value in self.first_moment.items()}
        blocks.update({f"opt.{group}.v.{name}": value for name, value in self.second_moment.items()})
        return blocks

    @classmethod
    def restore(cls, hyperparams: Dict[str, Any], blocks: Arrays, group: str) -> "OptimizerState":
        try:
            kind = OptimizerKind(hyperparams["kind"])
            first, second = {}, {}
            for name, value in blocks.items():
                prefix, _, rest = name.partition(f"opt.{group}.")
                if prefix or not rest:
                    continue
                moment, _, block = rest.partition(".")
                (first if moment == "m" else second)[block] = np.array(value)
            return cls(
                kind=kind,
                lr=float(hyperparams["lr"]),
                beta1=float(hyperparams["beta1"]),
                beta2=float(hyperparams["beta2"]),
                eps=float(hyperparams["eps"]),
                step_count=int(hyperparams["step_count"]),
                first_moment=first,
                second_moment=second,
            )
        except (KeyError, ValueError) as e:
            raise CheckpointError(f"Invalid optimizer state for group {group}: {e}")


def make_optimizer(kind, lr: float) -> OptimizerState:
    """Fresh state with the default decays for ``kind``."""
    kind = OptimizerKind(kind)
    if lr < 0 or not np.isfinite(lr):
        raise NumericError(f"learning rate must be finite and >= 0, got {lr}", stage="optim")
    if kind == OptimizerKind.RMSPROP:
        return OptimizerState(kind=kind, lr=float(lr), beta1=0.0, beta2=RMSPROP_DECAY)
    return OptimizerState(kind=kind, lr=float(lr))


def step(state: OptimizerState, params: Arrays, grads: Arrays, group: str = "main") -> Tuple[OptimizerState, Arrays]:
    """
    One update of every array in ``params``.

    GD:      θ ← θ - η g
    RMSProp: v ← β v + (1 - β) g²,  θ ← θ - η g / (√v + ε)
    Adam:    bias-corrected first and second moments, θ ← θ - η m̂ / (√v̂ + ε)

    Raises:
        NumericError: a gradient entry is not finite (names the group)
        DimensionError: gradient and parameter shapes differ
    """
    for name, value in params.items():
        if name not in grads:
            raise DimensionError(f"group {group}: no gradient for {name}")
        if np.shape(grads[name]) != np.shape(value):
            raise DimensionError(
                f"group {group}: gradient for {name} has shape {np.shape(grads[name])}, "
                f"expected {np.shape(value)}"
            )
        if not np.all(np.isfinite(grads[name])):
            raise NumericError(f"non-finite gradient in group {group} ({name})", stage=group)

    t = state.step_count + 1
    first = dict(state.first_moment)
    second = dict(state.second_moment)
    updated = {}
    for name, theta in params.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if state.kind == OptimizerKind.GD:
            updated[name] = theta - state.lr * g
        elif state.kind == OptimizerKind.RMSPROP:
            v = state.beta2 * second.get(name, np.zeros_like(g)) + (1.0 - state.beta2) * g**2
            second[name] = v
            updated[name] = theta - state.lr * g / (np.sqrt(v) + state.eps)
        else:
            m = state.beta1 * first.get(name, np.zeros_like(g)) + (1.0 - state.beta1) * g
            v = state.beta2 * second.get(name, np.zeros_like(g)) + (1.0 - state.beta2) * g**2
            first[name], second[name] = m, v
            m_hat = m / (1.0 - state.beta1**t)
            v_hat = v / (1.0 - state.beta2**t)
            updated[name] = theta - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return replace(state, step_count=t, first_moment=first, second_moment=second), updated


def project_nonnegative(sigma) -> np.ndarray:
    """Clip singular values at zero."""
    return np.maximum(np.asarray(sigma, dtype=np.float64), 0.0)
