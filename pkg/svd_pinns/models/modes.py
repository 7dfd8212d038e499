from enum import Enum
from typing import FrozenSet


class TrainMode(str, Enum):
    """Which parameter groups a transfer run may update."""

    FULL = "full"
    FROZEN_HIDDEN = "frozen_hidden"
    FROZEN_W1 = "frozen_w1"
    SVD_TRANSFER = "svd_transfer"

    @property
    def trainable(self) -> FrozenSet[str]:
        return TRAINABLE_BLOCKS[self]

    @property
    def uses_sigma(self) -> bool:
        return self is TrainMode.SVD_TRANSFER


class OptimizerKind(str, Enum):
    GD = "gd"
    RMSPROP = "rmsprop"
    ADAM = "adam"


TRAINABLE_BLOCKS = {
    TrainMode.FULL: frozenset({"w0", "b0", "w1", "b1", "w2", "b2"}),
    # b2 stays frozen together with the hidden layers
    TrainMode.FROZEN_HIDDEN: frozenset({"w2"}),
    TrainMode.FROZEN_W1: frozenset({"w0", "b0", "b1", "w2", "b2"}),
    TrainMode.SVD_TRANSFER: frozenset({"w0", "b0", "b1", "w2", "b2", "sigma"}),
}

# blocks driven by the main Adam optimizer; sigma has its own
MAIN_BLOCKS = ("w0", "b0", "w1", "b1", "w2", "b2")
