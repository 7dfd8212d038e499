"""
Seeded random streams.

Every stream is a Philox (counter-based) generator keyed by a master seed and
a tuple of labels, so interior/boundary/initial/test batches can be redrawn
independently of each other and of the order in which they are requested.
"""

import zlib
from typing import Any, Dict, Union

import numpy as np

Label = Union[str, int]


def _label_key(label: Label) -> int:
    if isinstance(label, int):
        return label & 0xFFFFFFFF
    return zlib.crc32(str(label).encode("utf-8"))


def make_rng(seed: int, *labels: Label) -> np.random.Generator:
    """
    Create the generator for the stream named by ``labels`` under ``seed``.

    Args:
        seed: Master seed of the run
        labels: Stream labels, e.g. ("train", "interior")

    Returns:
        np.random.Generator: A fresh generator; equal arguments give equal streams
    """
    entropy = [int(seed) & 0xFFFFFFFF] + [_label_key(label) for label in labels]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def rng_state(rng: np.random.Generator) -> Dict[str, Any]:
    """JSON-friendly snapshot of a generator's bit-generator state."""
    state = rng.bit_generator.state
    return _to_plain(state)


def _to_plain(value):
    if isinstance(value, dict):
        return {key: _to_plain(item) for key, item in value.items()}
    if isinstance(value, np.ndarray):
        return [int(item) for item in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    return value
