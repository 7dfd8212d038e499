"""
Monte-Carlo collocation points on (0, 1) × B and (0, 1) × ∂B.

Ball points use x = g · u^(1/d) / |g| with g standard normal and u uniform,
sphere points use g / |g|. Points within 1e-8 of the origin or of the unit
sphere are redrawn.
"""

from typing import Callable, Dict

import numpy as np

from svd_pinns.config.run_config import RunConfig
from svd_pinns.exceptions import ConfigurationError
from svd_pinns.models import SampleBatch, SampleKind, TrainingSet
from svd_pinns.utils import make_rng

SINGULAR_SHELL = 1e-8


def _open_unit_interval(n: int, rng: np.random.Generator) -> np.ndarray:
    times = rng.random(n)
    # rng.random draws from [0, 1)
    while np.any(times == 0.0):
        zero = times == 0.0
        times[zero] = rng.random(int(zero.sum()))
    return times


def _ball(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    points = np.empty((n, d))
    filled = 0
    while filled < n:
        need = n - filled
        g = rng.standard_normal((need, d))
        u = rng.random(need)
        norms = np.linalg.norm(g, axis=1)
        candidates = g * (u ** (1.0 / d) / norms)[:, None]
        radius = np.linalg.norm(candidates, axis=1)
        good = candidates[(radius > SINGULAR_SHELL) & (radius < 1.0 - SINGULAR_SHELL)]
        points[filled:filled + good.shape[0]] = good
        filled += good.shape[0]
    return points


def _sphere(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    points = np.empty((n, d))
    filled = 0
    while filled < n:
        g = rng.standard_normal((n - filled, d))
        norms = np.linalg.norm(g, axis=1)
        good = g[norms > 0.0] / norms[norms > 0.0, None]
        points[filled:filled + good.shape[0]] = good
        filled += good.shape[0]
    return points


def sample_interior(n: int, d: int, rng: np.random.Generator) -> SampleBatch:
    """Uniform times in (0, 1) and uniform points in the open unit ball."""
    _check(n, d)
    times = _open_unit_interval(n, rng)
    return SampleBatch(SampleKind.INTERIOR, times, _ball(n, d, rng))


def sample_boundary(n: int, d: int, rng: np.random.Generator) -> SampleBatch:
    _check(n, d)
    times = _open_unit_interval(n, rng)
    return SampleBatch(SampleKind.BOUNDARY, times, _sphere(n, d, rng))


def sample_initial(n: int, d: int, rng: np.random.Generator) -> SampleBatch:
    _check(n, d)
    return SampleBatch(SampleKind.INITIAL, np.zeros(n), _ball(n, d, rng))


def sample_test(n: int, d: int, rng: np.random.Generator) -> SampleBatch:
    """Interior points at mixed times, tagged as a test batch."""
    batch = sample_interior(n, d, rng)
    return SampleBatch(SampleKind.TEST, batch.times, batch.points)


SAMPLERS: Dict[SampleKind, Callable[[int, int, np.random.Generator], SampleBatch]] = {
    SampleKind.INTERIOR: sample_interior,
    SampleKind.BOUNDARY: sample_boundary,
    SampleKind.INITIAL: sample_initial,
    SampleKind.TEST: sample_test,
}


def sample(kind: SampleKind, n: int, d: int, rng: np.random.Generator) -> SampleBatch:
    return SAMPLERS[SampleKind(kind)](n, d, rng)


def _check(n: int, d: int):
    if n < 1:
        raise ConfigurationError(f"sample count must be >= 1, got {n}", ["n"])
    if d < 1:
        raise ConfigurationError(f"spatial dimension must be >= 1, got {d}", ["dim"])


def draw_training_set(config: RunConfig, phase: str = "train", round_index: int = 0) -> TrainingSet:
    """
    Interior, boundary and initial batches for one run.

    Each batch comes from its own stream (seed, phase, kind, round), so
    changing one count does not move the points of the others.
    """
    d = config.dim
    counts = {
        SampleKind.INTERIOR: config.n_interior,
        SampleKind.BOUNDARY: config.n_boundary,
        SampleKind.INITIAL: config.n_initial,
    }
    batches = {
        kind: sample(kind, n, d, make_rng(config.seed, phase, kind.value, round_index))
        for kind, n in counts.items()
    }
    return TrainingSet(
        interior=batches[SampleKind.INTERIOR],
        boundary=batches[SampleKind.BOUNDARY],
        initial=batches[SampleKind.INITIAL],
    )


def draw_test_set(config: RunConfig) -> SampleBatch:
    """Test batch shared by every run with the same seed and dimension."""
    return sample_test(config.n_test, config.dim, make_rng(config.seed, "test"))
