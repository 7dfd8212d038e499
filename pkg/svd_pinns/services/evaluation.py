"""
Accuracy and storage metrics.

Storage formulas for n models with hidden width m, output dimension r and
input width d:

    standard:  n · (m² + (r + d + 1) · m + r)
    factored:  n · ((r + d + 2) · m + r) + 2 m²      (U and V shared)
"""

from dataclasses import dataclass

import numpy as np

from svd_pinns.exceptions import DimensionError, NumericError
from svd_pinns.models import ErrorReport, NetworkParams, SampleBatch, TrainMode
from svd_pinns.services import linalg, network
from svd_pinns.services.pde import PdeProblem


@dataclass(frozen=True)
class ParamCounts:
    per_model: int
    total: int
    shared: int = 0


def relative_error(predictions, exact) -> float:
    """sqrt(Σ (ŷ - y)² / Σ y²)."""
    predicted = np.asarray(predictions, dtype=np.float64).ravel()
    target = np.asarray(exact, dtype=np.float64).ravel()
    if predicted.shape != target.shape:
        raise DimensionError(f"{predicted.shape[0]} predictions for {target.shape[0]} exact values")
    denominator = float(np.sum(target**2))
    if denominator == 0.0:
        raise NumericError("relative error is undefined for an all-zero exact vector", stage="evaluation")
    value = float(np.sqrt(np.sum((predicted - target) ** 2) / denominator))
    if not np.isfinite(value):
        raise NumericError(f"relative error is {value}", stage="evaluation")
    return value


def evaluate(params: NetworkParams, problem: PdeProblem, test: SampleBatch, iteration: int = 0) -> ErrorReport:
    """Relative error of the network against the exact solution on ``test``."""
    if test.count == 0:
        raise DimensionError("test batch is empty")
    inputs = network.assemble_inputs(test.times, test.points, params.d_in)
    predictions = network.forward(params, inputs)[:, 0]
    exact = problem.exact.value(test.times, test.points)
    return ErrorReport(
        relative_error=relative_error(predictions, exact),
        n_points=test.count,
        problem=problem.name,
        epsilon=problem.epsilon,
        iteration=iteration,
    )


def param_count(mode, n_pdes: int, m: int, r: int, d_in: int) -> ParamCounts:
    """
    Storage for ``n_pdes`` models, with the formula's d set to ``d_in``.

    Only SvdTransfer shares a basis; every other mode stores full models.
    """
    if min(n_pdes, m, r, d_in) < 1:
        raise DimensionError(f"counts must be positive, got n={n_pdes}, m={m}, r={r}, d={d_in}")
    if TrainMode(mode) is TrainMode.SVD_TRANSFER:
        per_model = (r + d_in + 2) * m + r
        shared = 2 * m * m
        return ParamCounts(per_model=per_model, total=n_pdes * per_model + shared, shared=shared)
    per_model = m * m + (r + d_in + 1) * m + r
    return ParamCounts(per_model=per_model, total=n_pdes * per_model)


def stored_param_counts(params: NetworkParams) -> ParamCounts:
    """
    Scalars a checkpoint of ``params`` holds for one model.

    Biases make the stored count equal :func:`param_count` with d taken as
    the network input width plus one.
    """
    blocks = params.blocks()
    shared = 0
    if params.is_factored:
        shared = blocks.pop("u").size + blocks.pop("v").size
    per_model = int(sum(value.size for value in blocks.values()))
    return ParamCounts(per_model=per_model, total=per_model + shared, shared=shared)


def singular_values(params: NetworkParams) -> np.ndarray:
    """Singular values of the effective hidden matrix, descending."""
    if params.is_factored:
        return np.sort(params.hidden.sigma)[::-1].copy()
    return linalg.svd(params.hidden.w1).sigma


def sigma_drift(sigma0, sigma1) -> float:
    """|σ1 - σ0| / |σ0|."""
    before = np.asarray(sigma0, dtype=np.float64)
    after = np.asarray(sigma1, dtype=np.float64)
    if before.shape != after.shape:
        raise DimensionError(f"sigma shapes {before.shape} and {after.shape} differ")
    norm = float(np.linalg.norm(before))
    if norm == 0.0:
        raise NumericError("drift is undefined for a zero reference", stage="evaluation")
    return float(np.linalg.norm(after - before) / norm)
