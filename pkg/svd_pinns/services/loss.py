"""
PINN objective over interior, boundary and initial batches:

    L = nu · mean ½|res_int|² + mean ½|res_bc|² + mean ½|res_ic|²
"""

from typing import Dict, Iterable, Tuple, Union

import numpy as np

from svd_pinns.exceptions import ConfigurationError
from svd_pinns.models import Jet, LossReport, NetworkParams, ParamGrad, SampleBatch, SampleKind, TrainingSet
from svd_pinns.services import network
from svd_pinns.services.pde import PdeProblem

Batches = Union[TrainingSet, Iterable[SampleBatch]]

TRAINING_KINDS = (SampleKind.INTERIOR, SampleKind.BOUNDARY, SampleKind.INITIAL)


def _by_kind(batches: Batches, nu: float) -> Dict[SampleKind, SampleBatch]:
    if not nu > 0:
        raise ConfigurationError(f"nu must be positive, got {nu}", ["nu"])
    if isinstance(batches, TrainingSet):
        batches = batches.batches()
    grouped: Dict[SampleKind, SampleBatch] = {}
    for batch in batches:
        kind = SampleKind(batch.kind)
        grouped[kind] = grouped[kind].concat(batch) if kind in grouped else batch
    missing = [kind.value for kind in TRAINING_KINDS if kind not in grouped]
    empty = [kind.value for kind in TRAINING_KINDS if kind in grouped and grouped[kind].count == 0]
    if missing or empty:
        raise ConfigurationError(
            f"loss needs nonempty interior, boundary and initial batches "
            f"(missing: {missing}, empty: {empty})",
            [f"n_{kind}" for kind in missing + empty],
        )
    return grouped


def _term(residual: np.ndarray) -> float:
    return float(0.5 * np.sum(residual**2) / residual.shape[0])


def _report(terms: Dict[SampleKind, float], nu: float) -> LossReport:
    return LossReport(
        interior_term=terms[SampleKind.INTERIOR],
        boundary_term=terms[SampleKind.BOUNDARY],
        initial_term=terms[SampleKind.INITIAL],
        nu=nu,
    )


def pinn_loss(params: NetworkParams, problem: PdeProblem, batches: Batches, nu: float = 1.0) -> LossReport:
    grouped = _by_kind(batches, nu)
    terms = {}
    for kind in TRAINING_KINDS:
        batch = grouped[kind]
        jet = network.forward_jet(params, batch.times, batch.points)
        terms[kind] = _term(problem.residual(kind, jet, batch.times, batch.points))
    return _report(terms, nu)


def pinn_loss_grad(
    params: NetworkParams, problem: PdeProblem, batches: Batches, nu: float = 1.0
) -> Tuple[LossReport, ParamGrad]:
    """
    Loss and its gradient with respect to every parameter block.

    Each term's residual derivative res / n is pushed through the problem's
    linearization (value, dt, gradient and Laplacian coefficients, including
    3u² for the cubic Allen–Cahn term) into a jet cotangent, then through
    :func:`network.backward_jet`.
    """
    grouped = _by_kind(batches, nu)
    terms = {}
    total = ParamGrad.zeros_like(params)
    for kind in TRAINING_KINDS:
        batch = grouped[kind]
        jet, tape = network.forward_jet_with_tape(params, batch.times, batch.points)
        residual = problem.residual(kind, jet, batch.times, batch.points)
        terms[kind] = _term(residual)

        weight = nu if kind == SampleKind.INTERIOR else 1.0
        scale = weight * residual / batch.count
        lin = problem.linearization(kind, jet, batch.times, batch.points)
        cotangent = Jet(
            value=lin.value * scale,
            dt=lin.dt * scale,
            grad_x=lin.grad_x * scale[:, :, None],
            laplacian_x=lin.laplacian_x * scale,
        )
        total = total + network.backward_jet(params, batch.times, batch.points, cotangent, tape=tape)
    return _report(terms, nu), total
