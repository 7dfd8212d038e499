"""
Pretraining and transfer training.

A run pretrains on the epsilon = 0 problem, optionally splits the hidden
weight into frozen singular vectors and trainable singular values, and then
trains on the epsilon problem in one of four modes (see TrainMode).
Every iteration evaluates the loss gradient once at the current parameters,
steps the main group with Adam and then steps sigma and clips it at zero.
"""

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from svd_pinns.config.run_config import RunConfig
from svd_pinns.exceptions import CheckpointError, ConfigurationError, NumericError, TrainingDivergedError
from svd_pinns.models import MAIN_BLOCKS, NetworkParams, OptimizerKind, RunRecord, TrainMode
from svd_pinns.services import evaluation, loss, network, optim, sampling
from svd_pinns.services.pde import PdeProblem
from svd_pinns.utils import get_logger, make_rng, rng_state

# every n-th logged record is also reported at INFO
INFO_EVERY = 10


@dataclass
class TrainingResult:
    params: NetworkParams
    records: List[RunRecord]
    optimizers: Dict[str, optim.OptimizerState] = field(default_factory=dict)
    rng_state: Optional[Dict[str, Any]] = None

    @property
    def final_record(self) -> Optional[RunRecord]:
        return self.records[-1] if self.records else None

    @property
    def iterations(self) -> int:
        return self.records[-1].iteration if self.records else 0


def initial_params(problem: PdeProblem, config: RunConfig, rng: Optional[np.random.Generator] = None) -> NetworkParams:
    rng = rng if rng is not None else make_rng(config.seed, "init")
    return network.init_params(problem.d_in, config.width, problem.out_dim, rng)


def pretrain(
    problem: PdeProblem,
    config: RunConfig,
    rng: Optional[np.random.Generator] = None,
    on_record: Optional[Callable[[RunRecord], None]] = None,
) -> TrainingResult:
    """
    Train a fresh network with Adam on all parameters for ``pretrain_iters``.

    Args:
        problem: The epsilon = 0 member of the problem family
        config: Run configuration (width, seed, batch sizes, main_lr, ...)
        rng: Initialization stream; defaults to (seed, "init")

    Returns:
        TrainingResult: theta_0, the run records and the optimizer state
    """
    if problem.epsilon != 0.0:
        get_logger().warning(f"pretraining on epsilon={problem.epsilon}, expected 0")
    rng = rng if rng is not None else make_rng(config.seed, "init")
    params = initial_params(problem, config, rng)
    result = _train(params, TrainMode.FULL, problem, config, config.pretrain_iters, "pretrain", on_record)
    result.rng_state = rng_state(rng)
    return result


def transfer_train(
    theta0: NetworkParams,
    mode,
    problem: PdeProblem,
    config: RunConfig,
    on_record: Optional[Callable[[RunRecord], None]] = None,
) -> TrainingResult:
    """
    Warm-start from theta_0 and train ``iters`` iterations on ``problem``.

    SvdTransfer splits a dense theta_0 first; the other modes train the dense
    form. Training points and the test set come from streams keyed by
    ``config.seed``, so runs differing only in mode see identical data.

    Raises:
        TrainingDivergedError: the loss or a gradient became non-finite
    """
    mode = TrainMode(mode)
    params = network.svd_split(theta0) if mode.uses_sigma else theta0.densified()
    return _train(params, mode, problem, config, config.iters, "transfer", on_record)


def resume_training(
    params: NetworkParams,
    mode,
    problem: PdeProblem,
    config: RunConfig,
    optimizers: Dict[str, optim.OptimizerState],
    first_iteration: int,
    phase: str = "transfer",
    on_record: Optional[Callable[[RunRecord], None]] = None,
) -> TrainingResult:
    """
    Continue a run from the parameters and optimizer state it reached at
    ``first_iteration`` up to ``iters`` (``pretrain_iters`` for pretraining).

    Training points come from the same keyed streams as the interrupted run,
    so with an unchanged config the result matches a run that never stopped.

    Raises:
        ConfigurationError: the run already reached its iteration target
        CheckpointError: an optimizer group the mode steps is missing
    """
    mode = TrainMode(mode)
    key = "pretrain_iters" if phase == "pretrain" else "iters"
    iters = getattr(config, key)
    if first_iteration >= iters:
        raise ConfigurationError(f"run is already at iteration {first_iteration} of {iters}", [key])
    groups = {"main", "sigma"} if mode.uses_sigma else {"main"}
    missing = sorted(groups - set(optimizers))
    if missing:
        raise CheckpointError(f"no optimizer state for group(s) {missing}")
    return _train(params, mode, problem, config, iters, phase, on_record, first_iteration, optimizers)


def _train(
    params: NetworkParams,
    mode: TrainMode,
    problem: PdeProblem,
    config: RunConfig,
    iters: int,
    phase: str,
    on_record: Optional[Callable[[RunRecord], None]],
    first_iteration: int = 0,
    optimizers: Optional[Dict[str, optim.OptimizerState]] = None,
) -> TrainingResult:
    log = get_logger()
    trainable = mode.trainable
    main_names = [name for name in MAIN_BLOCKS if name in trainable]
    if optimizers is None:
        optimizers = {"main": optim.make_optimizer(OptimizerKind.ADAM, config.main_lr)}
        if mode.uses_sigma:
            optimizers["sigma"] = optim.make_optimizer(config.sigma_optimizer, config.sigma_lr)
    else:
        optimizers = dict(optimizers)

    round_index = first_iteration // config.resample_every if config.resample_every else 0
    training = sampling.draw_training_set(config, phase, round_index)
    test = sampling.draw_test_set(config)
    log.info(
        f"{phase} start: problem={problem.name} d={problem.d} epsilon={problem.epsilon} "
        f"mode={mode.value} m={params.width} iters={first_iteration}..{iters} seed={config.seed}"
    )

    records: List[RunRecord] = []
    start = time.perf_counter()
    for iteration in range(first_iteration, iters + 1):
        if config.resample_every and iteration and iteration % config.resample_every == 0:
            training = sampling.draw_training_set(config, phase, iteration // config.resample_every)

        logged = iteration % config.log_every == 0 or iteration == iters
        try:
            if iteration < iters:
                report, grad = loss.pinn_loss_grad(params, problem, training, config.nu)
            else:
                report, grad = loss.pinn_loss(params, problem, training, config.nu), None
            if not report.is_finite():
                raise NumericError(f"loss is {report.total}", stage="loss")

            if logged:
                error = evaluation.evaluate(params, problem, test, iteration)
                record = RunRecord(
                    iteration=iteration,
                    loss=report,
                    relative_error=error.relative_error,
                    wall_ms=(time.perf_counter() - start) * 1000.0,
                    sigma=params.hidden.sigma.copy() if params.is_factored else None,
                )
                records.append(record)
                if on_record is not None:
                    on_record(record)
                message = (
                    f"{phase} iter {iteration}: loss={report.total:.6e} "
                    f"rel_err={error.relative_error:.6e}"
                )
                if len(records) % INFO_EVERY == 1:
                    log.info(message)
                else:
                    log.debug(message)

            if grad is None:
                break
            blocks, grads = params.blocks(), grad.blocks()
            updates = {}
            if main_names:
                optimizers["main"], updates = optim.step(
                    optimizers["main"],
                    {name: blocks[name] for name in main_names},
                    {name: grads[name] for name in main_names},
                    group="main",
                )
            if mode.uses_sigma:
                optimizers["sigma"], stepped = optim.step(
                    optimizers["sigma"], {"sigma": blocks["sigma"]}, {"sigma": grads["sigma"]}, group="sigma"
                )
                updates["sigma"] = optim.project_nonnegative(stepped["sigma"])
            params = params.with_blocks(updates)
        except NumericError as e:
            log.error(f"{phase} diverged at iteration {iteration}: {e}")
            raise TrainingDivergedError(iteration, records[-1] if records else None) from e

    log.info(
        f"{phase} done: {len(records)} records, final rel_err="
        f"{records[-1].relative_error:.6e}, {records[-1].wall_ms:.0f} ms"
    )
    return TrainingResult(params=params, records=records, optimizers=optimizers)
