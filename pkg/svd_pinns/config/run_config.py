"""
Per-run configuration.

Run files are flat ``key=value`` text with ``#`` comments, the same syntax as
a ``.env`` file, and are parsed with python-dotenv. ``--set key=value`` flags on
the command line override file keys.
"""

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

from dotenv import dotenv_values

from svd_pinns.exceptions import ConfigurationError
from svd_pinns.models import OptimizerKind, TrainMode
from svd_pinns.services.pde import PRESET_EPSILONS, PROBLEMS
from svd_pinns.utils import get_logger

DEFAULT_OUTPUT_ROOT = "./runs"

SWEEP_KEYS = (
    "sweep_modes",
    "sweep_sigma_optimizers",
    "sweep_sigma_lrs",
    "sweep_main_lrs",
    "sweep_epsilons",
    "sweep_cells",
)


def _default_output_root() -> str:
    return os.environ.get("SVD_PINNS_OUTPUT_ROOT", DEFAULT_OUTPUT_ROOT)


@dataclass(frozen=True)
class SweepCell:
    """One grid point of a sweep."""

    mode: TrainMode
    sigma_optimizer: OptimizerKind
    sigma_lr: float
    epsilon: float
    # None keeps the run's main_lr
    main_lr: Optional[float] = None

    @property
    def name(self) -> str:
        if self.mode is TrainMode.SVD_TRANSFER:
            return f"{self.mode.value}-{self.sigma_optimizer.value}-lr{self.sigma_lr:g}-eps{self.epsilon:g}"
        if self.main_lr is not None:
            return f"{self.mode.value}-lr{self.main_lr:g}-eps{self.epsilon:g}"
        return f"{self.mode.value}-eps{self.epsilon:g}"


@dataclass(frozen=True)
class RunConfig:
    problem: str = "parabolic"
    dim: int = 2
    epsilon: float = 0.0
    width: int = 64
    nu: float = 1.0
    seed: int = 0
    n_interior: int = 4000
    n_boundary: int = 1000
    n_initial: int = 1000
    n_test: int = 4096
    resample_every: int = 0
    iters: int = 5000
    pretrain_iters: int = 5000
    mode: TrainMode = TrainMode.SVD_TRANSFER
    sigma_optimizer: OptimizerKind = OptimizerKind.GD
    sigma_lr: float = 0.1
    main_lr: float = 1e-3
    log_every: int = 10
    sigma_head: int = 16
    output_dir: str = field(default_factory=_default_output_root)
    sweep_modes: Tuple[TrainMode, ...] = ()
    sweep_sigma_optimizers: Tuple[OptimizerKind, ...] = ()
    sweep_sigma_lrs: Tuple[float, ...] = ()
    sweep_main_lrs: Tuple[float, ...] = ()
    sweep_epsilons: Tuple[float, ...] = ()
    sweep_cells: Tuple[Tuple[TrainMode, Optional[OptimizerKind], Optional[float]], ...] = ()

    def __post_init__(self):
        try:
            object.__setattr__(self, "mode", TrainMode(self.mode))
            object.__setattr__(self, "sigma_optimizer", OptimizerKind(self.sigma_optimizer))
        except ValueError as e:
            raise ConfigurationError(str(e), ["mode", "sigma_optimizer"])
        try:
            object.__setattr__(self, "sweep_modes", tuple(TrainMode(mode) for mode in self.sweep_modes))
            object.__setattr__(
                self, "sweep_sigma_optimizers", tuple(OptimizerKind(kind) for kind in self.sweep_sigma_optimizers)
            )
            object.__setattr__(
                self,
                "sweep_cells",
                tuple(
                    (TrainMode(mode), OptimizerKind(kind) if kind else None, lr)
                    for mode, kind, lr in self.sweep_cells
                ),
            )
        except ValueError as e:
            raise ConfigurationError(str(e), [key for key in SWEEP_KEYS if getattr(self, key)])
        object.__setattr__(self, "sweep_sigma_lrs", tuple(self.sweep_sigma_lrs))
        object.__setattr__(self, "sweep_main_lrs", tuple(self.sweep_main_lrs))
        object.__setattr__(self, "sweep_epsilons", tuple(self.sweep_epsilons))
        errors = self.validation_errors()
        if errors:
            raise ConfigurationError("Invalid run configuration", errors)

    # The output dimension r is fixed by the problem family
    @property
    def out_dim(self) -> int:
        return PROBLEMS[self.problem].out_dim

    @property
    def d_in(self) -> int:
        return self.dim + 1

    def validation_errors(self) -> List[str]:
        errors = []
        if self.problem not in PROBLEMS:
            errors.append("problem")
        positive = ("dim", "width", "n_interior", "n_boundary", "n_initial", "n_test", "log_every")
        errors.extend(name for name in positive if getattr(self, name) < 1)
        non_negative = ("resample_every", "iters", "pretrain_iters", "sigma_head", "sigma_lr")
        errors.extend(name for name in non_negative if getattr(self, name) < 0)
        if not (self.nu > 0 and math.isfinite(self.nu)):
            errors.append("nu")
        if not (self.main_lr > 0 and math.isfinite(self.main_lr)):
            errors.append("main_lr")
        if not math.isfinite(self.epsilon):
            errors.append("epsilon")
        if not math.isfinite(self.sigma_lr):
            errors.append("sigma_lr")
        if any(lr < 0 or not math.isfinite(lr) for lr in self.sweep_sigma_lrs):
            errors.append("sweep_sigma_lrs")
        if any(not (lr > 0 and math.isfinite(lr)) for lr in self.sweep_main_lrs):
            errors.append("sweep_main_lrs")
        if any(
            mode is TrainMode.FULL and kind is None and lr is not None and not (lr > 0 and math.isfinite(lr))
            for mode, kind, lr in self.sweep_cells
        ):
            errors.append("sweep_cells")
        if any(not math.isfinite(eps) for eps in self.sweep_epsilons):
            errors.append("sweep_epsilons")
        return errors

    def structural_hash(self) -> str:
        """Fingerprint of everything that fixes parameter shapes."""
        payload = json.dumps(
            {"problem": self.problem, "dim": self.dim, "width": self.width, "out_dim": self.out_dim},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def with_overrides(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def as_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        values["mode"] = self.mode.value
        values["sigma_optimizer"] = self.sigma_optimizer.value
        values["sweep_modes"] = [mode.value for mode in self.sweep_modes]
        values["sweep_sigma_optimizers"] = [kind.value for kind in self.sweep_sigma_optimizers]
        values["sweep_cells"] = [
            [mode.value, kind.value if kind else None, lr] for mode, kind, lr in self.sweep_cells
        ]
        return values

    def sweep_grid(self) -> List[SweepCell]:
        """
        Expand the sweep keys into cells.

        ``sweep_cells`` lists cells explicitly; otherwise the cross product of
        modes × optimizers × learning rates is taken, where only SVD-transfer
        cells vary the sigma optimizer. Full cells are repeated for each of
        ``sweep_main_lrs``. Every cell is repeated for each epsilon (the
        problem's preset when ``sweep_epsilons`` is empty).
        """
        epsilons = self.sweep_epsilons or PRESET_EPSILONS[self.problem]
        main_lrs = self.sweep_main_lrs or (None,)

        def baseline(mode, main_lr=None):
            if main_lr is not None:
                return [(mode, self.sigma_optimizer, 0.0, main_lr)]
            if mode is TrainMode.FULL:
                return [(mode, self.sigma_optimizer, 0.0, lr) for lr in main_lrs]
            return [(mode, self.sigma_optimizer, 0.0, None)]

        combos = []
        if self.sweep_cells:
            for mode, kind, lr in self.sweep_cells:
                if mode is not TrainMode.SVD_TRANSFER:
                    # full:<lr> sets the cell's main_lr
                    explicit = lr if mode is TrainMode.FULL and kind is None else None
                    combos.extend(baseline(mode, explicit))
                    continue
                combos.append(
                    (
                        mode,
                        kind if kind is not None else self.sigma_optimizer,
                        lr if lr is not None else self.sigma_lr,
                        None,
                    )
                )
        else:
            modes = self.sweep_modes or (self.mode,)
            kinds = self.sweep_sigma_optimizers or (self.sigma_optimizer,)
            lrs = self.sweep_sigma_lrs or (self.sigma_lr,)
            for mode in modes:
                if mode is TrainMode.SVD_TRANSFER:
                    combos.extend((mode, kind, lr, None) for kind in kinds for lr in lrs)
                else:
                    combos.extend(baseline(mode))

        cells = []
        seen = set()
        for epsilon in epsilons:
            for mode, kind, lr, main_lr in combos:
                cell = SweepCell(
                    mode, kind, float(lr), float(epsilon), None if main_lr is None else float(main_lr)
                )
                if cell not in seen:
                    seen.add(cell)
                    cells.append(cell)
        return cells

    @classmethod
    def from_dict(cls, values: Mapping[str, Any]) -> "RunConfig":
        """Inverse of :meth:`as_dict` (used to ship configs to Celery workers)."""
        return cls(**dict(values))

    @classmethod
    def from_mapping(cls, values: Mapping[str, Optional[str]], output_root: Optional[str] = None) -> "RunConfig":
        """
        Build a config from raw string values, collecting every bad key.

        Raises:
            ConfigurationError: Unknown keys or values that do not parse
        """
        known = {item.name: item for item in fields(cls)}
        parsed: Dict[str, Any] = {}
        errors = []
        for key, raw in values.items():
            key = key.strip()
            if key not in known:
                errors.append(key)
                continue
            if raw is None or str(raw).strip() == "":
                errors.append(key)
                continue
            try:
                parsed[key] = _PARSERS.get(key, _parse_by_default(cls, key))(str(raw).strip())
            except (TypeError, ValueError):
                errors.append(key)
        if errors:
            raise ConfigurationError("Invalid run configuration", errors)

        if "output_dir" not in parsed and output_root:
            parsed["output_dir"] = output_root

        mode = parsed.get("mode", TrainMode.SVD_TRANSFER)
        sigma_keys = sorted(key for key in ("sigma_optimizer", "sigma_lr") if key in parsed)
        if sigma_keys and mode is not TrainMode.SVD_TRANSFER and not any(k in parsed for k in SWEEP_KEYS):
            get_logger().warning(
                f"{', '.join(sigma_keys)} only affect svd_transfer runs; ignored for mode {mode.value}"
            )
        return cls(**parsed)

    @classmethod
    def from_file(
        cls,
        path: Optional[str] = None,
        overrides: Iterable[str] = (),
        output_root: Optional[str] = None,
    ) -> "RunConfig":
        """
        Read a key=value run file and apply ``key=value`` overrides on top.

        Args:
            path: Run file; None starts from the defaults
            overrides: Strings of the form ``key=value``
            output_root: Output directory used when the file sets none
        """
        values: Dict[str, Optional[str]] = {}
        if path is not None:
            if not os.path.isfile(path):
                raise ConfigurationError(f"Config file not found: {path}", ["config"])
            values.update(dotenv_values(path, interpolate=False))
        bad = []
        for item in overrides:
            key, sep, raw = item.partition("=")
            if not sep:
                bad.append(key.strip() or item)
                continue
            values[key.strip()] = raw
        if bad:
            raise ConfigurationError("Overrides must look like key=value", bad)
        return cls.from_mapping(values, output_root=output_root)


def _parse_list(parse):
    def parser(raw: str):
        return tuple(parse(item.strip()) for item in raw.split(",") if item.strip())

    return parser


def _parse_cell(raw: str):
    """``mode``, ``full:<main_lr>`` or ``svd_transfer:<optimizer>:<sigma_lr>``."""
    parts = [part.strip() for part in raw.split(":")]
    mode = TrainMode(parts[0])
    if len(parts) == 1:
        return mode, None, None
    if len(parts) == 2 and mode is TrainMode.FULL:
        return mode, None, float(parts[1])
    if len(parts) == 3:
        return mode, OptimizerKind(parts[1]), float(parts[2])
    raise ValueError(raw)


def _parse_by_default(cls, key):
    default = next(item for item in fields(cls) if item.name == key).default
    if isinstance(default, int):
        return int
    if isinstance(default, float):
        return float
    return str


_PARSERS = {
    "mode": TrainMode,
    "sigma_optimizer": OptimizerKind,
    "output_dir": str,
    "problem": str,
    "sweep_modes": _parse_list(TrainMode),
    "sweep_sigma_optimizers": _parse_list(OptimizerKind),
    "sweep_sigma_lrs": _parse_list(float),
    "sweep_main_lrs": _parse_list(float),
    "sweep_epsilons": _parse_list(float),
    "sweep_cells": _parse_list(_parse_cell),
}
