from .checkpoint_storage import CheckpointStorageService  # noqa: F401
from .run_log import RunLogService  # noqa: F401
