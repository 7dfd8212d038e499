from .logging import get_logger  # noqa: F401
from .rng import make_rng, rng_state  # noqa: F401
