import numpy as np
import pytest

from svd_pinns import create_app
from svd_pinns.config.run_config import RunConfig
from svd_pinns.services import network
from svd_pinns.services.pde import make_problem
from svd_pinns.utils import make_rng


@pytest.fixture
def app(tmp_path):
    """Create and configure a new app instance for each test."""
    app = create_app("TestConfig")
    app.config["OUTPUT_ROOT"] = str(tmp_path / "runs")
    return app


@pytest.fixture
def app_context(app):
    with app.app_context():
        yield app


@pytest.fixture
def runner(app):
    """A CLI runner for the app's commands."""
    return app.test_cli_runner()


@pytest.fixture
def tiny_config(tmp_path):
    """A run small enough to train in well under a second."""
    return RunConfig(
        problem="parabolic",
        dim=2,
        width=8,
        seed=3,
        n_interior=32,
        n_boundary=16,
        n_initial=16,
        n_test=64,
        iters=20,
        pretrain_iters=20,
        log_every=5,
        sigma_head=4,
        output_dir=str(tmp_path / "runs"),
    )


@pytest.fixture
def rng():
    return make_rng(1234, "tests")


@pytest.fixture
def small_params(rng):
    """Random dense network with d = 2 (three inputs) and m = 8."""
    params = network.init_params(3, 8, 1, rng)
    # nonzero biases so every gradient path is exercised
    return params.with_blocks(
        {
            "b0": rng.normal(scale=0.3, size=8),
            "b1": rng.normal(scale=0.3, size=8),
            "b2": rng.normal(scale=0.3, size=1),
        }
    )


@pytest.fixture
def parabolic():
    return make_problem("parabolic", 2, 0.5)


@pytest.fixture
def allen_cahn():
    return make_problem("allen_cahn", 2, 0.5)


def central_difference(fn, x: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Fourth-order central difference of a scalar function at every coordinate of x."""
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        values = []
        for step in (2, 1, -1, -2):
            shifted = x.copy()
            shifted[index] += step * h
            values.append(fn(shifted))
        grad[index] = (-values[0] + 8 * values[1] - 8 * values[2] + values[3]) / (12 * h)
    return grad


@pytest.fixture
def finite_difference():
    return central_difference
