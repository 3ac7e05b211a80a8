import numpy as np
import pytest

from dynnet.autodiff          import Tape
from dynnet.modeling.mlp      import init_network
from dynnet.modeling.mlp_config import MLPConfig
from dynnet.problems.reference import clear_cache


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_state_spec():
    """ 2 states -> 2 rates, one hidden layer of width 4. """
    return MLPConfig(input_dim = 2, output_dim = 2, hidden_layers = 1, hidden_width = 4)


@pytest.fixture
def tiny_time_spec():
    """ time -> 2 states, one hidden layer of width 4. """
    return MLPConfig(input_dim = 1, output_dim = 2, hidden_layers = 1, hidden_width = 4)


@pytest.fixture
def tiny_state_params(tiny_state_spec):
    return init_network(tiny_state_spec, seed = 7)


@pytest.fixture(autouse = True)
def _fresh_reference_cache():
    clear_cache()
    yield
    clear_cache()


def tape_gradient(fn, x):
    """ Gradient of the scalar fn at x through a fresh tape. """
    with Tape() as tape:
        leaf = tape.leaf(x, trainable = True)
        out  = fn(leaf)
    return tape.backward(out)[leaf]


def relative_gradient_error(g_tape, g_fd):
    g_tape = np.asarray(g_tape).reshape(-1)
    g_fd   = np.asarray(g_fd).reshape(-1)
    return np.linalg.norm(g_tape - g_fd) / max(np.linalg.norm(g_fd), 1e-12)
