import numpy as np
import pytest

from dynnet.autodiff              import Tape, finite_diff_gradient
from dynnet.criterion             import LOSS_COLUMNS, LossBreakdown, bound_penalty, discovery_loss, finetune_loss, pretrain_loss
from dynnet.datasets.observations import ObservationSet
from dynnet.integrators           import TimeGrid, parse_scheme
from dynnet.modeling.mlp          import NetworkParams, init_network
from dynnet.modeling.models       import DiscoveryModel, EstimationModel
from dynnet.problems              import make_fitzhugh_nagumo

from conftest import relative_gradient_error

GRID = TimeGrid(0.0, 0.1, 5)


def _observations(n_states = 2):
    times  = GRID.times
    states = np.stack([ np.cos(times + i) for i in range(n_states) ], axis = 1)
    return ObservationSet(times, states, 0.0, 0, states.var(axis = 0))


def _estimation_model(spec, theta, lam):
    problem = make_fitzhugh_nagumo(t1 = 0.5)
    model   = EstimationModel(NetworkParams(spec, theta), lam, lam, problem.lower_bounds, problem.upper_bounds,
                              parse_scheme('BDF2'), GRID, problem.name)
    return problem, model


def test_bound_penalty_clamps():
    lam     = np.array([[0.1, 0.5, 2.1]])
    penalty = bound_penalty(lam, np.array([0.2, 0.0, 0.0]), np.array([1.0, 1.0, 2.0]))
    np.testing.assert_allclose(penalty, [[0.01, 0.0, 0.01]])

    with Tape() as tape:
        leaf = tape.leaf(lam, trainable = True)
        out  = bound_penalty(leaf, np.array([0.2, 0.0, 0.0]), np.array([1.0, 1.0, 2.0])).sum()
    np.testing.assert_allclose(tape.backward(out)[leaf], [[-0.2, 0.0, 0.2]])


def test_zero_network_discovery_terms(tiny_state_spec):
    obs   = _observations()
    f_obs = np.ones_like(obs.states) * 0.5
    model = DiscoveryModel(NetworkParams(tiny_state_spec, np.zeros(tiny_state_spec.num_params)), parse_scheme('AB2'), GRID)
    x0    = obs.states[0:1]

    total, parts = discovery_loss(model, obs, f_obs, x0)
    assert parts.L_ic == 0.0
    assert parts.L_p == pytest.approx(0.25)
    assert parts.L_d == pytest.approx(np.mean((obs.states - x0) ** 2))
    assert float(np.asarray(total)) == pytest.approx(parts.total)


def test_zero_network_pretrain_terms(tiny_time_spec):
    _, model = _estimation_model(tiny_time_spec, np.zeros(tiny_time_spec.num_params), [0.7, 0.8, 12.5, 1.0])
    x_nm     = np.full((6, 2), 2.0)
    _, parts = pretrain_loss(model, x_nm, np.array([[1.0, -1.0]]))
    assert parts.L_ic == pytest.approx(1.0)
    assert parts.L_p == pytest.approx(4.0)
    assert parts.L_d == 0.0 and parts.L_lambda == ()


def test_finetune_terms(tiny_time_spec):
    problem, model = _estimation_model(tiny_time_spec, np.zeros(tiny_time_spec.num_params), [0.7, 0.8, 9.5, 1.0])
    obs = _observations()
    x0  = np.array([[0.1, 0.0]])

    _, parts = finetune_loss(model, problem, obs, x0, model.theta_tilde)
    assert parts.L_ic == pytest.approx(1e3 * 0.005)
    assert parts.L_lambda == pytest.approx((0.0, 0.0, 0.25, 0.0))
    assert parts.L_d == pytest.approx(np.mean(obs.states ** 2))

    _, frozen = finetune_loss(model, problem, obs, x0, model.params.theta, frozen_lam = problem.true_params)
    assert frozen.L_lambda_total == 0.0


def test_finetune_gradient_includes_parameter_estimate(tiny_time_spec):
    theta          = init_network(tiny_time_spec, seed = 11).theta
    problem, model = _estimation_model(tiny_time_spec, theta, [0.6, 0.9, 9.5, 1.1])
    obs = _observations()
    x0  = obs.states[0:1]

    with Tape() as tape:
        leaf    = tape.leaf(model.theta_tilde, trainable = True)
        loss, _ = finetune_loss(model, problem, obs, x0, leaf)
    g_tape = tape.backward(loss)[leaf]
    g_fd   = finite_diff_gradient(lambda v: finetune_loss(model, problem, obs, x0, v)[0], model.theta_tilde, h = 1e-6)

    assert relative_gradient_error(g_tape, g_fd) < 1e-4
    assert np.all(g_tape[model.num_theta:] != 0.0)


def test_loss_breakdown_rows():
    parts = LossBreakdown(1.0, 2.0, 3.0, (0.5, 0.25)).with_epoch(7)
    assert parts.total == 6.75
    assert dict(zip(LOSS_COLUMNS, parts.as_row())) == {'epoch': 7, 'L_ic': 1.0, 'L_p': 2.0, 'L_d': 3.0,
                                                       'L_lambda_total': 0.75, 'total': 6.75}
