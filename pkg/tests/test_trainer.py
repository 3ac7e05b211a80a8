import numpy as np
import pytest

from dynnet.config                import load_config
from dynnet.criterion             import LossBreakdown
from dynnet.datasets.observations import synthesize_observations
from dynnet.errors                import ConfigError
from dynnet.experiment            import build_options, build_schedule, build_spec
from dynnet.integrators           import TimeGrid, parse_scheme
from dynnet.modeling.mlp          import init_network
from dynnet.modeling.mlp_config   import MLPConfig
from dynnet.modeling.models       import EstimationModel
from dynnet.optim                 import Schedule
from dynnet.problems              import heat_exact, make_fitzhugh_nagumo, make_heat, midpoint_index, reference_solution
from dynnet.trainer               import (Objective, TrainOptions, finetune, finetune_without_pretrain, pretrain,
                                          train_discovery)

ZERO  = Schedule(adam_epochs = 0, lbfgs_max_iter = 0)
SHORT = Schedule(adam_lr = 1e-2, adam_epochs = 5, lbfgs_max_iter = 3)


@pytest.fixture
def short_fn():
    problem = make_fitzhugh_nagumo(t1 = 2.0, reference_dt = 1e-3)
    obs     = synthesize_observations(reference_solution(problem, dt = 0.1), 0.0, seed = 0)
    return problem, obs


@pytest.fixture
def options():
    return TrainOptions(num_test_points = 20)


def test_objective_memoizes_breakdowns():
    def build(x):
        total = (x * x).sum()
        return total, LossBreakdown(0.0, 0.0)
    objective = Objective(build)

    loss, grad = objective(np.array([1.0, 2.0]))
    assert loss == 5.0
    np.testing.assert_allclose(grad, [2.0, 4.0])
    parts, _ = objective.lookup(np.array([1.0, 2.0]))
    assert objective.evaluations == 1 and parts.total == 0.0


def test_discovery_with_empty_schedule_keeps_initial_network(short_fn, tiny_state_spec, options):
    problem, obs  = short_fn
    model, report = train_discovery(problem, obs, tiny_state_spec, parse_scheme('BDF2'), ZERO, seed = 3, options = options)

    np.testing.assert_array_equal(model.params.theta, init_network(tiny_state_spec, 3).theta)
    assert len(report.losses) == 1 and report.losses[0].L_ic == 0.0
    assert report.initial_loss == report.final_loss
    assert not report.failed
    assert set(report.test_mse) == {'v', 'w'}
    assert report.test_pred.shape == (20, 2)


def test_discovery_is_deterministic(short_fn, tiny_state_spec, options):
    problem, obs = short_fn
    runs = [ train_discovery(problem, obs, tiny_state_spec, parse_scheme('AB2'), SHORT, seed = 1, options = options)
             for _ in range(2) ]
    (m1, r1), (m2, r2) = runs
    np.testing.assert_array_equal(m1.params.theta, m2.params.theta)
    assert [ l.as_row() for l in r1.losses ] == [ l.as_row() for l in r2.losses ]
    assert r1.test_mse == r2.test_mse
    assert r1.adam_epochs == 5 and r1.lbfgs_iters <= 3
    assert [ l.epoch for l in r1.losses ] == list(range(len(r1.losses)))
    assert all(l.L_ic >= 0 and l.L_p >= 0 and l.L_d >= 0 for l in r1.losses)


def test_discovery_checks_network_shape(short_fn, tiny_time_spec):
    problem, obs = short_fn
    with pytest.raises(ConfigError):
        train_discovery(problem, obs, tiny_time_spec, parse_scheme('AB2'), ZERO, seed = 0)


def test_pretrain_draws_parameters_inside_bounds(short_fn, tiny_time_spec, options):
    problem, obs = short_fn
    grid = TimeGrid(0.0, 0.1, 20)

    model, report = pretrain(problem, tiny_time_spec, parse_scheme('AB2'), ZERO, seed = 2, grid = grid, options = options)
    assert model.pretrained and not report.failed
    assert np.all(model.lam >= problem.lower_bounds) and np.all(model.lam <= problem.upper_bounds)
    np.testing.assert_array_equal(model.lam, model.lam_init)
    assert model.time_scale == pytest.approx(2.0)
    assert [ p.name for p in report.params ] == ['a', 'b', 'c', 'z']

    again, _ = pretrain(problem, tiny_time_spec, parse_scheme('AB2'), ZERO, seed = 2, grid = grid, options = options)
    np.testing.assert_array_equal(again.lam, model.lam)
    other, _ = pretrain(problem, tiny_time_spec, parse_scheme('AB2'), ZERO, seed = 2, grid = grid,
                        options = TrainOptions(num_test_points = 20, lam_seed = 9))
    assert not np.array_equal(other.lam, model.lam)


def test_finetune_requires_pretrained_model(short_fn, tiny_time_spec):
    problem, obs = short_fn
    grid  = TimeGrid(0.0, 0.1, 20)
    model = EstimationModel(init_network(tiny_time_spec, 0), problem.true_params, problem.true_params,
                            problem.lower_bounds, problem.upper_bounds, parse_scheme('AB2'), grid, problem.name)
    with pytest.raises(ValueError):
        finetune(model, problem, obs, ZERO)


def test_finetune_updates_estimate(short_fn, tiny_time_spec, options):
    problem, obs = short_fn
    grid = TimeGrid(0.0, 0.1, 20)
    pre, _ = pretrain(problem, tiny_time_spec, parse_scheme('AB2'), SHORT, seed = 0, grid = grid, options = options)

    model, report = finetune(pre, problem, obs, SHORT, seed = 0, options = options)
    assert model.phase == 'finetune' and pre.phase == 'pretrain'
    np.testing.assert_array_equal(model.lam_init, pre.lam_init)
    assert not np.array_equal(model.lam, pre.lam)
    assert set(report.rollout_mse) == {'v', 'w'}
    assert all(len(l.L_lambda) == 4 for l in report.losses)

    frozen, _ = finetune(pre, problem, obs, SHORT, seed = 0,
                         options = TrainOptions(num_test_points = 20, freeze_params = True))
    np.testing.assert_array_equal(frozen.lam, pre.lam)
    assert not np.array_equal(frozen.params.theta, pre.params.theta)


def test_finetune_checks_observation_grid(short_fn, tiny_time_spec, options):
    problem, obs = short_fn
    pre, _ = pretrain(problem, tiny_time_spec, parse_scheme('AB2'), ZERO, seed = 0, grid = TimeGrid(0.0, 0.2, 10),
                      options = options)
    with pytest.raises(ConfigError):
        finetune(pre, problem, obs, ZERO, options = options)


def test_finetune_without_pretrain_runs(short_fn, tiny_time_spec, options):
    problem, obs  = short_fn
    model, report = finetune_without_pretrain(problem, obs, tiny_time_spec, SHORT, seed = 4, options = options)
    assert not model.pretrained and not report.failed
    assert np.isfinite(report.final_loss)
    assert len(report.params) == 4


# -----------------------------------------------------------------------------
#  Desk-scale training runs
# -----------------------------------------------------------------------------
DESK = Schedule(adam_lr = 1e-3, adam_epochs = 2000, lbfgs_max_iter = 2000)


def _fn_observations(noise, seed = 0):
    problem = make_fitzhugh_nagumo()
    obs     = synthesize_observations(reference_solution(problem, dt = 0.1), noise, seed = seed)
    return problem, obs


@pytest.mark.slow
def test_fn_discovery_reduces_loss_and_fits_states():
    problem, obs = _fn_observations(0.0)
    spec = MLPConfig(input_dim = 2, output_dim = 2, hidden_layers = 2, hidden_width = 64)
    _, report = train_discovery(problem, obs, spec, parse_scheme('BDF2'), DESK, seed = 0)

    assert not report.failed
    assert report.final_loss * 100 <= report.initial_loss
    assert report.test_mse['v'] <= 5e-2 and report.test_mse['w'] <= 5e-3


@pytest.mark.slow
def test_fn_estimation_recovers_time_scale_parameter_and_beats_ablation():
    config   = load_config('fn-estimate-ab2-20')
    ablation = load_config('ablation-fn-nopretrain-20')
    problem, obs = _fn_observations(config.data.noise, seed = config.seed.data)
    spec    = build_spec(config, problem, for_estimation = True)
    grid    = TimeGrid.from_horizon(problem.t0, problem.t1, config.solver.dt)
    options = build_options(config)

    pre, _ = pretrain(problem, spec, parse_scheme(config.solver.scheme), build_schedule(config.train.pretrain),
                      seed = config.seed.init, grid = grid, options = options)
    model, report = finetune(pre, problem, obs, build_schedule(config.train), seed = config.seed.data, options = options)
    _, no_pre     = finetune_without_pretrain(problem, obs, build_spec(ablation, problem, for_estimation = True),
                                              build_schedule(ablation.train), ablation.seed.init, build_options(ablation))

    c = next(p for p in report.params if p.name == 'c')
    assert c.rel_error <= 0.10
    assert report.test_mse['v'] <= 1e-1 and report.test_mse['w'] <= 1e-1
    assert np.all(model.lam >= problem.lower_bounds) and np.all(model.lam <= problem.upper_bounds)
    assert report.test_mse['v'] < no_pre.test_mse['v']
    assert report.test_mse['w'] < no_pre.test_mse['w']


@pytest.mark.slow
def test_frozen_finetune_on_exact_data_decreases_over_lbfgs_steps():
    problem, obs = _fn_observations(0.0)
    spec = MLPConfig(input_dim = 1, output_dim = 2, hidden_layers = 2, hidden_width = 32)
    grid = TimeGrid.from_horizon(problem.t0, problem.t1, 0.1)
    options = TrainOptions(num_test_points = 50, freeze_params = True)

    pre, _ = pretrain(problem, spec, parse_scheme('AB2'), Schedule(adam_lr = 1e-3, adam_epochs = 200, lbfgs_max_iter = 0),
                      seed = 0, grid = grid, options = options)
    pre.lam = problem.true_params_row.reshape(-1)
    _, report = finetune(pre, problem, obs, Schedule(adam_epochs = 0, lbfgs_max_iter = 100), seed = 0, options = options)

    assert not report.failed, report.failure
    assert report.lbfgs_fallbacks == 0
    totals = np.array([ l.total for l in report.losses[report.adam_epochs:] ])
    assert totals.size == report.lbfgs_iters > 0
    assert np.all(np.diff(totals) <= 0.0)


@pytest.mark.slow
def test_heat_pretrain_at_true_diffusivity_matches_analytic_midpoint():
    M       = 20
    problem = make_heat(num_intervals = M, param_bounds = ((1.0, 1.0),))
    spec    = MLPConfig(input_dim = 1, output_dim = M - 1, hidden_layers = 2, hidden_width = 64)
    grid    = TimeGrid.from_horizon(problem.t0, problem.t1, 0.02)

    model, report = pretrain(problem, spec, parse_scheme('BDF2'), Schedule(adam_lr = 1e-3, adam_epochs = 1000, lbfgs_max_iter = 2000),
                             seed = 0, grid = grid, options = TrainOptions(num_test_points = 200))
    assert not report.failed, report.failure
    np.testing.assert_array_equal(model.lam, [1.0])

    times = np.linspace(problem.t0, problem.t1, 200)
    pred  = model.predict(times)[:, midpoint_index(M)]
    rms   = np.sqrt(np.mean((pred - heat_exact(0.5, times)) ** 2))
    assert rms <= 1e-2
