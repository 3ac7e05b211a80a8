import numpy as np
import pytest

from dynnet.autodiff                   import Tape, finite_diff_gradient
from dynnet.criterion                  import discovery_loss
from dynnet.datasets.observations      import ObservationSet
from dynnet.errors                     import ConvergenceError, SolverError
from dynnet.integrators                import TimeGrid, integrate, implicit_step_solve, parse_scheme
from dynnet.integrators.newton         import fd_jacobian
from dynnet.integrators.runge_kutta    import rk4_start
from dynnet.modeling.mlp               import init_network
from dynnet.modeling.mlp_config        import MLPConfig
from dynnet.modeling.models            import DiscoveryModel

from conftest import relative_gradient_error


def decay(t, x):
    return -x


def final_error(scheme, dt):
    grid = TimeGrid.from_horizon(0.0, 1.0, dt)
    traj = integrate(decay, np.array([[1.0]]), grid, parse_scheme(scheme))
    return abs(traj.numpy()[-1, 0] - np.exp(-1.0))


def measured_order(scheme, dts):
    errors = [ final_error(scheme, dt) for dt in dts ]
    return np.polyfit(np.log(dts), np.log(errors), 1)[0]


def test_rkf45_convergence_order():
    assert measured_order('RKF45', [0.2, 0.1, 0.05]) >= 4.5


@pytest.mark.parametrize("scheme", ['AB2', 'BDF2', 'AB1', 'BDF1', 'AM1', 'AM2', 'AB3', 'BDF3'])
def test_multistep_convergence_order(scheme):
    slope = measured_order(scheme, [0.05, 0.025, 0.0125])
    assert abs(slope - parse_scheme(scheme).order) < 0.25


def test_rk4_bootstrap_is_fourth_order():
    errors = []
    for dt in (0.1, 0.05):
        grid = TimeGrid.from_horizon(0.0, 1.0, dt)
        rows = rk4_start(decay, [1.0], grid, grid.num_steps)
        assert len(rows) == grid.num_steps + 1
        errors.append(abs(float(rows[-1][0, 0]) - np.exp(-1.0)))
    assert 3.8 < np.log2(errors[0] / errors[1]) < 4.2


def test_trajectory_shape_and_times():
    grid = TimeGrid.from_horizon(0.0, 2.0, 0.5)
    traj = integrate(decay, np.array([1.0, 2.0]), grid, parse_scheme('BDF2'))
    assert traj.numpy().shape == (5, 2)
    np.testing.assert_allclose(traj.times, [0.0, 0.5, 1.0, 1.5, 2.0])
    np.testing.assert_array_equal(traj.numpy()[0], [1.0, 2.0])
    assert not traj.is_recorded
    np.testing.assert_allclose(traj.interpolate([0.25])[0], 0.5 * (traj.numpy()[0] + traj.numpy()[1]))


def test_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid.from_horizon(0.0, 1.0, 0.3)
    with pytest.raises(ValueError):
        TimeGrid(0.0, -0.1, 10)
    with pytest.raises(ValueError):
        integrate(decay, [1.0], TimeGrid(0.0, 0.1, 2), parse_scheme('AB3'))


def test_blow_up_is_a_solver_error():
    grid = TimeGrid.from_horizon(0.0, 5.0, 0.5)
    with pytest.raises(SolverError) as excinfo:
        integrate(lambda t, x: x ** 2 * 1e3, np.array([[10.0]]), grid, parse_scheme('AB2'))
    assert excinfo.value.step is not None


def test_newton_finds_root():
    result = implicit_step_solve(lambda x: x * x - 2.0, np.array([[1.0]]))
    assert abs(result.x[0, 0] - np.sqrt(2.0)) < 1e-10
    assert result.residual_norm < 1e-10
    assert 0 < result.iterations <= 25


def test_newton_reports_non_convergence():
    with pytest.raises(ConvergenceError) as excinfo:
        implicit_step_solve(lambda x: x * x + 1.0, np.array([[1.0]]), step = 7)
    assert excinfo.value.step == 7
    assert excinfo.value.iterations == 25
    assert excinfo.value.residual_norm > 0


def test_fd_jacobian_of_linear_map():
    A = np.array([[2.0, -1.0], [0.5, 3.0]])
    J = fd_jacobian(lambda x: x @ A.T, np.array([[0.3, -0.2]]))
    np.testing.assert_allclose(J, A, atol = 1e-6)


def test_unrolled_newton_carries_root_sensitivity():
    with Tape() as tape:
        p      = tape.leaf(np.array([[3.0]]), trainable = True)
        result = implicit_step_solve(lambda x: x * x - p, np.array([[1.0]]))
    grads = tape.backward(result.x.sum())
    assert abs(grads[p][0, 0] - 0.5 / np.sqrt(3.0)) < 1e-6


@pytest.mark.parametrize("scheme", ['RKF45', 'BDF2', 'AB2', 'AM2'])
def test_discovery_loss_gradient_through_solver(scheme):
    spec   = MLPConfig(input_dim = 2, output_dim = 2, hidden_layers = 1, hidden_width = 4)
    params = init_network(spec, seed = 3)
    grid   = TimeGrid(0.0, 0.1, 5)
    model  = DiscoveryModel(params, parse_scheme(scheme), grid)

    times  = grid.times
    states = np.stack([np.cos(times), np.sin(times)], axis = 1)
    obs    = ObservationSet(times, states, 0.0, 0, states.var(axis = 0))
    f_obs  = np.stack([-np.sin(times), np.cos(times)], axis = 1)
    x0     = states[0:1]

    with Tape() as tape:
        theta = tape.leaf(params.theta, trainable = True)
        loss, _ = discovery_loss(model, obs, f_obs, x0, theta)
    g_tape = tape.backward(loss)[theta]

    g_fd = finite_diff_gradient(lambda th: discovery_loss(model, obs, f_obs, x0, th)[0], params.theta, h = 1e-5)
    assert relative_gradient_error(g_tape, g_fd) < 1e-4
