#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Training procedures: dynamics discovery, pre-training of an estimation
network on a numerical solution with drawn parameters, and fine-tuning of
network and parameters against observations.  Each runs Adam followed by
L-BFGS and returns the trained model with a `TrainingReport`.
"""

import logging

from collections import OrderedDict
from dataclasses import dataclass, field
from typing      import Dict, List, Optional, Union

import numpy as np

from tqdm import tqdm

from .autodiff                 import Tape, as_array, no_record
from .criterion                import LossBreakdown, discovery_loss, finetune_loss, pretrain_loss, IC_WEIGHT_FINETUNE
from .datasets.observations    import finite_diff_rhs, test_points
from .errors                   import ConfigError, DynnetError, SolverError
from .integrators.grid         import TimeGrid
from .integrators.multistep    import integrate
from .integrators.runge_kutta  import rkf45_integrate
from .metrics                  import parameter_table, per_state_mse
from .modeling.mlp             import NetworkParams, init_network
from .modeling.models          import DiscoveryModel, EstimationModel, PHASE_FINETUNE, PHASE_PRETRAIN
from .optim                    import is_logging_due, minimize_schedule
from .perf                     import Timer
from .problems.reference       import reference_at
from .utils.monitor            import log_param_update_metrics, monitor_param_update_metrics
from .utils.seed               import STREAM_LAMBDA, make_rng

logger = logging.getLogger(__name__)

PHASE_DISCOVERY = 'discovery'


@dataclass
class TrainOptions:
    log_every        : Optional[int]     = None
    monitors_dynamics: bool              = False
    ic_weight        : float             = IC_WEIGHT_FINETUNE
    num_test_points  : int               = 200
    test_seed        : Optional[int]     = None    # ...defaults to the training seed
    lam_seed         : Optional[int]     = None    # ...initial parameter draw, defaults to the training seed
    freeze_params    : bool              = False
    time_scale       : Union[str, float] = 'auto'
    cache_dir        : Optional[str]     = None
    shows_progress   : bool              = False


@dataclass
class TrainingReport:
    phase          : str
    seed           : int
    losses         : List[LossBreakdown] = field(default_factory = list)
    initial_loss   : Optional[float]     = None
    final_loss     : Optional[float]     = None
    seconds        : float               = 0.0
    adam_epochs    : int                 = 0
    lbfgs_iters    : int                 = 0
    lbfgs_fallbacks: int                 = 0
    failed         : bool                = False
    failure        : str                 = ''
    test_times     : Optional[np.ndarray] = None
    test_true      : Optional[np.ndarray] = None
    test_pred      : Optional[np.ndarray] = None
    test_mse       : Dict[str, float]    = field(default_factory = dict)
    rollout_mse    : Dict[str, float]    = field(default_factory = dict)
    params         : List                = field(default_factory = list)

    def mark_failed(self, stage, error):
        self.failed  = True
        self.failure = f"{stage}: {error}"
        logger.error(f"{self.phase} failed during {stage}: {error}")


class Objective:
    """
    loss_fn(x) -> (loss, grad) for the optimizers.  Every call records a new
    tape with x as its single trainable leaf.  Recent breakdowns are kept so
    the accepted point of a line search can be reported without recomputing.
    """
    def __init__(self, build, memo_size = 32):
        self.build       = build
        self.memo        = OrderedDict()
        self.memo_size   = memo_size
        self.evaluations = 0

    def __call__(self, x):
        x = np.asarray(x, dtype = np.float64)
        with Tape() as tape:
            leaf         = tape.leaf(x, trainable = True)
            total, parts = self.build(leaf)
        grad = tape.backward(total)[leaf]
        loss = float(as_array(total).reshape(-1)[0])

        self.evaluations += 1
        self.memo[x.tobytes()] = (parts, grad)
        if len(self.memo) > self.memo_size:
            self.memo.popitem(last = False)
        return loss, grad

    def lookup(self, x):
        key = np.asarray(x, dtype = np.float64).tobytes()
        if key not in self.memo:
            self(x)
        return self.memo[key]


def _run_schedule(objective, x0, schedule, report, options, spec, num_extra = 0):
    """ Runs the schedule, filling losses and failure state of `report`; returns the final vector. """
    last_x   = [np.array(x0, dtype = np.float64)]
    progress = tqdm(total = schedule.adam_epochs + schedule.lbfgs_max_iter, desc = report.phase,
                    disable = not options.shows_progress, leave = False)

    def on_epoch(epoch, phase, x, loss):
        parts, grad = objective.lookup(x)
        parts = parts.with_epoch(epoch)
        report.losses.append(parts)
        last_x[0] = np.array(x)

        if is_logging_due(epoch, options.log_every):
            logger.info(f"{report.phase} {phase:5s} epoch {epoch:6d} | L_ic {parts.L_ic:.3e} | L_p {parts.L_p:.3e} "
                        f"| L_d {parts.L_d:.3e} | L_lambda {parts.L_lambda_total:.3e} | total {parts.total:.6e}")
            if options.monitors_dynamics:
                lr = schedule.adam_lr if phase == 'adam' else schedule.lbfgs_lr
                log_param_update_metrics(epoch, monitor_param_update_metrics(spec, x, grad, lr, num_extra))

    x = last_x[0]
    try:
        result = minimize_schedule(objective, x, schedule, on_epoch = on_epoch, progress = progress)
        x = result.params
        report.final_loss  = result.loss
        report.adam_epochs = result.adam_epochs
        report.lbfgs_iters = result.lbfgs_iters
        if result.lbfgs_state is not None:
            report.lbfgs_fallbacks = result.lbfgs_state.fallbacks
        if not report.losses:
            report.losses.append(objective.lookup(x)[0].with_epoch(0))
    except DynnetError as e:
        report.mark_failed(f"epoch {len(report.losses)}", e)
        x = last_x[0]
        report.final_loss = report.losses[-1].total if report.losses else None
    finally:
        progress.close()

    report.initial_loss = report.losses[0].total if report.losses else report.final_loss
    return x


def _resolve_time_scale(time_scale, grid):
    if time_scale in (None, 'auto'):
        return grid.t1 - grid.t0
    return float(time_scale)


def _lam_seed(seed, options):
    return seed if options.lam_seed is None else options.lam_seed


def _draw_params(problem, rng):
    return problem.lower_bounds + (problem.upper_bounds - problem.lower_bounds) * rng.random(problem.num_params)


def _grid_of(obs):
    return TimeGrid(float(obs.times[0]), obs.dt, obs.num_times - 1)


def _test_targets(problem, grid, seed, options):
    test_seed = seed if options.test_seed is None else options.test_seed
    times     = test_points(grid.t0, grid.t1, options.num_test_points, test_seed)
    return times, reference_at(problem, times, cache_dir = options.cache_dir)


# -----------------------------------------------------------------------------
#  Dynamics discovery
# -----------------------------------------------------------------------------
def train_discovery(problem, obs, spec, scheme, schedule, seed, options = None):
    options = TrainOptions() if options is None else options
    if spec.input_dim != problem.state_dim or spec.output_dim != problem.state_dim:
        raise ConfigError(f"a discovery network for {problem.name} maps {problem.state_dim} states to "
                          f"{problem.state_dim} rates, got {spec.input_dim} -> {spec.output_dim}")

    grid   = _grid_of(obs)
    model  = DiscoveryModel(init_network(spec, seed), scheme, grid)
    report = TrainingReport(PHASE_DISCOVERY, seed)
    x0     = problem.x0
    f_obs  = finite_diff_rhs(obs)

    objective = Objective(lambda theta: discovery_loss(model, obs, f_obs, x0, theta))
    with Timer() as timer:
        theta = _run_schedule(objective, model.params.theta, schedule, report, options, spec)
    model.params   = NetworkParams(spec, theta)
    report.seconds = timer.duration

    try:
        times, true = _test_targets(problem, grid, seed, options)
        pred        = model.predict(x0, times)
        report.test_times, report.test_true, report.test_pred = times, true, pred
        report.test_mse = per_state_mse(pred, true, problem.state_names)
    except DynnetError as e:
        report.mark_failed('evaluation', e)

    logger.info(f"discovery finished in {report.seconds:.1f} s, test MSE {report.test_mse}")
    return model, report


# -----------------------------------------------------------------------------
#  Parameter estimation
# -----------------------------------------------------------------------------
def pretrain(problem, spec, scheme, schedule, seed, grid, options = None):
    """
    Fit a network of time to the solution of the known equations at
    parameters drawn uniformly inside their bounds.
    """
    options = TrainOptions() if options is None else options
    if spec.input_dim != 1 or spec.output_dim != problem.state_dim:
        raise ConfigError(f"an estimation network for {problem.name} maps time to {problem.state_dim} states, "
                          f"got {spec.input_dim} -> {spec.output_dim}")

    report = TrainingReport(PHASE_PRETRAIN, seed)
    rng    = make_rng(_lam_seed(seed, options), STREAM_LAMBDA)

    x_nm = None
    for attempt in range(2):
        lam = _draw_params(problem, rng)
        try:
            with no_record():
                x_nm = integrate(problem.bind(lam.reshape(1, -1)), problem.x0, grid, scheme).numpy()
            break
        except SolverError as e:
            logger.warning(f"pretrain: solver failed at drawn parameters {lam} ({e})")
            if attempt == 1:
                report.mark_failed('numerical solution', e)

    model = EstimationModel(
        params       = init_network(spec, seed),
        lam          = lam,
        lam_init     = lam.copy(),
        lower        = problem.lower_bounds,
        upper        = problem.upper_bounds,
        scheme       = scheme,
        grid         = grid,
        problem_name = problem.name,
        phase        = PHASE_PRETRAIN,
        time_scale   = _resolve_time_scale(options.time_scale, grid),
    )
    report.params = parameter_table(problem.param_names, problem.true_params, model.lam_init, model.lam)
    if x_nm is None:
        return model, report

    objective = Objective(lambda theta: pretrain_loss(model, x_nm, problem.x0, theta))
    with Timer() as timer:
        theta = _run_schedule(objective, model.params.theta, schedule, report, options, spec)
    model.params     = NetworkParams(spec, theta)
    model.pretrained = not report.failed
    report.seconds   = timer.duration

    logger.info(f"pretrain finished in {report.seconds:.1f} s, final loss {report.final_loss}")
    return model, report


def _finetune(model, problem, obs, schedule, seed, options):
    if obs.num_times != model.grid.num_steps + 1 or not np.allclose(obs.times, model.grid.times, rtol = 0, atol = 1e-9):
        raise ConfigError("observations and the estimation grid disagree")

    model.phase = PHASE_FINETUNE
    report      = TrainingReport(PHASE_FINETUNE, seed)
    x0          = problem.x0
    spec        = model.spec

    if options.freeze_params:
        frozen    = model.lam.copy()
        objective = Objective(lambda theta: finetune_loss(model, problem, obs, x0, theta, options.ic_weight, frozen_lam = frozen))
        start     = model.params.theta
        num_extra = 0
    else:
        objective = Objective(lambda theta_tilde: finetune_loss(model, problem, obs, x0, theta_tilde, options.ic_weight))
        start     = model.theta_tilde
        num_extra = problem.num_params

    with Timer() as timer:
        vec = _run_schedule(objective, start, schedule, report, options, spec, num_extra)
    report.seconds = timer.duration

    if options.freeze_params:
        model.params = NetworkParams(spec, vec)
    else:
        theta, lam   = model.split(vec)
        model.params = NetworkParams(spec, theta)
        model.lam    = np.array(lam).reshape(-1)

    report.params = parameter_table(problem.param_names, problem.true_params, model.lam_init, model.lam)

    try:
        times, true = _test_targets(problem, model.grid, seed, options)
        pred        = model.predict(times)
        report.test_times, report.test_true, report.test_pred = times, true, pred
        report.test_mse = per_state_mse(pred, true, problem.state_names)
    except DynnetError as e:
        report.mark_failed('evaluation', e)
        return model, report

    # States from the known equations at the estimated parameters
    try:
        rollout = rkf45_integrate(problem.bind(model.lam.reshape(1, -1)), x0, model.grid)
        report.rollout_mse = per_state_mse(rollout.interpolate(times), true, problem.state_names)
    except DynnetError as e:
        logger.warning(f"finetune: rollout at the estimated parameters failed ({e})")
        report.rollout_mse = { name : float('nan') for name in problem.state_names }

    estimates = ', '.join(f"{p.name}={p.estimate:.4f}" for p in report.params)
    logger.info(f"finetune finished in {report.seconds:.1f} s, {estimates}, test MSE {report.test_mse}")
    return model, report


def finetune(model, problem, obs, schedule, seed = 0, options = None):
    """ Train network and parameter estimate jointly, starting from a pre-trained model. """
    if not model.pretrained:
        raise ValueError("finetune needs a pre-trained model; use finetune_without_pretrain to skip pre-training")
    options = TrainOptions() if options is None else options
    return _finetune(model.copy(), problem, obs, schedule, seed, options)


def finetune_without_pretrain(problem, obs, spec, schedule, seed, options = None):
    """ Fine-tuning from a freshly initialized network, for the pre-training ablation. """
    options = TrainOptions() if options is None else options
    if spec.input_dim != 1 or spec.output_dim != problem.state_dim:
        raise ConfigError(f"an estimation network for {problem.name} maps time to {problem.state_dim} states, "
                          f"got {spec.input_dim} -> {spec.output_dim}")

    grid  = _grid_of(obs)
    lam   = _draw_params(problem, make_rng(_lam_seed(seed, options), STREAM_LAMBDA))
    model = EstimationModel(
        params       = init_network(spec, seed),
        lam          = lam,
        lam_init     = lam.copy(),
        lower        = problem.lower_bounds,
        upper        = problem.upper_bounds,
        scheme       = None,
        grid         = grid,
        problem_name = problem.name,
        time_scale   = _resolve_time_scale(options.time_scale, grid),
    )
    return _finetune(model, problem, obs, schedule, seed, options)
