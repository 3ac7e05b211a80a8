#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Experiment pipeline: reference solution, noisy observations, training,
evaluation at randomized test points, and the report files of a run
directory.  Every number written depends only on the config and its seeds;
wall-clock seconds are the exception.
"""

import copy
import logging
import os

from concurrent.futures import ProcessPoolExecutor
from dataclasses        import asdict, dataclass, field
from typing             import Dict, List

import numpy as np
import yaml

from tqdm import tqdm

from .config                   import config_to_dict, config_to_dotlist, time_scale_value
from .criterion                import LOSS_COLUMNS
from .datasets.csv_io          import read_series, read_table, write_series, write_table
from .datasets.observations    import read_observations, synthesize_observations, write_observations
from .errors                   import ConfigError, DynnetError
from .integrators.coefficients import parse_scheme
from .integrators.grid         import TimeGrid
from .integrators.stability    import is_absolutely_stable, stability_boundary
from .metrics                  import PARAM_COLUMNS, compute_mse, relative_error
from .modeling.mlp_config      import MLPConfig
from .modeling.models          import EstimationModel
from .optim                    import Schedule
from .perf                     import Timer
from .plotting                 import emit_loss_plot, emit_plot, emit_stability_plot, emit_state_plots, PlotStyle, Series
from .problems                 import get_problem, midpoint_index, reference_solution
from .trainer                  import TrainOptions, finetune, finetune_without_pretrain, pretrain, train_discovery
from .utils.checkpoint         import Checkpoint

logger = logging.getLogger(__name__)

FL_CONFIG       = 'config.cfg'
FL_REPORT       = 'report.yaml'
FL_REFERENCE    = 'reference.csv'
FL_OBSERVATIONS = 'observations.csv'
FL_METRICS      = 'metrics.csv'
FL_ROLLOUT      = 'rollout_metrics.csv'
FL_PARAMS       = 'params.csv'
FL_LOSSES       = 'losses.csv'
FL_LOSSES_PRE   = 'losses_pretrain.csv'
FL_PREDICTIONS  = 'predictions.csv'
FL_COMPARE      = 'compare.csv'
FL_COMPARE_PAR  = 'compare_params.csv'
FL_PROBES       = 'stability_probes.csv'
DRC_CHECKPOINT  = 'checkpoint'
DRC_CHKPT_PRE   = 'checkpoint_pretrain'


@dataclass
class ExperimentReport:
    mode         : str
    problem      : str
    config       : Dict
    stage        : str             = ''    # ...last stage entered
    failed       : bool            = False
    failure_stage: str             = ''
    failure      : str             = ''
    test_mse     : Dict[str, float] = field(default_factory = dict)
    rollout_mse  : Dict[str, float] = field(default_factory = dict)
    params       : List            = field(default_factory = list)
    seconds      : Dict[str, float] = field(default_factory = dict)
    artifacts    : List[str]       = field(default_factory = list)
    members      : List[Dict]      = field(default_factory = list)
    extra        : Dict            = field(default_factory = dict)

    def mark_failed(self, stage, error):
        self.failed        = True
        self.failure_stage = stage
        self.failure       = str(error)
        logger.error(f"experiment failed at stage '{stage}': {error}")

    def add_artifact(self, path):
        self.artifacts.append(path)
        return path

    def to_dict(self):
        return asdict(self)


# -----------------------------------------------------------------------------
#  Builders
# -----------------------------------------------------------------------------
def build_problem(config):
    kwargs = {}
    if config.problem.t1 is not None:
        kwargs['t1'] = config.problem.t1
    name = config.problem.name.lower()
    if name == 'heat':
        kwargs['num_intervals'] = config.problem.num_intervals
        kwargs['k']             = config.problem.diffusivity
    return get_problem(name, **kwargs)


def build_grid(config, problem):
    return TimeGrid.from_horizon(problem.t0, problem.t1, config.solver.dt)


def build_spec(config, problem, for_estimation):
    return MLPConfig(
        input_dim       = 1 if for_estimation else problem.state_dim,
        output_dim      = problem.state_dim,
        hidden_layers   = config.model.hidden_layers,
        hidden_width    = config.model.hidden_width,
        skip_connection = config.model.skip_connection,
    )


def build_schedule(cfg):
    return Schedule(cfg.adam_lr, cfg.adam_epochs, cfg.lbfgs_lr, cfg.lbfgs_max_iter)


def build_options(config):
    return TrainOptions(
        log_every         = config.logging.every,
        monitors_dynamics = config.train.monitors_dynamics,
        ic_weight         = config.train.ic_weight,
        num_test_points   = config.train.num_test_points,
        test_seed         = config.seed.data,
        lam_seed          = config.seed.lam,
        freeze_params     = config.train.freeze_params,
        time_scale        = time_scale_value(config),
        cache_dir         = config.data.cache_dir,
        shows_progress    = config.logging.shows_progress,
    )


# -----------------------------------------------------------------------------
#  Data generation
# -----------------------------------------------------------------------------
def load_observations(path, grid, reference):
    """ An observation file written by an earlier run, checked against the experiment grid. """
    try:
        obs = read_observations(path)
    except (OSError, ValueError, KeyError) as e:
        raise ConfigError(f"data.observations: cannot read {path}: {e}") from e

    states = reference.numpy()
    if obs.state_dim != states.shape[1]:
        raise ConfigError(f"{path}: {obs.state_dim} states, the problem has {states.shape[1]}")
    if obs.num_times != grid.num_steps + 1 or not np.allclose(obs.times, grid.times, rtol = 0, atol = 1e-9):
        raise ConfigError(f"{path}: {obs.num_times} observation times do not match the grid of {grid.num_steps} steps of {grid.dt:g}")
    obs.exact = states
    return obs


def generate_data(config, report = None):
    """ Reference and observations on the experiment grid, written to the run directory. """
    problem = build_problem(config)
    grid    = build_grid(config, problem)
    os.makedirs(config.out, exist_ok = True)

    seconds = {} if report is None else report.seconds
    with Timer('reference', seconds):
        reference = reference_solution(problem, grid, cache_dir = config.data.cache_dir)
    if config.data.observations:
        obs = load_observations(config.data.observations, grid, reference)
    else:
        obs = synthesize_observations(reference, config.data.noise, config.seed.data)

    path_ref = write_series(os.path.join(config.out, FL_REFERENCE), reference.times, reference.numpy(),
                            problem.state_names, meta = {'problem': problem.name})
    path_obs = write_observations(os.path.join(config.out, FL_OBSERVATIONS), obs, problem.state_names)
    if report is not None:
        report.add_artifact(path_ref)
        report.add_artifact(path_obs)

    logger.info(f"Generated {obs.num_times} observations of {problem.name} (noise {obs.noise}, seed {obs.seed})")
    return problem, grid, reference, obs


# -----------------------------------------------------------------------------
#  Report files
# -----------------------------------------------------------------------------
def _write_losses(report, path, losses):
    rows = [ l.as_row() for l in losses ]
    report.add_artifact(write_table(path, LOSS_COLUMNS, rows))


def _write_metrics(report, path, mse):
    report.add_artifact(write_table(path, ['state', 'mse'], [ [k, v] for k, v in mse.items() ]))


def _write_params(report, path, params):
    report.add_artifact(write_table(path, PARAM_COLUMNS, [ p.as_row() for p in params ]))


def _write_predictions(report, problem, train_report):
    columns = [ f"true_{n}" for n in problem.state_names ] + [ f"pred_{n}" for n in problem.state_names ]
    values  = np.concatenate([train_report.test_true, train_report.test_pred], axis = 1)
    path    = os.path.join(report.config['out'], FL_PREDICTIONS)
    report.add_artifact(write_series(path, train_report.test_times, values, columns, meta = {'problem': problem.name}))


def _emit_state_figures(report, problem, obs, reference, train_report):
    out    = report.config['out']
    prefix = os.path.join(out, 'states')
    if problem.name == 'heat':
        M     = problem.extra['num_intervals']
        col   = midpoint_index(M)
        name  = problem.state_names[col]
        report.extra['midpoint_state'] = name
        series = [
            Series('observed', obs.times, obs.states[:, col], kind = 'observed'),
            Series('exact', reference.times, reference.numpy()[:, col], kind = 'exact'),
            Series('predicted', train_report.test_times, train_report.test_pred[:, col], kind = 'predicted'),
        ]
        path = emit_plot(series, PlotStyle(title = 'u(x = 0.5, t)', ylabel = 'u'), f"{prefix}_x0.5.svg")
        report.add_artifact(path)
        return

    for path in emit_state_plots(problem.state_names, obs.times, obs.states, reference.times, reference.numpy(),
                                 train_report.test_times, train_report.test_pred, prefix, title = problem.name):
        report.add_artifact(path)


def _finish_training(report, problem, obs, reference, train_report, fl_losses = FL_LOSSES):
    out = report.config['out']
    _write_losses(report, os.path.join(out, fl_losses), train_report.losses)
    if train_report.losses:
        report.add_artifact(emit_loss_plot(train_report.losses, os.path.join(out, fl_losses.replace('.csv', '.svg')),
                                           title = train_report.phase))
    if train_report.failed:
        report.mark_failed(train_report.phase, train_report.failure)
        return

    report.test_mse = dict(train_report.test_mse)
    _write_metrics(report, os.path.join(out, FL_METRICS), report.test_mse)
    _write_predictions(report, problem, train_report)
    _emit_state_figures(report, problem, obs, reference, train_report)


def write_report(report):
    path = os.path.join(report.config['out'], FL_REPORT)
    with open(path, 'w') as fh:
        yaml.safe_dump(report.to_dict(), fh, sort_keys = False)
    return path


# -----------------------------------------------------------------------------
#  Modes
# -----------------------------------------------------------------------------
def _run_discover(config, report):
    report.stage = 'data'
    problem, grid, reference, obs = generate_data(config, report)

    report.stage = 'train'
    spec     = build_spec(config, problem, for_estimation = False)
    scheme   = parse_scheme(config.solver.scheme)
    model, r = train_discovery(problem, obs, spec, scheme, build_schedule(config.train), config.seed.init, build_options(config))
    report.seconds['train'] = r.seconds
    report.extra['initial_loss'] = r.initial_loss
    report.extra['final_loss']   = r.final_loss

    _finish_training(report, problem, obs, reference, r)
    if config.checkpoint and not r.failed:
        report.add_artifact(Checkpoint().save(model, os.path.join(config.out, DRC_CHECKPOINT)))


def _restore_estimation_model(state, problem, grid, scheme):
    if state.lam is None:
        raise ConfigError("checkpoint holds no parameter estimate")
    return EstimationModel(
        params       = state.params,
        lam          = state.lam,
        lam_init     = state.lam_init,
        lower        = problem.lower_bounds,
        upper        = problem.upper_bounds,
        scheme       = scheme,
        grid         = grid,
        problem_name = state.problem,
        phase        = state.phase,
        pretrained   = state.pretrained,
        time_scale   = state.time_scale,
    )


def _run_estimate(config, report, uses_pretrain = True):
    report.stage = 'data'
    problem, grid, reference, obs = generate_data(config, report)

    spec    = build_spec(config, problem, for_estimation = True)
    scheme  = parse_scheme(config.solver.scheme)
    options = build_options(config)

    if uses_pretrain:
        report.stage = 'pretrain'
        model, r_pre = pretrain(problem, spec, scheme, build_schedule(config.train.pretrain), config.seed.init, grid, options)
        report.seconds['pretrain'] = r_pre.seconds
        _write_losses(report, os.path.join(config.out, FL_LOSSES_PRE), r_pre.losses)
        if r_pre.failed:
            report.mark_failed(r_pre.phase, r_pre.failure)
            return

        # Fine-tuning starts from the saved pre-trained state
        checkpoint = Checkpoint()
        path_chkpt = report.add_artifact(checkpoint.save(model, os.path.join(config.out, DRC_CHKPT_PRE)))
        model      = _restore_estimation_model(checkpoint.load(path_chkpt), problem, grid, scheme)
        report.stage = 'finetune'
        model, r   = finetune(model, problem, obs, build_schedule(config.train), seed = config.seed.data, options = options)
    else:
        report.stage = 'finetune'
        model, r = finetune_without_pretrain(problem, obs, spec, build_schedule(config.train), config.seed.init, options)

    report.seconds['finetune'] = r.seconds
    report.extra['initial_loss'] = r.initial_loss
    report.extra['final_loss']   = r.final_loss

    report.params = r.params
    _write_params(report, os.path.join(config.out, FL_PARAMS), r.params)
    _finish_training(report, problem, obs, reference, r)
    if r.rollout_mse:
        report.rollout_mse = dict(r.rollout_mse)
        _write_metrics(report, os.path.join(config.out, FL_ROLLOUT), report.rollout_mse)

    in_bounds = bool(np.all((model.lam >= problem.lower_bounds) & (model.lam <= problem.upper_bounds)))
    report.extra['estimate_in_bounds'] = in_bounds
    if not in_bounds:
        logger.warning(f"parameter estimate {model.lam} leaves the configured bounds")

    if config.checkpoint and not r.failed:
        report.add_artifact(Checkpoint().save(model, os.path.join(config.out, DRC_CHECKPOINT)))


def _run_stability(config, report):
    out     = config.out
    regions = []
    probes  = []
    for name in config.stability.schemes:
        scheme = parse_scheme(name)
        region = stability_boundary(scheme, config.stability.n_points)
        regions.append(region)

        rows = [ [t, z.real, z.imag] for t, z in zip(region.theta, region.z) ]
        report.add_artifact(write_table(os.path.join(out, f"stability_{scheme.name}.csv"), ['theta', 're_z', 'im_z'], rows,
                                        meta = {'scheme': scheme.name, 'gaps': len(region.gaps)}))
        for z in config.stability.probes:
            probes.append([scheme.name, float(z), 0.0, int(is_absolutely_stable(scheme, complex(z)))])

        report.extra[scheme.name] = {'closed': bool(region.is_closed), 'gaps': [ float(g) for g in region.gaps ]}

    report.add_artifact(write_table(os.path.join(out, FL_PROBES), ['scheme', 're_z', 'im_z', 'stable'], probes))

    families = {}
    for region in regions:
        families.setdefault(region.scheme.family, []).append(region)
    for family, members in families.items():
        report.add_artifact(emit_stability_plot(members, os.path.join(out, f"stability_{family}.svg"), title = family))


def _member_config(config, scheme):
    member = copy.deepcopy(config)
    member.mode          = config.compare.task
    member.solver.scheme = scheme
    member.out           = os.path.join(config.out, scheme)
    return member


def _run_member(member):
    return run_experiment(member)


def _run_compare(config, report):
    members = [ _member_config(config, s) for s in config.compare.schemes ]
    if config.compare.workers > 1:
        with ProcessPoolExecutor(max_workers = config.compare.workers) as executor:
            results = list(executor.map(_run_member, members))
    else:
        results = [ _run_member(m) for m in tqdm(members, desc = 'compare', disable = not config.logging.shows_progress) ]

    problem = build_problem(config)
    states  = list(problem.state_names)
    if config.compare.task == 'estimate':
        time_columns = ['pretrain_seconds', 'finetune_seconds']
        time_keys    = ['pretrain', 'finetune']
    else:
        time_columns = ['train_seconds']
        time_keys    = ['train']

    rows, param_rows = [], []
    for scheme, member in zip(config.compare.schemes, results):
        mse = [ member.test_mse.get(s, float('nan')) for s in states ]
        sec = [ member.seconds.get(k, float('nan')) for k in time_keys ]
        rows.append([scheme] + mse + sec)
        for p in member.params:
            param_rows.append([scheme] + p.as_row())
        report.members.append({'scheme': scheme, 'failed': member.failed, 'failure': member.failure,
                               'test_mse': dict(member.test_mse), 'seconds': dict(member.seconds)})

    header = ['scheme'] + [ f"mse_{s}" for s in states ] + time_columns
    report.add_artifact(write_table(os.path.join(config.out, FL_COMPARE), header, rows))
    if config.compare.task == 'estimate':
        report.add_artifact(write_table(os.path.join(config.out, FL_COMPARE_PAR), ['scheme'] + PARAM_COLUMNS, param_rows))

    failed = [ m['scheme'] for m in report.members if m['failed'] ]
    if failed:
        report.mark_failed('compare', f"members failed: {', '.join(failed)}")


def run_experiment(config):
    """ Runs the configured mode and writes the run directory; never raises for a failed stage. """
    os.makedirs(config.out, exist_ok = True)
    with open(os.path.join(config.out, FL_CONFIG), 'w') as fh:
        fh.write(config_to_dotlist(config))

    report = ExperimentReport(config.mode, config.problem.name, config_to_dict(config))
    report.add_artifact(os.path.join(config.out, FL_CONFIG))

    with Timer('total', report.seconds):
        try:
            if config.mode == 'discover':
                _run_discover(config, report)
            elif config.mode == 'estimate':
                _run_estimate(config, report, uses_pretrain = True)
            elif config.mode == 'estimate-no-pretrain':
                _run_estimate(config, report, uses_pretrain = False)
            elif config.mode == 'stability':
                _run_stability(config, report)
            elif config.mode == 'compare-lmm':
                _run_compare(config, report)
            else:
                raise ConfigError(f"unknown mode '{config.mode}'")
        except (DynnetError, ValueError) as e:
            report.mark_failed(report.stage or config.mode, e)

    report.add_artifact(os.path.join(config.out, FL_REPORT))
    write_report(report)
    return report


# -----------------------------------------------------------------------------
#  Re-checking a run directory
# -----------------------------------------------------------------------------
def recheck_run(drc):
    """
    Recomputes per-state MSE from predictions.csv and relative errors from
    params.csv, returning (state rows, param rows) with the stored values
    next to the recomputed ones.
    """
    _, columns, _, values = read_series(os.path.join(drc, FL_PREDICTIONS))
    states = [ c[len('true_'):] for c in columns if c.startswith('true_') ]
    n      = len(states)

    _, _, stored = read_table(os.path.join(drc, FL_METRICS))
    stored = { row[0]: float(row[1]) for row in stored }
    state_rows = []
    for i, name in enumerate(states):
        mse = compute_mse(values[:, n + i], values[:, i])
        state_rows.append([name, stored.get(name, float('nan')), mse])

    param_rows = []
    path_params = os.path.join(drc, FL_PARAMS)
    if os.path.exists(path_params):
        _, _, rows = read_table(path_params)
        for name, true, initial, estimate, rel in rows:
            param_rows.append([name, float(rel), relative_error(float(estimate), float(true))])

    return state_rows, param_rows
