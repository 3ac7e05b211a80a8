#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Experiment configuration.

A config file is flat text, one `dotted.key = value` per line with `#`
comments; values are read as YAML scalars or lists.  The file is merged onto
the dataclass schema below, then command-line `key=value` overrides on top.
"""

import logging
import os

from dataclasses import dataclass, field
from typing      import List, Optional

from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

from .errors                   import ConfigError
from .integrators.coefficients import parse_scheme
from .integrators.grid         import TimeGrid
from .utils.logger              import LOG_LEVELS

logger = logging.getLogger(__name__)

MODES = ('discover', 'estimate', 'estimate-no-pretrain', 'stability', 'compare-lmm')

DRC_PRESETS = os.path.join(os.path.dirname(__file__), 'presets')
PRESET_EXT  = '.cfg'

# Adam epochs of the main schedule when the config leaves them unset
ADAM_EPOCHS_DISCOVER = 2000
ADAM_EPOCHS_FINETUNE = 500


@dataclass
class ProblemConfig:
    name         : str             = 'fitzhugh_nagumo'
    t1           : Optional[float] = None    # ...end of the horizon, problem default when unset
    num_intervals: int             = 20      # ...heat only
    diffusivity  : float           = 1.0     # ...heat only


@dataclass
class SolverConfig:
    scheme: str   = 'BDF2'
    dt    : float = 0.1


@dataclass
class DataConfig:
    noise       : float         = 0.0
    cache_dir   : Optional[str] = None    # ...on-disk reference solutions
    observations: Optional[str] = None    # ...observation file to train on instead of synthesizing


@dataclass
class ModelConfig:
    hidden_layers  : int  = 2
    hidden_width   : int  = 64
    skip_connection: bool = False
    time_scale     : str  = 'auto'    # ...'auto' or a number, estimation networks only


@dataclass
class ScheduleConfig:
    adam_lr       : float = 1e-3
    adam_epochs   : int   = 1000
    lbfgs_lr      : float = 1.0
    lbfgs_max_iter: int   = 50000


@dataclass
class TrainConfig:
    adam_lr          : float          = 1e-3
    adam_epochs      : Optional[int]  = None    # ...2000 for discovery, 500 for fine-tuning
    lbfgs_lr         : float          = 1.0
    lbfgs_max_iter   : int            = 50000
    pretrain         : ScheduleConfig = field(default_factory = ScheduleConfig)
    ic_weight        : float          = 1e3
    freeze_params    : bool           = False
    num_test_points  : int            = 200
    monitors_dynamics: bool           = False


@dataclass
class SeedConfig:
    data: int = 0    # ...noise and test points
    init: int = 0    # ...network initialization
    lam : int = 0    # ...initial parameter draw


@dataclass
class CompareConfig:
    task   : str       = 'discover'
    schemes: List[str] = field(default_factory = lambda: ['AB2', 'AM2', 'BDF2'])
    workers: int       = 1


@dataclass
class StabilityConfig:
    schemes : List[str]   = field(default_factory = lambda: [ f"{fam}{k}" for fam in ('AB', 'AM', 'BDF') for k in range(1, 6) ])
    n_points: int         = 401
    probes  : List[float] = field(default_factory = lambda: [-1.0, -10.0, -100.0])


@dataclass
class LoggingConfig:
    directory     : str           = 'logs'
    prefix        : Optional[str] = None
    level         : str           = 'info'
    every         : int           = 100
    shows_progress: bool          = False


@dataclass
class ExperimentConfig:
    mode      : str             = 'discover'
    out       : str             = 'runs/default'
    checkpoint: bool            = True
    problem   : ProblemConfig   = field(default_factory = ProblemConfig)
    solver    : SolverConfig    = field(default_factory = SolverConfig)
    data      : DataConfig      = field(default_factory = DataConfig)
    model     : ModelConfig     = field(default_factory = ModelConfig)
    train     : TrainConfig     = field(default_factory = TrainConfig)
    seed      : SeedConfig      = field(default_factory = SeedConfig)
    compare   : CompareConfig   = field(default_factory = CompareConfig)
    stability : StabilityConfig = field(default_factory = StabilityConfig)
    logging   : LoggingConfig   = field(default_factory = LoggingConfig)


# -----------------------------------------------------------------------------
#  Reading
# -----------------------------------------------------------------------------
def list_presets():
    return sorted(fl[:-len(PRESET_EXT)] for fl in os.listdir(DRC_PRESETS) if fl.endswith(PRESET_EXT))


def resolve_source(source):
    """ A config path, or the name of a packaged preset. """
    if os.path.isfile(source):
        return source
    path = os.path.join(DRC_PRESETS, f"{source}{PRESET_EXT}")
    if os.path.isfile(path):
        return path
    raise ConfigError(f"no config file or preset named '{source}'; presets: {', '.join(list_presets())}")


def parse_dotlist(text, origin = '<text>'):
    """ Lines of `key = value` as OmegaConf dotlist entries `key=value`. """
    dotlist = []
    for line_num, line in enumerate(text.splitlines(), start = 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"{origin}:{line_num}: expected 'key = value', got '{line}'")
        key, value = line.split('=', 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"{origin}:{line_num}: missing key")
        dotlist.append(f"{key}={value.strip()}")
    return dotlist


def read_dotlist(path):
    with open(path, 'r', encoding = 'utf-8') as fh:
        return parse_dotlist(fh.read(), origin = path)


def load_config(source = None, overrides = (), seed_override = None, out = None):
    """
    Schema defaults, then the config file or preset `source`, then
    `overrides`.  `seed_override` sets every seed; `out` the output directory.
    """
    layers = [OmegaConf.structured(ExperimentConfig)]
    try:
        if source is not None:
            layers.append(OmegaConf.from_dotlist(read_dotlist(resolve_source(source))))
        layers.append(OmegaConf.from_dotlist(list(overrides)))
        cfg = OmegaConf.merge(*layers)
        if seed_override is not None:
            cfg.seed.data = cfg.seed.init = cfg.seed.lam = int(seed_override)
        if out is not None:
            cfg.out = out
        config = OmegaConf.to_object(cfg)
    except OmegaConfBaseException as e:
        raise ConfigError(f"invalid configuration: {e}") from e

    if config.train.adam_epochs is None:
        config.train.adam_epochs = default_adam_epochs(config)
    validate_config(config)
    return config


def default_adam_epochs(config):
    task = config.compare.task if config.mode == 'compare-lmm' else config.mode
    return ADAM_EPOCHS_DISCOVER if task in ('discover', 'stability') else ADAM_EPOCHS_FINETUNE


def time_scale_value(config):
    value = str(config.model.time_scale).strip().lower()
    if value == 'auto':
        return 'auto'
    try:
        scale = float(value)
    except ValueError:
        raise ConfigError(f"model.time_scale must be 'auto' or a number, got '{config.model.time_scale}'")
    if not scale > 0:
        raise ConfigError(f"model.time_scale must be positive, got {scale}")
    return scale


def validate_config(config):
    from .problems import ALIASES, PROBLEMS

    if config.mode not in MODES:
        raise ConfigError(f"unknown mode '{config.mode}', expected one of {MODES}")
    if config.logging.level not in LOG_LEVELS:
        raise ConfigError(f"unknown logging.level '{config.logging.level}', expected one of {sorted(LOG_LEVELS)}")
    for key, schedule in (('train', config.train), ('train.pretrain', config.train.pretrain)):
        if schedule.adam_epochs < 0 or schedule.lbfgs_max_iter < 0:
            raise ConfigError(f"{key}: epoch counts must be non-negative, got {schedule.adam_epochs}, {schedule.lbfgs_max_iter}")

    if config.mode == 'stability':
        schemes = config.stability.schemes
    elif config.mode == 'compare-lmm':
        schemes = config.compare.schemes
    else:
        schemes = [config.solver.scheme]
    for name in schemes:
        try:
            scheme = parse_scheme(name)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if config.mode == 'stability' and not scheme.is_lmm:
            raise ConfigError(f"stability analysis covers multistep schemes only, got {name}")

    if config.mode == 'stability':
        if config.stability.n_points < 2:
            raise ConfigError(f"stability.n_points must be at least 2, got {config.stability.n_points}")
        return

    key = ALIASES.get(config.problem.name.lower(), config.problem.name.lower())
    if key not in PROBLEMS:
        raise ConfigError(f"unknown problem '{config.problem.name}', expected one of {sorted(PROBLEMS)}")
    if config.data.noise < 0:
        raise ConfigError(f"data.noise must be non-negative, got {config.data.noise}")
    if config.compare.task not in ('discover', 'estimate'):
        raise ConfigError(f"compare.task must be 'discover' or 'estimate', got '{config.compare.task}'")
    if config.compare.workers < 1:
        raise ConfigError(f"compare.workers must be at least 1, got {config.compare.workers}")
    if config.model.hidden_layers < 1 or config.model.hidden_width < 1:
        raise ConfigError("the network needs at least one hidden layer of positive width")
    if config.train.num_test_points < 1:
        raise ConfigError(f"train.num_test_points must be positive, got {config.train.num_test_points}")
    time_scale_value(config)

    # Grid consistency against the resolved horizon
    from .experiment import build_problem
    problem = build_problem(config)
    try:
        TimeGrid.from_horizon(problem.t0, problem.t1, config.solver.dt)
    except ValueError as e:
        raise ConfigError(f"solver.dt: {e}") from e


def config_to_dict(config):
    return OmegaConf.to_container(OmegaConf.structured(config))


def config_to_dotlist(config):
    """ The resolved config as `key = value` lines, readable by `load_config`. """
    def walk(prefix, node):
        for k, v in node.items():
            key = f"{prefix}.{k}" if prefix else k
            if isinstance(v, dict):
                yield from walk(key, v)
            else:
                yield f"{key} = {_format_scalar(v)}"
    return '\n'.join(walk('', config_to_dict(config))) + '\n'


def _format_scalar(value):
    if value is None:
        return 'null'
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, list):
        return '[' + ', '.join(_format_scalar(v) for v in value) + ']'
    if isinstance(value, float):
        return repr(value)
    return str(value)
