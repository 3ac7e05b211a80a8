#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging

from dataclasses import dataclass, field
from typing      import Callable, Dict, Optional, Tuple

import numpy as np

from ..autodiff import as_array

logger = logging.getLogger(__name__)


@dataclass(frozen = True)
class ProblemSpec:
    """
    A benchmark system dx/dt = f(t, x; lam).  `rhs_fn(t, x, params)` takes
    states as rows (batch x n) and parameters as a 1 x p row, either numpy
    arrays or tape tensors.
    """
    name             : str
    state_names      : Tuple[str, ...]
    param_names      : Tuple[str, ...]
    rhs_fn           : Callable
    true_params      : Tuple[float, ...]
    param_bounds     : Tuple[Tuple[float, float], ...]
    initial_condition: Tuple[float, ...]
    t0               : float = 0.0
    t1               : float = 1.0
    reference_dt     : Optional[float]    = None    # ...fine RKF45 step
    exact_fn         : Optional[Callable] = None    # ...times -> (T, n) closed form
    extra            : Dict               = field(default_factory = dict)

    def __post_init__(self):
        if len(self.initial_condition) != len(self.state_names):
            raise ValueError(f"{self.name}: initial condition has {len(self.initial_condition)} entries for {len(self.state_names)} states")
        if len(self.param_bounds) != len(self.true_params) or len(self.param_names) != len(self.true_params):
            raise ValueError(f"{self.name}: parameter names, values and bounds disagree in length")
        for name, value, (lo, hi) in zip(self.param_names, self.true_params, self.param_bounds):
            if not lo <= value <= hi:
                raise ValueError(f"{self.name}: true {name} = {value} outside bounds [{lo}, {hi}]")
        if not self.t1 > self.t0:
            raise ValueError(f"{self.name}: empty horizon [{self.t0}, {self.t1}]")
        if self.reference_dt is None and self.exact_fn is None:
            raise ValueError(f"{self.name}: needs a reference step or a closed-form solution")
        if not np.all(np.isfinite(self.rhs(self.t0, self.x0))):
            raise ValueError(f"{self.name}: right-hand side is not finite at the initial condition")

    @property
    def state_dim(self):
        return len(self.state_names)

    @property
    def num_params(self):
        return len(self.true_params)

    @property
    def x0(self):
        return np.asarray(self.initial_condition, dtype = np.float64).reshape(1, -1)

    @property
    def true_params_row(self):
        return np.asarray(self.true_params, dtype = np.float64).reshape(1, -1)

    @property
    def lower_bounds(self):
        return np.array([ lo for lo, _ in self.param_bounds ])

    @property
    def upper_bounds(self):
        return np.array([ hi for _, hi in self.param_bounds ])

    @property
    def horizon(self):
        return self.t1 - self.t0

    def rhs(self, t, x, params = None):
        params = self.true_params_row if params is None else params
        return self.rhs_fn(t, x, params)

    def bind(self, params = None):
        """ rhs(t, x) with the parameters fixed. """
        params = self.true_params_row if params is None else params
        return lambda t, x: self.rhs_fn(t, x, params)

    def exact(self, times):
        if self.exact_fn is None:
            raise ValueError(f"{self.name} has no closed-form solution")
        return self.exact_fn(np.asarray(times, dtype = np.float64))


def param_column(params, i):
    """ The i-th parameter as a 1 x 1 column, for broadcasting against state columns. """
    return params[:, i:i + 1]


def check_params(params, count, name):
    if as_array(params).shape != (1, count):
        raise ValueError(f"{name} expects a 1 x {count} parameter row, got shape {as_array(params).shape}")
