#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
The two trainable models.  A discovery model is a network used as the
right-hand side inside an integrator; an estimation model is a network of
time together with an estimate of the physical parameters.
"""

import logging

from dataclasses import dataclass

import numpy as np

from ..autodiff               import as_array
from ..integrators.grid       import TimeGrid
from ..integrators.multistep  import integrate
from .mlp                     import MLP, NetworkParams

logger = logging.getLogger(__name__)

PHASE_PRETRAIN = 'pretrain'
PHASE_FINETUNE = 'finetune'


@dataclass
class DiscoveryModel:
    params: NetworkParams
    scheme: object
    grid  : TimeGrid

    @property
    def spec(self):
        return self.params.spec

    def network(self, theta = None):
        return MLP(self.spec, self.params.theta if theta is None else theta)

    def rhs(self, theta = None):
        net = self.network(theta)
        return lambda t, x: net(x)

    def rollout(self, x0, theta = None, grid = None):
        return integrate(self.rhs(theta), x0, self.grid if grid is None else grid, self.scheme)

    def predict(self, x0, times):
        return self.rollout(x0).interpolate(times)


@dataclass
class EstimationModel:
    params      : NetworkParams
    lam         : np.ndarray
    lam_init    : np.ndarray
    lower       : np.ndarray
    upper       : np.ndarray
    scheme      : object
    grid        : TimeGrid
    problem_name: str
    phase       : str   = PHASE_PRETRAIN
    pretrained  : bool  = False
    time_scale  : float = 1.0

    def __post_init__(self):
        self.lam      = np.asarray(self.lam     , dtype = np.float64).reshape(-1)
        self.lam_init = np.asarray(self.lam_init, dtype = np.float64).reshape(-1)
        self.lower    = np.asarray(self.lower   , dtype = np.float64).reshape(-1)
        self.upper    = np.asarray(self.upper   , dtype = np.float64).reshape(-1)
        if self.params.spec.input_dim != 1:
            raise ValueError(f"an estimation network takes time as its only input, got input_dim {self.params.spec.input_dim}")
        if not self.time_scale > 0:
            raise ValueError(f"time scale must be positive, got {self.time_scale}")

    @property
    def spec(self):
        return self.params.spec

    @property
    def num_theta(self):
        return self.params.theta.size

    @property
    def theta_tilde(self):
        return np.concatenate([self.params.theta, self.lam])

    def split(self, vec):
        """ (theta, lam as a 1 x p row) from an augmented vector, array or tensor. """
        theta = vec[0:self.num_theta]
        lam   = vec[self.num_theta:]
        return theta, lam.reshape(1, -1)

    def network_input(self, times):
        times = np.asarray(times, dtype = np.float64).reshape(-1, 1)
        return (times - self.grid.t0) / self.time_scale

    def network(self, theta = None):
        return MLP(self.spec, self.params.theta if theta is None else theta)

    def states_and_rates(self, times, theta = None):
        """ Network output X(t) and dX/dt at `times`. """
        out, dout = self.network(theta).forward_with_time_derivative(self.network_input(times))
        return out, dout * (1.0 / self.time_scale)

    def predict(self, times):
        return np.array(as_array(self.network().forward(self.network_input(times))))

    def copy(self):
        return EstimationModel(self.params.copy(), self.lam.copy(), self.lam_init.copy(), self.lower.copy(),
                               self.upper.copy(), self.scheme, self.grid, self.problem_name, self.phase,
                               self.pretrained, self.time_scale)
