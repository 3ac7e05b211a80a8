#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging

from dataclasses import dataclass
from typing      import Any

import numpy as np

from ..autodiff import as_array, concat, is_tensor

logger = logging.getLogger(__name__)


@dataclass(frozen = True)
class TimeGrid:
    t0       : float
    dt       : float
    num_steps: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"time step must be positive, got {self.dt}")
        if int(self.num_steps) < 1:
            raise ValueError(f"a time grid needs at least one step, got {self.num_steps}")

    @classmethod
    def from_horizon(cls, t0, t1, dt):
        span      = t1 - t0
        num_steps = int(round(span / dt))
        if num_steps < 1 or abs(num_steps * dt - span) > 1e-9 * max(1.0, abs(span)):
            raise ValueError(f"step {dt} does not divide the horizon [{t0}, {t1}]")
        return cls(float(t0), float(dt), num_steps)

    @property
    def t1(self):
        return self.t0 + self.num_steps * self.dt

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.num_steps + 1)

    def time(self, j):
        return self.t0 + j * self.dt


@dataclass
class Trajectory:
    grid  : TimeGrid
    states: Any    # (N+1) x n, numpy array or tape tensor

    @classmethod
    def from_rows(cls, grid, rows):
        return cls(grid, concat(rows, axis = 0))

    @property
    def times(self):
        return self.grid.times

    @property
    def is_recorded(self):
        return is_tensor(self.states)

    def numpy(self):
        return np.array(as_array(self.states))

    def interpolate(self, times):
        """ Piecewise-linear values at `times`, one column per state. """
        times  = np.asarray(times, dtype = np.float64)
        states = self.numpy()
        return np.stack([ np.interp(times, self.times, states[:, i]) for i in range(states.shape[1]) ], axis = 1)


def as_row(x):
    """ A state as a 1 x n row. """
    if is_tensor(x):
        return x if x.ndim == 2 and x.shape[0] == 1 else x.reshape(1, -1)
    x = np.asarray(x, dtype = np.float64)
    return x.reshape(1, -1)
