#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging

import numpy as np

from ..autodiff import as_array
from ..errors   import NonFiniteError, SolverError
from .grid      import Trajectory, as_row

logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------------
#  Butcher tableaux
# -----------------------------------------------------------------------------
FEHLBERG_C  = (0.0, 1/4, 3/8, 12/13, 1.0, 1/2)
FEHLBERG_A  = (
    (),
    (1/4,),
    (3/32,       9/32),
    (1932/2197, -7200/2197,  7296/2197),
    (439/216,   -8.0,        3680/513,   -845/4104),
    (-8/27,      2.0,       -3544/2565,   1859/4104, -11/40),
)
FEHLBERG_B5 = (16/135, 0.0, 6656/12825, 28561/56430, -9/50, 2/55)
FEHLBERG_B4 = (25/216, 0.0, 1408/2565,  2197/4104,   -1/5,  0.0)

RK4_C = (0.0, 1/2, 1/2, 1.0)
RK4_A = (
    (),
    (1/2,),
    (0.0, 1/2),
    (0.0, 0.0, 1.0),
)
RK4_B = (1/6, 1/3, 1/3, 1/6)


def weighted_sum(coeffs, items, scale = 1.0):
    """ sum_i scale * c_i * items_i over non-zero coefficients, or None. """
    total = None
    for c, item in zip(coeffs, items):
        if c == 0.0: continue
        term  = item * (scale * c)
        total = term if total is None else total + term
    return total


def explicit_rk_step(rhs, t, x, dt, c, a, b):
    stages = []
    for c_i, a_i in zip(c, a):
        increment = weighted_sum(a_i, stages, dt)
        x_stage   = x if increment is None else x + increment
        stages.append(rhs(t + c_i * dt, x_stage))
    return x + weighted_sum(b, stages, dt), stages


def rk4_step(rhs, t, x, dt):
    return explicit_rk_step(rhs, t, x, dt, RK4_C, RK4_A, RK4_B)[0]


def rkf45_step(rhs, t, x, dt):
    """ One fixed Fehlberg step propagating the fifth-order value; also returns the 4(5) error estimate. """
    x_next, stages = explicit_rk_step(rhs, t, x, dt, FEHLBERG_C, FEHLBERG_A, FEHLBERG_B5)
    err = dt * sum((b5 - b4) * as_array(k) for b5, b4, k in zip(FEHLBERG_B5, FEHLBERG_B4, stages))
    return x_next, float(np.max(np.abs(err)))


def check_state(x, step):
    if not np.all(np.isfinite(as_array(x))):
        raise SolverError("non-finite state", step = step)


def rkf45_integrate(rhs, x0, grid):
    x    = as_row(x0)
    rows = [x]
    max_err = 0.0
    for n in range(grid.num_steps):
        try:
            x, err = rkf45_step(rhs, grid.time(n), x, grid.dt)
        except NonFiniteError as e:
            raise SolverError(f"non-finite state in RKF45 ({e})", step = n + 1) from e
        check_state(x, n + 1)
        max_err = max(max_err, err)
        rows.append(x)

    logger.debug(f"RKF45: {grid.num_steps} steps of {grid.dt:g}, max local error estimate {max_err:.3e}")
    return Trajectory.from_rows(grid, rows)


def rk4_start(rhs, x0, grid, count):
    """ x0 and the next `count` states by classical RK4, as 1 x n rows; starting values of a multistep scheme. """
    rows = [as_row(x0)]
    for n in range(count):
        rows.append(rk4_step(rhs, grid.time(n), rows[-1], grid.dt))
        check_state(rows[-1], n + 1)
    return rows
