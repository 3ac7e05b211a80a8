#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Reference ("exact") solutions: fine-step RKF45 subsampled onto an
experiment grid, or the closed form where one exists.  Fine trajectories are
cached in memory and, given a directory, on disk.
"""

import logging
import os

import numpy as np

from ..datasets.csv_io         import read_series, write_series
from ..integrators.grid        import TimeGrid, Trajectory
from ..integrators.runge_kutta import rkf45_integrate

logger = logging.getLogger(__name__)

_CACHE = {}


def _stride(problem, dt):
    stride = int(round(dt / problem.reference_dt))
    if stride < 1 or abs(stride * problem.reference_dt - dt) > 1e-9 * dt:
        raise ValueError(f"{problem.name}: reference step {problem.reference_dt} does not divide the experiment step {dt}")
    return stride


def _fine_states(problem, num_fine_steps, cache_dir = None):
    key = (problem.name, problem.true_params, problem.initial_condition, problem.t0,
           problem.reference_dt, num_fine_steps)
    if key in _CACHE:
        return _CACHE[key]

    fine_grid = TimeGrid(problem.t0, problem.reference_dt, num_fine_steps)
    path      = None
    if cache_dir is not None:
        path = os.path.join(cache_dir, f"{problem.name}.dt{problem.reference_dt:g}.n{num_fine_steps}.csv")

    if path is not None and os.path.exists(path):
        _, _, _, states = read_series(path)
        logger.info(f"Loaded cached reference {path}")
    else:
        states = rkf45_integrate(problem.bind(), problem.x0, fine_grid).numpy()
        if path is not None:
            write_series(path, fine_grid.times, states, problem.state_names,
                         meta = {'problem': problem.name, 'scheme': 'RKF45', 'dt': problem.reference_dt})
            logger.info(f"Cached reference {path}")

    _CACHE[key] = states
    return states


def reference_solution(problem, grid = None, dt = None, cache_dir = None):
    """
    Reference trajectory on `grid` (or on the problem horizon with step
    `dt`).  ODE problems are integrated at the fine step and subsampled.
    """
    if grid is None:
        if dt is None:
            raise ValueError("reference_solution needs a grid or a step")
        grid = TimeGrid.from_horizon(problem.t0, problem.t1, dt)

    if problem.exact_fn is not None:
        return Trajectory(grid, problem.exact(grid.times))

    if abs(grid.t0 - problem.t0) > 1e-12:
        raise ValueError(f"{problem.name}: reference grid must start at t0 = {problem.t0}, got {grid.t0}")

    stride = _stride(problem, grid.dt)
    fine   = _fine_states(problem, grid.num_steps * stride, cache_dir)
    return Trajectory(grid, fine[::stride].copy())


def reference_at(problem, times, cache_dir = None):
    """ Reference values at arbitrary times in the horizon, linear between fine steps. """
    times = np.asarray(times, dtype = np.float64)
    if problem.exact_fn is not None:
        return problem.exact(times)

    fine_grid = TimeGrid.from_horizon(problem.t0, problem.t1, problem.reference_dt)
    fine      = Trajectory(fine_grid, _fine_states(problem, fine_grid.num_steps, cache_dir))
    return fine.interpolate(times)


def clear_cache():
    _CACHE.clear()
