#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
u_t = k u_xx on 0 < x < 1 with u(0, t) = 0, u_x(1, t) = 0 and
u(x, 0) = sin(pi x / 2), discretized in space on M intervals.  The state is
the interior nodes u_1 .. u_{M-1}; the boundary values are closed with
u_0 = 0 and u_M = u_{M-1}.
"""

import numpy as np

from ..autodiff import as_array, concat
from ..errors   import ShapeError
from .base      import ProblemSpec, check_params, param_column

TRUE_PARAMS  = (1.0,)
PARAM_BOUNDS = ((0.5, 2.0),)
LENGTH       = 1.0


def heat_mol_rhs(u, k, M):
    if int(M) < 2:
        raise ValueError(f"the heat discretization needs M >= 2 intervals, got {M}")
    if len(u.shape) != 2 or u.shape[1] != M - 1:
        raise ShapeError(f"heat state must have M - 1 = {M - 1} columns, got shape {tuple(u.shape)}")

    h      = LENGTH / M
    batch  = u.shape[0]
    padded = concat([np.zeros((batch, 1)), u, u[:, M - 2:M - 1]], axis = 1)
    second = padded[:, 2:] - padded[:, 1:-1] * 2.0 + padded[:, :-2]
    return second * (k * (1.0 / h ** 2))


def heat_exact(x, t, k = 1.0):
    x = np.asarray(x, dtype = np.float64)
    t = np.asarray(t, dtype = np.float64)
    return np.sin(np.pi * x / 2.0) * np.exp(-k * np.pi ** 2 * t / 4.0)


def interior_nodes(M):
    return np.arange(1, M) * (LENGTH / M)


def make_heat(num_intervals = 20, t1 = 2.5, k = 1.0, param_bounds = PARAM_BOUNDS):
    M     = int(num_intervals)
    nodes = interior_nodes(M)

    def rhs_fn(t, x, params):
        check_params(params, 1, 'heat_mol_rhs')
        return heat_mol_rhs(x, param_column(params, 0), M)

    def exact_fn(times):
        return heat_exact(nodes[None, :], times[:, None], k)

    return ProblemSpec(
        name              = 'heat',
        state_names       = tuple(f"u{i}" for i in range(1, M)),
        param_names       = ('k',),
        rhs_fn            = rhs_fn,
        true_params       = (float(k),),
        param_bounds      = tuple(tuple(b) for b in param_bounds),
        initial_condition = tuple(heat_exact(nodes, 0.0)),
        t0                = 0.0,
        t1                = float(t1),
        exact_fn          = exact_fn,
        extra             = {'num_intervals': M, 'nodes': tuple(nodes)},
    )


def midpoint_index(M):
    """ Column of the node x = 0.5 in the interior state. """
    if M % 2:
        raise ValueError(f"x = 0.5 is a node only for even M, got {M}")
    return M // 2 - 1
