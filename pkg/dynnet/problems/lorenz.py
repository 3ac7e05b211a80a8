#!/usr/bin/env python
# -*- coding: utf-8 -*-

from ..autodiff import concat
from .base      import ProblemSpec, check_params, param_column

TRUE_PARAMS  = (10.0, 8.0 / 3.0, 28.0)                    # ...sigma, beta, rho
PARAM_BOUNDS = ((8.0, 12.0), (2.0, 3.5), (25.0, 30.0))


def lorenz_rhs(state, params):
    check_params(params, 3, 'lorenz_rhs')
    sigma, beta, rho = (param_column(params, i) for i in range(3))

    x  = state[:, 0:1]
    y  = state[:, 1:2]
    z  = state[:, 2:3]
    dx = sigma * (y - x)
    dy = x * (rho - z) - y
    dz = x * y - beta * z
    return concat([dx, dy, dz], axis = 1)


def make_lorenz(t1 = 2.0, reference_dt = 2.5e-4, param_bounds = PARAM_BOUNDS):
    return ProblemSpec(
        name              = 'lorenz',
        state_names       = ('x', 'y', 'z'),
        param_names       = ('sigma', 'beta', 'rho'),
        rhs_fn            = lambda t, x, p: lorenz_rhs(x, p),
        true_params       = TRUE_PARAMS,
        param_bounds      = tuple(tuple(b) for b in param_bounds),
        initial_condition = (-8.0, 7.0, 27.0),
        t0                = 0.0,
        t1                = float(t1),
        reference_dt      = reference_dt,
    )
