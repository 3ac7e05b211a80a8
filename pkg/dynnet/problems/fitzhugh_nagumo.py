#!/usr/bin/env python
# -*- coding: utf-8 -*-

import numpy as np

from ..autodiff import as_array, concat
from .base      import ProblemSpec, check_params, param_column

TRUE_PARAMS  = (0.7, 0.8, 12.5, 1.0)                      # ...a, b, c, z
PARAM_BOUNDS = ((0.0, 1.0), (0.0, 1.0), (10.0, 15.0), (0.5, 1.5))


def fn_rhs(state, params):
    """ dv = v - v^3/3 - w + z ; dw = (v + a - b w) / c """
    check_params(params, 4, 'fn_rhs')
    a, b, c, z = (param_column(params, i) for i in range(4))
    if np.any(as_array(c) == 0.0):
        raise ValueError("FitzHugh-Nagumo time-scale parameter c must be non-zero")

    v  = state[:, 0:1]
    w  = state[:, 1:2]
    dv = v - v ** 3 / 3.0 - w + z
    dw = (v + a - b * w) / c
    return concat([dv, dw], axis = 1)


def make_fitzhugh_nagumo(t1 = 20.0, reference_dt = 1e-4, param_bounds = PARAM_BOUNDS):
    return ProblemSpec(
        name              = 'fitzhugh_nagumo',
        state_names       = ('v', 'w'),
        param_names       = ('a', 'b', 'c', 'z'),
        rhs_fn            = lambda t, x, p: fn_rhs(x, p),
        true_params       = TRUE_PARAMS,
        param_bounds      = tuple(tuple(b) for b in param_bounds),
        initial_condition = (-2.8, -1.8),
        t0                = 0.0,
        t1                = float(t1),
        reference_dt      = reference_dt,
    )
