#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Loss terms for dynamics discovery and for the two phases of parameter
estimation.  Every term is a mean of squares over all entries of its
residual; builders work on numpy arrays and on tape tensors alike and
return the scalar total together with a `LossBreakdown` of plain floats.
"""

import logging

from dataclasses import dataclass
from typing      import Tuple

import numpy as np

from .autodiff               import as_array, square
from .integrators.multistep  import integrate

logger = logging.getLogger(__name__)

IC_WEIGHT_FINETUNE = 1e3


@dataclass
class LossBreakdown:
    L_ic    : float
    L_p     : float
    L_d     : float = 0.0
    L_lambda: Tuple[float, ...] = ()
    epoch   : int   = -1

    @property
    def L_lambda_total(self):
        return float(sum(self.L_lambda))

    @property
    def total(self):
        return self.L_ic + self.L_p + self.L_d + self.L_lambda_total

    def as_row(self):
        return [self.epoch, self.L_ic, self.L_p, self.L_d, self.L_lambda_total, self.total]

    def with_epoch(self, epoch):
        return LossBreakdown(self.L_ic, self.L_p, self.L_d, self.L_lambda, epoch)


LOSS_COLUMNS = ['epoch', 'L_ic', 'L_p', 'L_d', 'L_lambda_total', 'total']


def _scalar(x):
    return float(np.asarray(as_array(x)).reshape(-1)[0])


def mse(pred, target):
    return square(pred - target).mean()


def bound_penalty(lam, lower, upper):
    """
    Per-parameter range penalty  min(0, lam - lower)^2 + max(0, lam - upper)^2.
    `lam` is a 1 x p row; the active side of each clamp is fixed by the
    current value, so the penalty differentiates like the clamp itself.
    """
    values = as_array(lam).reshape(-1)
    below  = (values < lower).astype(np.float64).reshape(1, -1)
    above  = (values > upper).astype(np.float64).reshape(1, -1)
    lower  = np.asarray(lower, dtype = np.float64).reshape(1, -1)
    upper  = np.asarray(upper, dtype = np.float64).reshape(1, -1)
    return square((lam - lower) * below) + square((lam - upper) * above)


# -----------------------------------------------------------------------------
#  Dynamics discovery
# -----------------------------------------------------------------------------
def discovery_loss(model, obs, f_obs, x0, theta = None):
    """
    L_ic + L_p + L_d with the network as the integrator's right-hand side.
    The rollout starts from `x0`.
    """
    net  = model.network(theta)
    traj = integrate(lambda t, x: net(x), x0, model.grid, model.scheme)
    X_nm = traj.states

    L_ic  = mse(X_nm[0:1, :], np.asarray(x0, dtype = np.float64).reshape(1, -1))
    L_p   = mse(net(obs.states), f_obs)
    L_d   = mse(X_nm, obs.states)
    total = L_ic + L_p + L_d

    return total, LossBreakdown(_scalar(L_ic), _scalar(L_p), _scalar(L_d))


# -----------------------------------------------------------------------------
#  Parameter estimation
# -----------------------------------------------------------------------------
def pretrain_loss(model, x_nm, x0, theta = None):
    """ Fit the network of time to a numerical solution: L_ic + L_p. """
    out   = model.network(theta).forward(model.network_input(model.grid.times))
    L_ic  = mse(out[0:1, :], np.asarray(x0, dtype = np.float64).reshape(1, -1))
    L_p   = mse(out, x_nm)
    total = L_ic + L_p

    return total, LossBreakdown(_scalar(L_ic), _scalar(L_p))


def finetune_loss(model, problem, obs, x0, theta_tilde, ic_weight = IC_WEIGHT_FINETUNE, frozen_lam = None):
    """
    Weighted L_ic + physics residual L_p + data misfit L_d + range penalty on
    the parameter estimate.  With `frozen_lam`, `theta_tilde` holds only the
    network parameters and the estimate stays fixed.
    """
    if frozen_lam is None:
        theta, lam = model.split(theta_tilde)
    else:
        theta, lam = theta_tilde, np.asarray(frozen_lam, dtype = np.float64).reshape(1, -1)

    times     = model.grid.times
    out, rate = model.states_and_rates(times, theta)
    f_param   = problem.rhs(times, out, lam)

    L_ic     = mse(out[0:1, :], np.asarray(x0, dtype = np.float64).reshape(1, -1)) * ic_weight
    L_p      = mse(rate, f_param)
    L_d      = mse(out, obs.states)
    penalty  = bound_penalty(lam, model.lower, model.upper)
    total    = L_ic + L_p + L_d + penalty.sum()

    L_lambda = tuple(float(v) for v in as_array(penalty).reshape(-1))
    return total, LossBreakdown(_scalar(L_ic), _scalar(L_p), _scalar(L_d), L_lambda)
