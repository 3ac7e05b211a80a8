#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging

from dataclasses import dataclass
from typing      import Any

import numpy as np

from ..autodiff import active_tape, as_array, no_record
from ..errors   import ConvergenceError

logger = logging.getLogger(__name__)

NEWTON_TOL      = 1e-10
NEWTON_MAX_ITER = 25
NEWTON_UNROLL   = 3


@dataclass
class NewtonResult:
    x            : Any
    iterations   : int
    residual_norm: float


def fd_jacobian(residual, x, r0 = None):
    """ Forward-difference Jacobian of a row-vector residual. """
    x  = np.asarray(x, dtype = np.float64)
    r0 = as_array(residual(x)).reshape(-1) if r0 is None else np.asarray(r0).reshape(-1)
    n  = x.size
    J  = np.empty((r0.size, n))
    for i in range(n):
        h  = 1e-7 * (1.0 + abs(x.flat[i]))
        xp = x.copy()
        xp.flat[i] += h
        J[:, i] = (as_array(residual(xp)).reshape(-1) - r0) / h
    return J


def implicit_step_solve(residual, guess, tol = NEWTON_TOL, max_iter = NEWTON_MAX_ITER, unroll = NEWTON_UNROLL, step = None):
    """
    Newton on residual(x) = 0 with a finite-difference Jacobian.

    The solve itself is never recorded.  When a tape is active, `unroll`
    Newton updates are recorded from the converged point with the final
    inverse Jacobian held constant, so the returned tensor carries the
    sensitivity of the root to everything the residual reads.
    """
    x = np.array(as_array(guess), dtype = np.float64)
    with no_record():
        r = as_array(residual(x))
        iterations = 0
        while np.max(np.abs(r)) >= tol:
            if iterations == max_iter:
                residual_norm = float(np.max(np.abs(r)))
                logger.error(f"Newton did not converge in {max_iter} iterations at step {step}, residual {residual_norm:.3e}")
                raise ConvergenceError("implicit step did not converge", step = step,
                                       residual_norm = residual_norm, iterations = iterations)
            J = fd_jacobian(residual, x, r)
            try:
                dx = np.linalg.solve(J, r.reshape(-1))
            except np.linalg.LinAlgError:
                raise ConvergenceError("singular Newton Jacobian", step = step,
                                       residual_norm = float(np.max(np.abs(r))), iterations = iterations) from None
            x = x - dx.reshape(x.shape)
            r = as_array(residual(x))
            iterations += 1
            if not np.all(np.isfinite(r)):
                raise ConvergenceError("non-finite residual in Newton iteration", step = step, iterations = iterations)

    residual_norm = float(np.max(np.abs(r)))
    tape = active_tape()
    if tape is None or unroll <= 0:
        return NewtonResult(x, iterations, residual_norm)

    with no_record():
        J_inv_T = np.linalg.inv(fd_jacobian(residual, x)).T
    x_t = tape.constant(x)
    for _ in range(unroll):
        x_t = x_t - residual(x_t) @ J_inv_T
    return NewtonResult(x_t, iterations, residual_norm)
