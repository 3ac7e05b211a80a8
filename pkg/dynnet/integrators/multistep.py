#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging

from ..errors      import NonFiniteError, SolverError
from .grid         import Trajectory, as_row
from .newton       import implicit_step_solve
from .runge_kutta  import check_state, rk4_start, rkf45_integrate, weighted_sum

logger = logging.getLogger(__name__)


def lmm_integrate(rhs, x0, grid, scheme):
    """
    Fixed-step linear multistep integration.  The first M-1 states come
    from classical RK4 steps; implicit members solve for each new state with
    Newton, started from the previous state.
    """
    if not scheme.is_lmm:
        raise ValueError(f"lmm_integrate needs a multistep scheme, got {scheme.name}")
    M = scheme.steps
    if grid.num_steps < M:
        raise ValueError(f"{scheme.name} needs at least {M} steps, grid has {grid.num_steps}")

    alpha, beta = scheme.alpha, scheme.beta
    alpha_M     = alpha[M]
    beta_M      = beta[M]
    needs_f     = any(b != 0.0 for b in beta[:M])

    xs = [as_row(x0)]
    fs = []
    try:
        xs = rk4_start(rhs, x0, grid, M - 1)
        if needs_f:
            fs = [ rhs(grid.time(j), xs[j]) for j in range(M) ]

        for n in range(grid.num_steps - M + 1):
            step     = n + M
            t_new    = grid.time(step)
            history  = xs[n:n + M]
            known    = weighted_sum([ -a for a in alpha[:M] ], history)
            if needs_f:
                f_part = weighted_sum(beta[:M], fs[n:n + M], grid.dt)
                if f_part is not None:
                    known = f_part if known is None else known + f_part

            if scheme.is_explicit:
                x_new = known * (1.0 / alpha_M)
            else:
                c = grid.dt * beta_M
                def residual(x, t_new = t_new, c = c, known = known):
                    return x * alpha_M - rhs(t_new, x) * c - known
                x_new = implicit_step_solve(residual, xs[-1], step = step).x

            check_state(x_new, step)
            xs.append(x_new)
            if needs_f:
                fs.append(rhs(t_new, x_new))
    except NonFiniteError as e:
        raise SolverError(f"non-finite state in {scheme.name} ({e})", step = len(xs)) from e

    return Trajectory.from_rows(grid, xs)


def integrate(rhs, x0, grid, scheme):
    """ Dispatch on the scheme kind. """
    if scheme.is_lmm:
        return lmm_integrate(rhs, x0, grid, scheme)
    return rkf45_integrate(rhs, x0, grid)
