#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Adam and L-BFGS over flat float64 parameter vectors.

Both work on a `loss_fn(x) -> (loss, grad)` closure, the gradient coming
from a fresh tape per call.  Training runs Adam first and hands the result
to L-BFGS (`minimize_schedule`).
"""

import logging

from dataclasses import dataclass, field
from typing      import Callable, List, Optional

import numpy as np

from .errors     import DynnetError, NonFiniteError, ShapeError

logger = logging.getLogger(__name__)


def is_logging_due(epoch, every = None):
    """ True on every `every`-th epoch, counting epochs from zero; never when `every` is unset. """
    return bool(every) and every > 0 and (epoch + 1) % every == 0


# -----------------------------------------------------------------------------
#  Adam
# -----------------------------------------------------------------------------
@dataclass
class AdamState:
    lr   : float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps  : float = 1e-8
    step : int   = 0
    m    : Optional[np.ndarray] = None
    v    : Optional[np.ndarray] = None


def adam_step(state, params, grads):
    params = np.asarray(params, dtype = np.float64)
    grads  = np.asarray(grads , dtype = np.float64)
    if params.shape != grads.shape:
        raise ShapeError(f"adam: parameter shape {params.shape} != gradient shape {grads.shape}")
    if not np.all(np.isfinite(grads)):
        raise NonFiniteError(f"adam: non-finite gradient at step {state.step + 1}", op = 'adam_step')

    if state.m is None:
        state.m = np.zeros_like(params)
        state.v = np.zeros_like(params)

    state.step += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads * grads

    m_hat = state.m / (1.0 - state.beta1 ** state.step)
    v_hat = state.v / (1.0 - state.beta2 ** state.step)

    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


# -----------------------------------------------------------------------------
#  L-BFGS
# -----------------------------------------------------------------------------
@dataclass
class WolfeCheck:
    alpha    : float
    armijo   : bool
    curvature: bool


@dataclass
class LbfgsState:
    lr              : float = 1.0
    max_iter        : int   = 50000
    history_size    : int   = 10
    c1              : float = 1e-4
    c2              : float = 0.9
    max_ls          : int   = 25
    grad_tol        : float = 1e-9
    rel_loss_tol    : float = 1e-12
    param_tol       : float = 1e-16
    fallback_scale  : float = 1e-3

    s_hist          : List[np.ndarray] = field(default_factory = list)
    y_hist          : List[np.ndarray] = field(default_factory = list)
    rho             : List[float]      = field(default_factory = list)
    iterations      : int              = 0
    func_evals      : int              = 0
    fallbacks       : int              = 0
    wolfe_log       : List[WolfeCheck] = field(default_factory = list)
    loss_history    : List[float]      = field(default_factory = list)
    stop_reason     : str              = ''

    def reset_memory(self):
        self.s_hist.clear()
        self.y_hist.clear()
        self.rho.clear()

    def push_pair(self, s, y):
        """ Keep the pair only when the curvature condition holds. """
        ys = float(y @ s)
        if ys <= 1e-10:
            return False
        if len(self.s_hist) == self.history_size:
            self.s_hist.pop(0)
            self.y_hist.pop(0)
            self.rho.pop(0)
        self.s_hist.append(s)
        self.y_hist.append(y)
        self.rho.append(1.0 / ys)
        return True


def _two_loop_direction(state, grad):
    q     = -grad.copy()
    alpha = [0.0] * len(state.s_hist)
    for i in range(len(state.s_hist) - 1, -1, -1):
        alpha[i] = state.rho[i] * float(state.s_hist[i] @ q)
        q       -= alpha[i] * state.y_hist[i]

    if state.s_hist:
        s, y = state.s_hist[-1], state.y_hist[-1]
        q   *= float(s @ y) / float(y @ y)

    for i in range(len(state.s_hist)):
        beta = state.rho[i] * float(state.y_hist[i] @ q)
        q   += (alpha[i] - beta) * state.s_hist[i]

    return q


def _cubic_interpolate(x1, f1, g1, x2, f2, g2, bounds = None):
    """ Minimizer of the cubic through two points with slopes, clipped to bounds. """
    if bounds is not None:
        xmin_bound, xmax_bound = bounds
    else:
        xmin_bound, xmax_bound = (x1, x2) if x1 <= x2 else (x2, x1)

    with np.errstate(all = 'ignore'):
        d1        = g1 + g2 - 3 * (f1 - f2) / (x1 - x2)
        d2_square = d1 ** 2 - g1 * g2
    if np.isfinite(d2_square) and d2_square >= 0:
        d2 = np.sqrt(d2_square)
        if x1 <= x2:
            min_pos = x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2 * d2))
        else:
            min_pos = x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2 * d2))
        if np.isfinite(min_pos):
            return min(max(min_pos, xmin_bound), xmax_bound)

    return (xmin_bound + xmax_bound) / 2.0


def _strong_wolfe(phi, alpha, loss, gtd, c1, c2, max_ls, d_norm, tolerance_change = 1e-9):
    """
    Bracketing then zoom.  `phi(alpha)` returns (loss, grad, gtd) at x + alpha d.
    Returns (alpha, loss, grad, found, evals).
    """
    loss_new, grad_new, gtd_new = phi(alpha)
    evals = 1

    t_prev, f_prev, g_prev, gtd_prev = 0.0, loss, None, gtd
    done    = False
    ls_iter = 0
    bracket = bracket_f = bracket_g = bracket_gtd = None
    while ls_iter < max_ls:
        if loss_new > loss + c1 * alpha * gtd or (ls_iter > 1 and loss_new >= f_prev):
            bracket, bracket_f   = [t_prev, alpha], [f_prev, loss_new]
            bracket_g            = [g_prev, grad_new]
            bracket_gtd          = [gtd_prev, gtd_new]
            break

        if abs(gtd_new) <= -c2 * gtd:
            bracket, bracket_f, bracket_g = [alpha], [loss_new], [grad_new]
            done = True
            break

        if gtd_new >= 0:
            bracket, bracket_f   = [t_prev, alpha], [f_prev, loss_new]
            bracket_g            = [g_prev, grad_new]
            bracket_gtd          = [gtd_prev, gtd_new]
            break

        # Extrapolate
        min_step = alpha + 0.01 * (alpha - t_prev)
        max_step = alpha * 10
        tmp      = alpha
        alpha    = _cubic_interpolate(t_prev, f_prev, gtd_prev, alpha, loss_new, gtd_new, bounds = (min_step, max_step))

        t_prev, f_prev, g_prev, gtd_prev = tmp, loss_new, grad_new, gtd_new
        loss_new, grad_new, gtd_new = phi(alpha)
        evals   += 1
        ls_iter += 1

    if ls_iter == max_ls:
        return alpha, loss_new, grad_new, False, evals

    # Zoom into the bracket
    insuf_progress = False
    low_pos, high_pos = (0, 1) if bracket_f[0] <= bracket_f[-1] else (1, 0)
    while not done and ls_iter < max_ls:
        if abs(bracket[1] - bracket[0]) * d_norm < tolerance_change:
            break

        alpha = _cubic_interpolate(bracket[0], bracket_f[0], bracket_gtd[0],
                                   bracket[1], bracket_f[1], bracket_gtd[1])

        # Keep trial points away from the bracket ends
        eps = 0.1 * (max(bracket) - min(bracket))
        if min(max(bracket) - alpha, alpha - min(bracket)) < eps:
            if insuf_progress or alpha >= max(bracket) or alpha <= min(bracket):
                alpha = max(bracket) - eps if abs(alpha - max(bracket)) < abs(alpha - min(bracket)) else min(bracket) + eps
                insuf_progress = False
            else:
                insuf_progress = True
        else:
            insuf_progress = False

        loss_new, grad_new, gtd_new = phi(alpha)
        evals   += 1
        ls_iter += 1

        if loss_new > loss + c1 * alpha * gtd or loss_new >= bracket_f[low_pos]:
            bracket[high_pos], bracket_f[high_pos] = alpha, loss_new
            bracket_g[high_pos], bracket_gtd[high_pos] = grad_new, gtd_new
            low_pos, high_pos = (0, 1) if bracket_f[0] <= bracket_f[1] else (1, 0)
        else:
            if abs(gtd_new) <= -c2 * gtd:
                done = True
            elif gtd_new * (bracket[high_pos] - bracket[low_pos]) >= 0:
                bracket[high_pos], bracket_f[high_pos] = bracket[low_pos], bracket_f[low_pos]
                bracket_g[high_pos], bracket_gtd[high_pos] = bracket_g[low_pos], bracket_gtd[low_pos]

            bracket[low_pos], bracket_f[low_pos] = alpha, loss_new
            bracket_g[low_pos], bracket_gtd[low_pos] = grad_new, gtd_new

    return bracket[low_pos], bracket_f[low_pos], bracket_g[low_pos], done, evals


def _evaluate(loss_fn, x):
    loss, grad = loss_fn(x)
    return float(loss), np.asarray(grad, dtype = np.float64)


def lbfgs_minimize(loss_fn, params, state, callback = None):
    """
    Minimize `loss_fn` from `params`.  Returns (params, final loss,
    iterations used).  Trial points whose evaluation fails inside the line
    search count as infinite loss so the search backs off.
    """
    x = np.array(params, dtype = np.float64)

    loss, grad = _evaluate(loss_fn, x)
    state.func_evals += 1
    if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
        raise NonFiniteError("lbfgs: non-finite loss or gradient at the initial point", op = 'lbfgs_minimize')

    if np.linalg.norm(grad) < state.grad_tol:
        state.stop_reason = 'grad_tol'
        return x, loss, 0

    def phi_factory(x0, d):
        def phi(alpha):
            try:
                loss_t, grad_t = _evaluate(loss_fn, x0 + alpha * d)
            except DynnetError as e:
                logger.debug(f"lbfgs: trial step {alpha:.3e} failed ({e}); treating as infinite loss.")
                return np.inf, np.full_like(d, np.nan), np.nan
            if not np.isfinite(loss_t):
                return np.inf, np.full_like(d, np.nan), np.nan
            return loss_t, grad_t, float(grad_t @ d)
        return phi

    n_iter = 0
    state.stop_reason = 'max_iter'
    while n_iter < state.max_iter:
        n_iter += 1
        state.iterations += 1

        d   = _two_loop_direction(state, grad)
        gtd = float(grad @ d)
        if not gtd < 0:
            # Not a descent direction, restart from steepest descent
            state.reset_memory()
            d   = -grad
            gtd = float(grad @ d)

        alpha0 = state.lr
        phi    = phi_factory(x, d)
        alpha, loss_new, grad_new, found, evals = _strong_wolfe(
            phi, alpha0, loss, gtd, state.c1, state.c2, state.max_ls, float(np.abs(d).max()),
        )
        state.func_evals += evals

        if found:
            gtd_new = float(grad_new @ d)
            state.wolfe_log.append(WolfeCheck(
                alpha     = alpha,
                armijo    = loss_new <= loss + state.c1 * alpha * gtd,
                curvature = abs(gtd_new) <= -state.c2 * gtd,
            ))
            x_new = x + alpha * d
        else:
            state.fallbacks += 1
            logger.debug(f"lbfgs: line search failed at iteration {n_iter}, taking a scaled gradient step.")
            x_new = x - state.fallback_scale * grad
            loss_new, grad_new = _evaluate(loss_fn, x_new)
            state.func_evals += 1
            state.reset_memory()

        if not np.isfinite(loss_new) or not np.all(np.isfinite(grad_new)):
            raise NonFiniteError(f"lbfgs: non-finite loss at iteration {n_iter}", op = 'lbfgs_minimize')

        if found:
            state.push_pair(x_new - x, grad_new - grad)

        step_size = float(np.abs(x_new - x).max())
        prev_loss = loss
        x, loss, grad = x_new, loss_new, grad_new
        state.loss_history.append(loss)

        if callback is not None:
            callback(n_iter, x, loss)

        if np.linalg.norm(grad) < state.grad_tol:
            state.stop_reason = 'grad_tol'
            break
        if abs(loss - prev_loss) <= state.rel_loss_tol * max(abs(prev_loss), np.finfo(np.float64).tiny):
            state.stop_reason = 'rel_loss_tol'
            break
        if step_size <= state.param_tol:
            state.stop_reason = 'param_tol'
            break

    logger.debug(f"lbfgs: stopped after {n_iter} iterations ({state.stop_reason}), loss {loss:.6e}, {state.fallbacks} fallbacks.")
    return x, loss, n_iter


# -----------------------------------------------------------------------------
#  Two-phase schedule
# -----------------------------------------------------------------------------
@dataclass
class Schedule:
    adam_lr        : float = 1e-3
    adam_epochs    : int   = 2000
    lbfgs_lr       : float = 1.0
    lbfgs_max_iter : int   = 50000

    def __post_init__(self):
        if not (self.adam_lr > 0 and self.lbfgs_lr > 0):
            raise ValueError(f"learning rates must be positive, got {self.adam_lr}, {self.lbfgs_lr}")
        if self.adam_epochs < 0 or self.lbfgs_max_iter < 0:
            raise ValueError(f"epoch counts must be non-negative, got {self.adam_epochs}, {self.lbfgs_max_iter}")


@dataclass
class ScheduleResult:
    params       : np.ndarray
    loss         : float
    adam_epochs  : int
    lbfgs_iters  : int
    lbfgs_state  : Optional[LbfgsState] = None


def minimize_schedule(loss_fn, params, schedule, on_epoch = None, log_every = None, progress = None):
    """
    Adam for `adam_epochs` then L-BFGS for at most `lbfgs_max_iter`
    iterations.  `on_epoch(epoch, phase, params, loss)` sees every Adam epoch
    and every accepted L-BFGS step, epochs numbered across both phases.
    """
    x     = np.array(params, dtype = np.float64)
    adam  = AdamState(lr = schedule.adam_lr)
    loss  = None
    epoch = 0

    for _ in range(schedule.adam_epochs):
        loss, grad = _evaluate(loss_fn, x)
        if not np.isfinite(loss):
            raise NonFiniteError(f"adam: non-finite loss at epoch {epoch}", op = 'adam_step')
        if on_epoch is not None:
            on_epoch(epoch, 'adam', x, loss)
        if is_logging_due(epoch, log_every):
            logger.info(f"adam epoch {epoch:6d} | loss {loss:.6e}")
        x = adam_step(adam, x, grad)
        epoch += 1
        if progress is not None: progress.update(1)

    lbfgs_iters = 0
    lbfgs_state = None
    if schedule.lbfgs_max_iter > 0:
        lbfgs_state = LbfgsState(lr = schedule.lbfgs_lr, max_iter = schedule.lbfgs_max_iter)

        def callback(n_iter, x_k, loss_k):
            nonlocal epoch
            if on_epoch is not None:
                on_epoch(epoch, 'lbfgs', x_k, loss_k)
            if is_logging_due(n_iter - 1, log_every):
                logger.info(f"lbfgs iter {n_iter:6d} | loss {loss_k:.6e}")
            epoch += 1
            if progress is not None: progress.update(1)

        x, loss, lbfgs_iters = lbfgs_minimize(loss_fn, x, lbfgs_state, callback = callback)
        if lbfgs_state.fallbacks:
            logger.info(f"lbfgs: {lbfgs_state.fallbacks} line-search fallbacks.")
    else:
        loss, _ = _evaluate(loss_fn, x)

    return ScheduleResult(x, loss, schedule.adam_epochs, lbfgs_iters, lbfgs_state)
