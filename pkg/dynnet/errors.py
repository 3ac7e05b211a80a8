#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Exceptions raised across dynnet.  Everything derives from `DynnetError` so
trainers and the CLI can catch a single base class and turn it into a failed
report.
"""


class DynnetError(Exception):
    pass


class ShapeError(DynnetError, ValueError):
    pass


class NonFiniteError(DynnetError, ArithmeticError):
    def __init__(self, message, op = None):
        super().__init__(message)
        self.op = op


class TapeError(DynnetError, RuntimeError):
    pass


class SolverError(DynnetError, RuntimeError):
    def __init__(self, message, step = None):
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)
        self.step = step


class ConvergenceError(SolverError):
    def __init__(self, message, step = None, residual_norm = None, iterations = None):
        if residual_norm is not None:
            message = f"{message}; final residual norm {residual_norm:.3e}"
        super().__init__(message, step = step)
        self.residual_norm = residual_norm
        self.iterations    = iterations


class ConfigError(DynnetError, ValueError):
    pass
