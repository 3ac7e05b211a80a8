#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Solver schemes and linear multistep coefficients.

An M-step method is written  sum_j alpha_j x_{n+j} = dt sum_j beta_j f_{n+j}
for j = 0..M.  Coefficients come from the order conditions

    sum_j alpha_j = 0,    sum_j j^p alpha_j = p sum_j j^(p-1) beta_j,

solved exactly over rationals.
"""

import logging
import re

from dataclasses import dataclass
from fractions   import Fraction
from typing      import Optional, Tuple

logger = logging.getLogger(__name__)

FAMILIES  = ('AB', 'AM', 'BDF')
MAX_STEPS = 5


def _solve_exact(A, b):
    """ Gauss-Jordan elimination over Fractions. """
    n = len(A)
    M = [ list(row) + [rhs] for row, rhs in zip(A, b) ]
    for col in range(n):
        pivot = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[pivot] = M[pivot], M[col]
        piv = M[col][col]
        M[col] = [ v / piv for v in M[col] ]
        for r in range(n):
            if r != col and M[r][col] != 0:
                factor = M[r][col]
                M[r]   = [ v - factor * w for v, w in zip(M[r], M[col]) ]
    return [ M[r][n] for r in range(n) ]


def method_order(family, steps):
    return steps + 1 if family == 'AM' else steps


def lmm_coefficients(family, steps, exact = False):
    """
    (alpha, beta) for the `steps`-step member of `family`.  AB and AM are
    normalized to alpha_M = 1; BDF to beta_M = 1.
    """
    family = family.upper()
    if family not in FAMILIES:
        raise ValueError(f"unknown multistep family '{family}', expected one of {FAMILIES}")
    if not 1 <= int(steps) <= MAX_STEPS:
        raise ValueError(f"multistep methods support 1 to {MAX_STEPS} steps, got {steps}")

    M     = int(steps)
    order = method_order(family, M)
    p_j   = lambda j, p: Fraction(j) ** p

    if family in ('AB', 'AM'):
        alpha = [Fraction(0)] * (M + 1)
        alpha[M], alpha[M - 1] = Fraction(1), Fraction(-1)

        # Unknown betas: j = 0..M-1 (AB) or 0..M (AM)
        unknown = range(M) if family == 'AB' else range(M + 1)
        A = [ [ p * p_j(j, p - 1) for j in unknown ] for p in range(1, order + 1) ]
        b = [ sum(p_j(j, p) * alpha[j] for j in range(M + 1)) for p in range(1, order + 1) ]
        solution = _solve_exact(A, b)

        beta = [Fraction(0)] * (M + 1)
        for j, value in zip(unknown, solution):
            beta[j] = value
    else:
        beta = [Fraction(0)] * (M + 1)
        beta[M] = Fraction(1)

        A = [ [ p_j(j, p) for j in range(M + 1) ] for p in range(order + 1) ]
        b = [ Fraction(0) ] + [ p * p_j(M, p - 1) for p in range(1, order + 1) ]
        alpha = _solve_exact(A, b)

    if exact:
        return tuple(alpha), tuple(beta)
    return tuple(float(a) for a in alpha), tuple(float(b) for b in beta)


def order_condition_residuals(alpha, beta, order):
    """ Residual of each order condition p = 0..order. """
    residuals = [ abs(sum(alpha)) ]
    for p in range(1, order + 1):
        lhs = sum(j ** p * a for j, a in enumerate(alpha))
        rhs = p * sum(j ** (p - 1) * b for j, b in enumerate(beta))
        residuals.append(abs(lhs - rhs))
    return residuals


@dataclass(frozen = True)
class SolverScheme:
    kind  : str                            # 'RKF45' or 'LMM'
    family: Optional[str]            = None
    steps : int                      = 0
    alpha : Tuple[float, ...]        = ()
    beta  : Tuple[float, ...]        = ()

    @classmethod
    def rkf45(cls):
        return cls('RKF45')

    @classmethod
    def lmm(cls, family, steps):
        alpha, beta = lmm_coefficients(family, steps)
        return cls('LMM', family.upper(), int(steps), alpha, beta)

    @property
    def name(self):
        return self.kind if self.kind == 'RKF45' else f"{self.family}{self.steps}"

    @property
    def is_lmm(self):
        return self.kind == 'LMM'

    @property
    def is_explicit(self):
        return self.kind == 'RKF45' or self.beta[-1] == 0.0

    @property
    def order(self):
        return 5 if self.kind == 'RKF45' else method_order(self.family, self.steps)

    def __str__(self):
        return self.name


_SCHEME_PATTERN = re.compile(r"^(AB|AM|BDF)([1-9])$")


def parse_scheme(name):
    """ 'RKF45' (or 'RK45'), 'AB2', 'AM3', 'BDF2', ... """
    if isinstance(name, SolverScheme):
        return name
    key = str(name).strip().upper()
    if key in ('RKF45', 'RK45'):
        return SolverScheme.rkf45()
    match = _SCHEME_PATTERN.match(key)
    if match is None:
        raise ValueError(f"unknown solver scheme '{name}'")
    return SolverScheme.lmm(match.group(1), int(match.group(2)))
