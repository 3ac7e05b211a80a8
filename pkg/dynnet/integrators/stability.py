#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Absolute stability of linear multistep methods on the test equation
x' = lam x, with z = dt lam.  The characteristic polynomial is
pi(w; z) = rho(w) - z sigma(w), rho and sigma having coefficients alpha and
beta in ascending powers.
"""

import logging

from dataclasses import dataclass, field
from typing      import List

import numpy as np

from ..errors import ConvergenceError

logger = logging.getLogger(__name__)

DK_RADIUS     = 1.2
DK_OFFSET     = 0.4
DK_MAX_SWEEPS = 200


@dataclass
class StabilityRegion:
    scheme: object
    theta : np.ndarray
    z     : np.ndarray
    gaps  : List[float] = field(default_factory = list)

    @property
    def is_closed(self):
        return len(self.z) > 1 and abs(self.z[0] - self.z[-1]) < 1e-9


def _check_lmm(scheme):
    if not scheme.is_lmm:
        raise ValueError(f"stability analysis needs a multistep scheme, got {scheme.name}")


def stability_boundary(scheme, n_points = 401):
    """ Boundary locus z(theta) = rho(e^{i theta}) / sigma(e^{i theta}) on [0, 2 pi]. """
    _check_lmm(scheme)
    if n_points < 2:
        raise ValueError(f"need at least two boundary samples, got {n_points}")

    theta = np.linspace(0.0, 2.0 * np.pi, n_points)
    w     = np.exp(1j * theta)
    rho   = np.polynomial.polynomial.polyval(w, scheme.alpha)
    sigma = np.polynomial.polynomial.polyval(w, scheme.beta)

    ok   = np.abs(sigma) >= 1e-12
    gaps = [ float(t) for t in theta[~ok] ]
    if gaps:
        logger.debug(f"{scheme.name}: sigma vanishes at {len(gaps)} boundary samples, skipped.")

    return StabilityRegion(scheme, theta[ok], rho[ok] / sigma[ok], gaps)


def durand_kerner(coeffs, max_sweeps = DK_MAX_SWEEPS, tol = 1e-14):
    """ All roots of sum_j coeffs[j] w^j (ascending powers, non-zero leading term). """
    coeffs = np.asarray(coeffs, dtype = np.complex128)
    degree = len(coeffs) - 1
    monic  = coeffs / coeffs[-1]
    if degree == 1:
        return np.array([-monic[0]])

    roots = DK_RADIUS * np.exp(1j * (DK_OFFSET + 2.0 * np.pi * np.arange(degree) / degree))
    for sweep in range(max_sweeps):
        max_delta = 0.0
        for k in range(degree):
            others = roots[k] - np.delete(roots, k)
            denom  = np.prod(others)
            if denom == 0:
                denom = 1e-300
            delta     = np.polynomial.polynomial.polyval(roots[k], monic) / denom
            roots[k] -= delta
            max_delta = max(max_delta, abs(delta))
        if max_delta < tol * (1.0 + np.max(np.abs(roots))):
            return roots

    # Multiple roots converge only linearly; accept if the polynomial vanishes.
    residual = float(np.max(np.abs(np.polynomial.polynomial.polyval(roots, monic))))
    if residual < 1e-10:
        return roots
    raise ConvergenceError("Durand-Kerner iteration did not converge", residual_norm = residual, iterations = max_sweeps)


def characteristic_roots(scheme, z):
    _check_lmm(scheme)
    coeffs = np.asarray(scheme.alpha, dtype = np.complex128) - complex(z) * np.asarray(scheme.beta, dtype = np.complex128)
    if abs(coeffs[-1]) < 1e-14:
        return None
    return durand_kerner(coeffs)


def is_absolutely_stable(scheme, z):
    """ Root condition for pi(w; z): all roots in the closed unit disk, those on the circle simple. """
    roots = characteristic_roots(scheme, z)
    if roots is None:
        # Degree drops, a root escapes to infinity
        return False

    moduli = np.abs(roots)
    if np.any(moduli > 1.0 + 1e-9):
        return False

    near_unit = roots[moduli >= 1.0 - 1e-9]
    for i in range(len(near_unit)):
        for j in range(i + 1, len(near_unit)):
            if abs(near_unit[i] - near_unit[j]) <= 1e-6:
                return False
    return True
