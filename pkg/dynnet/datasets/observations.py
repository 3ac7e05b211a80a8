#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging

from dataclasses import dataclass
from typing      import Optional

import numpy as np

from ..utils.seed import STREAM_NOISE, STREAM_TEST_POINTS, make_rng
from .csv_io      import read_series, write_series

logger = logging.getLogger(__name__)


@dataclass
class ObservationSet:
    times    : np.ndarray
    states   : np.ndarray            # ...T x n
    noise    : float
    seed     : int
    variances: np.ndarray            # ...diagonal of the noise covariance before scaling
    exact    : Optional[np.ndarray] = None

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    @property
    def num_times(self):
        return self.states.shape[0]

    @property
    def state_dim(self):
        return self.states.shape[1]


def standard_normal(rng, shape):
    """ Box-Muller pairs from uniform draws. """
    size  = int(np.prod(shape))
    pairs = (size + 1) // 2
    u1    = 1.0 - rng.random(pairs)    # ...(0, 1], keeps the log finite
    u2    = rng.random(pairs)
    r     = np.sqrt(-2.0 * np.log(u1))
    z     = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
    return z[:size].reshape(shape)


def synthesize_observations(reference, noise, seed):
    """ X_obs = X_exact + noise * eta, eta ~ N(0, diag(Var(X_exact))). """
    if noise < 0:
        raise ValueError(f"noise level must be non-negative, got {noise}")

    exact     = np.array(reference.numpy(), dtype = np.float64)
    times     = np.asarray(reference.times, dtype = np.float64)
    variances = exact.var(axis = 0)

    if noise == 0:
        states = exact.copy()
    else:
        eta    = standard_normal(make_rng(seed, STREAM_NOISE), exact.shape) * np.sqrt(variances)[None, :]
        states = exact + noise * eta

    logger.debug(f"Synthesized {exact.shape[0]} observations, noise {noise}, seed {seed}")
    return ObservationSet(times, states, float(noise), int(seed), variances, exact)


def finite_diff_rhs(obs):
    """ Second-order differences: central inside, three-point one-sided at both ends. """
    states = np.asarray(obs.states, dtype = np.float64)
    times  = np.asarray(obs.times, dtype = np.float64)
    if states.shape[0] < 3:
        raise ValueError(f"finite differences need at least 3 time points, got {states.shape[0]}")
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol = 1e-9, atol = 0.0):
        raise ValueError("finite differences need a uniform time grid")
    return np.gradient(states, steps[0], axis = 0, edge_order = 2)


def test_points(t0, t1, count, seed):
    """ Sorted uniform times in the open interval (t0, t1). """
    if int(count) < 1:
        raise ValueError(f"need at least one test point, got {count}")
    if not t1 > t0:
        raise ValueError(f"empty interval [{t0}, {t1}]")

    rng = make_rng(seed, STREAM_TEST_POINTS)
    u   = rng.random(int(count))
    while np.any(u == 0.0):
        u[u == 0.0] = rng.random(int(np.sum(u == 0.0)))
    times = t0 + (t1 - t0) * u
    times = np.minimum(times, np.nextafter(t1, t0))
    return np.sort(times)


# Keep pytest from collecting the function above as a test.
test_points.__test__ = False


def write_observations(path, obs, state_names = None):
    columns = [ f"obs_{i}" for i in range(obs.state_dim) ] if state_names is None else [ f"obs_{n}" for n in state_names ]
    return write_series(path, obs.times, obs.states, columns, meta = {'noise': obs.noise, 'seed': obs.seed})


def read_observations(path):
    meta, _, times, states = read_series(path)
    return ObservationSet(times, states, float(meta.get('noise', 'nan')), int(meta.get('seed', -1)),
                          states.var(axis = 0))
