#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging

from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


def compute_mse(predicted, true):
    predicted = np.asarray(predicted, dtype = np.float64).reshape(-1)
    true      = np.asarray(true     , dtype = np.float64).reshape(-1)
    if predicted.size != true.size:
        raise ValueError(f"series lengths differ: {predicted.size} vs {true.size}")
    if true.size == 0:
        raise ValueError("mean squared error of empty series")
    return float(np.mean((true - predicted) ** 2))


def relative_error(estimate, truth):
    if truth == 0:
        raise ValueError("relative error against a zero true value")
    return abs(estimate - truth) / abs(truth)


def per_state_mse(predicted, true, state_names):
    predicted = np.asarray(predicted)
    true      = np.asarray(true)
    return { name : compute_mse(predicted[:, i], true[:, i]) for i, name in enumerate(state_names) }


@dataclass
class ParamEstimate:
    name     : str
    true     : float
    initial  : float
    estimate : float
    rel_error: float

    def as_row(self):
        return [self.name, self.true, self.initial, self.estimate, self.rel_error]


PARAM_COLUMNS = ['name', 'true', 'initial', 'estimate', 'rel_error']


def parameter_table(names, true, initial, estimate):
    return [
        ParamEstimate(str(n), float(t), float(i), float(e), relative_error(float(e), float(t)))
        for n, t, i, e in zip(names, true, initial, estimate)
    ]
