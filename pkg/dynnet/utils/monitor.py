#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging

import numpy as np

logger = logging.getLogger(__name__)


def named_slices(spec, num_extra = 0):
    """ (name, slice) for every weight and bias block of a flat parameter vector. """
    slices = []
    for i, layer in enumerate(spec.layout()):
        slices.append((f"layer{i}.weight", layer.weight_slice))
        slices.append((f"layer{i}.bias"  , layer.bias_slice))
    if num_extra:
        end = spec.num_params
        slices.append(("lambda", slice(end, end + num_extra)))
    return slices


def monitor_param_update_metrics(spec, params, grads, lr, num_extra = 0, weights_only = False):
    """
    Per-block training dynamics of a flat parameter vector:
    - percent_param_update: log10 of std(lr * grad) / std(param).
    - grad_mean_std: mean and standard deviation of the gradient.

    Blocks with constant parameters (zero biases at init) have no percent
    update and are skipped there.
    """
    metrics = {
        'percent_param_update': {},
        'grad_mean_std'       : {},
    }
    params = np.asarray(params)
    grads  = np.asarray(grads)
    for name, sl in named_slices(spec, num_extra):
        if weights_only and name.endswith('.bias'):
            continue

        p, g = params[sl], grads[sl]
        p_std = p.std()
        g_std = (g * lr).std()
        if p_std > 0 and g_std > 0:
            metrics['percent_param_update'][name] = float(np.log10(g_std / p_std))

        metrics['grad_mean_std'][name] = (float(g.mean()), float(g.std()))

    return metrics


def log_param_update_metrics(epoch, metrics):
    for name, value in metrics['percent_param_update'].items():
        g_mean, g_std = metrics['grad_mean_std'][name]
        logger.info(f"epoch {epoch:6d} | {name:16s} | update {value:+.2f} | grad {g_mean:+.3e} +- {g_std:.3e}")
