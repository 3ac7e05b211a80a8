#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Fully connected tanh networks over a flat parameter vector.

The parameter vector θ is laid out layer by layer as [W1, b1, W2, b2, ...]
with W stored row-major as fan_in x fan_out, so a layer computes h @ W + b.
θ may be a numpy array or a tape tensor; the same code path serves
evaluation and training.
"""

import logging

from dataclasses import dataclass

import numpy as np

from ..autodiff   import is_tensor, tanh
from ..errors     import NonFiniteError, ShapeError
from ..utils.seed import STREAM_INIT, make_rng
from .mlp_config  import MLPConfig

logger = logging.getLogger(__name__)


@dataclass
class NetworkParams:
    spec : MLPConfig
    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype = np.float64).reshape(-1)
        if self.theta.size != self.spec.num_params:
            raise ShapeError(f"network {self.spec} needs {self.spec.num_params} parameters, got {self.theta.size}")
        if not np.all(np.isfinite(self.theta)):
            raise NonFiniteError("network parameters contain non-finite entries")

    @property
    def layout(self):
        return self.spec.layout()

    def copy(self):
        return NetworkParams(self.spec, self.theta.copy())


def init_network(spec, seed):
    """ Glorot-uniform weights, zero biases. """
    rng   = make_rng(seed, STREAM_INIT)
    theta = np.zeros(spec.num_params)
    for layer in spec.layout():
        limit = np.sqrt(6.0 / (layer.fan_in + layer.fan_out))
        theta[layer.weight_slice] = rng.uniform(-limit, limit, size = layer.fan_in * layer.fan_out)

    logger.debug(f"Initialized {spec.layer_dims} network with {spec.num_params} parameters (seed {seed}).")
    return NetworkParams(spec, theta)


class MLP:
    """
    A network bound to one parameter vector.  Weights are unpacked once at
    construction so repeated calls inside an integrator do not re-slice θ.
    """
    def __init__(self, spec, theta):
        if isinstance(theta, NetworkParams):
            theta = theta.theta
        size = theta.size if is_tensor(theta) else np.size(theta)
        if size != spec.num_params:
            raise ShapeError(f"network {spec.layer_dims} needs {spec.num_params} parameters, got {size}")

        self.spec   = spec
        self.layers = []
        for layer in spec.layout():
            if is_tensor(theta):
                W = theta[layer.weight_slice].reshape(layer.fan_in, layer.fan_out)
                b = theta[layer.bias_slice].reshape(1, layer.fan_out)
            else:
                theta = np.asarray(theta, dtype = np.float64)
                W = theta[layer.weight_slice].reshape(layer.fan_in, layer.fan_out)
                b = theta[layer.bias_slice].reshape(1, layer.fan_out)
            self.layers.append((W, b))


    def _check_input(self, x):
        if len(x.shape) != 2 or x.shape[1] != self.spec.input_dim:
            raise ShapeError(f"network expects input of shape (batch, {self.spec.input_dim}), got {tuple(x.shape)}")


    def __call__(self, x):
        return self.forward(x)


    def forward(self, x):
        if not is_tensor(x):
            x = np.asarray(x, dtype = np.float64)
        self._check_input(x)

        h = x
        for W, b in self.layers[:-1]:
            h = tanh(h @ W + b)

        W, b = self.layers[-1]
        out  = h @ W + b

        # Identity, or broadcast of the single input across outputs
        if self.spec.skip_connection:
            out = out + x

        return out


    def forward_with_time_derivative(self, t):
        """
        Output and its derivative with respect to the scalar input, carried
        forward as a tangent alongside the activations.  Both are ordinary
        tape expressions, so losses on the derivative differentiate in θ.
        """
        if self.spec.input_dim != 1:
            raise ShapeError(f"time derivative needs a time-input network (input_dim 1), got input_dim {self.spec.input_dim}")
        if not is_tensor(t):
            t = np.asarray(t, dtype = np.float64)
        self._check_input(t)

        h  = t
        dh = np.ones((t.shape[0], 1))
        for W, b in self.layers[:-1]:
            h  = tanh(h @ W + b)
            dh = (1.0 - h * h) * (dh @ W)

        W, b = self.layers[-1]
        out  = h @ W + b
        dout = dh @ W

        if self.spec.skip_connection:
            out  = out + t
            dout = dout + 1.0

        return out, dout


    def time_derivative(self, t):
        return self.forward_with_time_derivative(t)[1]


def _bind(spec, params):
    return MLP(spec, params)


def forward(spec, params, x):
    return _bind(spec, params).forward(x)


def time_derivative(spec, params, t):
    return _bind(spec, params).time_derivative(t)
