#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Reverse-mode automatic differentiation over a recorded tape.

A `Tensor` wraps a float64 numpy array.  While a `Tape` is active

    with Tape() as tape:
        x    = tape.leaf(x0, trainable = True)
        loss = (x * x).sum()
    grads = tape.backward(loss)

every operation on tensors is appended to the tape, its value computed
eagerly.  Without an active tape the same operators evaluate eagerly and
nothing is recorded, so the numerics downstream (networks, integrators,
problems) run unchanged on plain arrays, eager tensors and recorded tensors.
"""

import contextvars
import logging

from contextlib  import contextmanager
from dataclasses import dataclass, field
from numbers     import Number
from typing      import Callable, Dict, Tuple

import numpy as np

from .errors import NonFiniteError, ShapeError, TapeError

logger = logging.getLogger(__name__)

_ACTIVE_TAPE = contextvars.ContextVar("dynnet_active_tape", default = None)


def _as_float_array(value):
    return np.array(value, dtype = np.float64)


def _check_finite(value, op):
    if not np.all(np.isfinite(value)):
        raise NonFiniteError(f"non-finite value produced by '{op}'", op = op)


def _unbroadcast(grad, shape):
    """ Sum `grad` down to `shape`, undoing numpy broadcasting.
    """
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis = 0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis = axis, keepdims = True)
    return grad


def _broadcast_shape(op, a, b):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"'{op}' cannot combine shapes {a.shape} and {b.shape}") from None


# -----------------------------------------------------------------------------
#  Op registry.  forward(arrays, attrs) -> (value, saved); backward(grad, saved, attrs)
#  returns one gradient per input.
# -----------------------------------------------------------------------------
@dataclass(frozen = True)
class OpDef:
    forward  : Callable
    backward : Callable
    arity    : int


def _add_fwd(arrays, attrs):
    a, b = arrays
    _broadcast_shape('add', a, b)
    return a + b, (a.shape, b.shape)

def _add_bwd(grad, saved, attrs):
    shape_a, shape_b = saved
    return _unbroadcast(grad, shape_a), _unbroadcast(grad, shape_b)


def _sub_fwd(arrays, attrs):
    a, b = arrays
    _broadcast_shape('sub', a, b)
    return a - b, (a.shape, b.shape)

def _sub_bwd(grad, saved, attrs):
    shape_a, shape_b = saved
    return _unbroadcast(grad, shape_a), _unbroadcast(-grad, shape_b)


def _mul_fwd(arrays, attrs):
    a, b = arrays
    _broadcast_shape('mul', a, b)
    return a * b, (a, b)

def _mul_bwd(grad, saved, attrs):
    a, b = saved
    return _unbroadcast(grad * b, a.shape), _unbroadcast(grad * a, b.shape)


def _scalar_mul_fwd(arrays, attrs):
    a, = arrays
    return a * attrs['scalar'], ()

def _scalar_mul_bwd(grad, saved, attrs):
    return (grad * attrs['scalar'],)


def _matmul_fwd(arrays, attrs):
    a, b = arrays
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"'matmul' cannot multiply shapes {a.shape} and {b.shape}")
    return a @ b, (a, b)

def _matmul_bwd(grad, saved, attrs):
    a, b = saved
    return grad @ b.T, a.T @ grad


def _tanh_fwd(arrays, attrs):
    out = np.tanh(arrays[0])
    return out, (out,)

def _tanh_bwd(grad, saved, attrs):
    out, = saved
    return (grad * (1.0 - out * out),)


def _square_fwd(arrays, attrs):
    a, = arrays
    return a * a, (a,)

def _square_bwd(grad, saved, attrs):
    a, = saved
    return (2.0 * a * grad,)


def _power_fwd(arrays, attrs):
    a, = arrays
    return a ** attrs['exponent'], (a,)

def _power_bwd(grad, saved, attrs):
    a, = saved
    p = attrs['exponent']
    return (grad * p * a ** (p - 1),)


def _reciprocal_fwd(arrays, attrs):
    a = arrays[0]
    if np.any(a == 0.0):
        raise NonFiniteError("'reciprocal' of zero", op = 'reciprocal')
    out = 1.0 / a
    return out, (out,)

def _reciprocal_bwd(grad, saved, attrs):
    out, = saved
    return (-grad * out * out,)


def _sum_fwd(arrays, attrs):
    a, = arrays
    return np.asarray(a.sum()), (a.shape,)

def _sum_bwd(grad, saved, attrs):
    shape, = saved
    return (np.full(shape, float(grad)),)


def _mean_fwd(arrays, attrs):
    a, = arrays
    if a.size == 0:
        raise ShapeError("'mean' of an empty tensor")
    return np.asarray(a.mean()), (a.shape, a.size)

def _mean_bwd(grad, saved, attrs):
    shape, size = saved
    return (np.full(shape, float(grad) / size),)


def _concat_fwd(arrays, attrs):
    axis = attrs['axis']
    try:
        out = np.concatenate(arrays, axis = axis)
    except ValueError:
        shapes = [a.shape for a in arrays]
        raise ShapeError(f"'concat' along axis {axis} cannot join shapes {shapes}") from None
    return out, tuple(a.shape[axis] for a in arrays)

def _concat_bwd(grad, saved, attrs):
    offsets = np.cumsum(saved)[:-1]
    return tuple(np.split(grad, offsets, axis = attrs['axis']))


def _slice_fwd(arrays, attrs):
    a, = arrays
    try:
        out = a[attrs['key']]
    except IndexError as e:
        raise ShapeError(f"'slice' {attrs['key']!r} invalid for shape {a.shape}: {e}") from None
    return np.array(out, dtype = np.float64), (a.shape,)

def _slice_bwd(grad, saved, attrs):
    shape, = saved
    out = np.zeros(shape)
    np.add.at(out, attrs['key'], grad)
    return (out,)


def _reshape_fwd(arrays, attrs):
    a, = arrays
    try:
        return a.reshape(attrs['shape']), (a.shape,)
    except ValueError:
        raise ShapeError(f"'reshape' cannot turn shape {a.shape} into {attrs['shape']}") from None

def _reshape_bwd(grad, saved, attrs):
    shape, = saved
    return (grad.reshape(shape),)


OPS = {
    'add'        : OpDef(_add_fwd,        _add_bwd,        2),
    'sub'        : OpDef(_sub_fwd,        _sub_bwd,        2),
    'mul'        : OpDef(_mul_fwd,        _mul_bwd,        2),
    'scalar_mul' : OpDef(_scalar_mul_fwd, _scalar_mul_bwd, 1),
    'matmul'     : OpDef(_matmul_fwd,     _matmul_bwd,     2),
    'tanh'       : OpDef(_tanh_fwd,       _tanh_bwd,       1),
    'square'     : OpDef(_square_fwd,     _square_bwd,     1),
    'power'      : OpDef(_power_fwd,      _power_bwd,      1),
    'reciprocal' : OpDef(_reciprocal_fwd, _reciprocal_bwd, 1),
    'sum'        : OpDef(_sum_fwd,        _sum_bwd,        1),
    'mean'       : OpDef(_mean_fwd,       _mean_bwd,       1),
    'concat'     : OpDef(_concat_fwd,     _concat_bwd,     None),
    'slice'      : OpDef(_slice_fwd,      _slice_bwd,      1),
    'reshape'    : OpDef(_reshape_fwd,    _reshape_bwd,    1),
}


# -----------------------------------------------------------------------------
#  Tensor
# -----------------------------------------------------------------------------
class Tensor:
    # Let numpy arrays on the left hand side defer to our reflected operators.
    __array_ufunc__ = None

    def __init__(self, data, node_id = None, tape = None):
        self.data    = data if isinstance(data, np.ndarray) and data.dtype == np.float64 else _as_float_array(data)
        self.node_id = node_id
        self.tape    = tape

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def numpy(self):
        return self.data.copy()

    def item(self):
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else self.data.item()

    def __repr__(self):
        return f"Tensor(shape={self.shape}, node_id={self.node_id})"

    def __len__(self):
        return self.data.shape[0]

    # ___/ Operators \___
    def __add__(self, other):      return record('add', self, other)
    def __radd__(self, other):     return record('add', other, self)
    def __sub__(self, other):      return record('sub', self, other)
    def __rsub__(self, other):     return record('sub', other, self)
    def __matmul__(self, other):   return record('matmul', self, other)
    def __rmatmul__(self, other):  return record('matmul', other, self)
    def __neg__(self):             return record('scalar_mul', self, scalar = -1.0)

    def __mul__(self, other):
        if isinstance(other, Number):
            return record('scalar_mul', self, scalar = float(other))
        return record('mul', self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, Number):
            return record('scalar_mul', self, scalar = 1.0 / float(other))
        return record('mul', self, reciprocal(other))

    def __rtruediv__(self, other):
        return record('mul', other, reciprocal(self))

    def __pow__(self, exponent):
        if exponent == 2:
            return record('square', self)
        if isinstance(exponent, (int, np.integer)) and not isinstance(exponent, bool):
            return record('power', self, exponent = int(exponent))
        raise TypeError(f"only integer powers are supported, got {exponent!r}")

    def __getitem__(self, key):
        return record('slice', self, key = key)

    # ___/ Methods \___
    def tanh(self):              return record('tanh', self)
    def square(self):            return record('square', self)
    def sum(self):               return record('sum', self)
    def mean(self):              return record('mean', self)
    def reciprocal(self):        return record('reciprocal', self)
    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], tuple): shape = shape[0]
        return record('reshape', self, shape = tuple(shape))


# -----------------------------------------------------------------------------
#  Tape
# -----------------------------------------------------------------------------
@dataclass(frozen = True)
class Node:
    op     : str
    inputs : Tuple[int, ...]
    saved  : tuple
    attrs  : dict = field(default_factory = dict)
    shape  : tuple = ()


class GradientMap(dict):
    """ node_id -> gradient; also indexable by the leaf tensor itself.
    """
    def __getitem__(self, key):
        if isinstance(key, Tensor):
            key = key.node_id
        return super().__getitem__(key)


class Tape:
    def __init__(self):
        self.nodes          = []
        self.requires_grad  = []
        self.trainable_ids  = []
        self.consumed       = False
        self._token         = None

    def __enter__(self):
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        _ACTIVE_TAPE.reset(self._token)
        self._token = None

    def __len__(self):
        return len(self.nodes)

    def _append(self, node, requires_grad):
        if self.consumed:
            raise TapeError("cannot record on a tape whose backward pass already ran")
        self.nodes.append(node)
        self.requires_grad.append(requires_grad)
        return len(self.nodes) - 1

    def leaf(self, value, trainable = False):
        data = value.data.copy() if isinstance(value, Tensor) else _as_float_array(value)
        _check_finite(data, 'leaf')
        node_id = self._append(Node('leaf', (), (), shape = data.shape), trainable)
        if trainable:
            self.trainable_ids.append(node_id)
        return Tensor(data, node_id, self)

    def constant(self, value):
        return self.leaf(value, trainable = False)

    def _lift(self, value):
        if isinstance(value, Tensor):
            if value.tape is self:
                return value
            if value.tape is None:
                return self.constant(value.data)
            raise TapeError(f"tensor node {value.node_id} belongs to a different tape")
        return self.constant(value)

    def record(self, op_kind, *inputs, **attrs):
        op_def  = _lookup(op_kind, inputs)
        tensors = [self._lift(x) for x in inputs]
        value, saved = op_def.forward([t.data for t in tensors], attrs)
        _check_finite(value, op_kind)

        requires_grad = any(self.requires_grad[t.node_id] for t in tensors)
        if requires_grad:
            node = Node(op_kind, tuple(t.node_id for t in tensors), saved, attrs, value.shape)
        else:
            # Nothing upstream is trainable, keep the value only.
            node = Node('leaf', (), (), shape = value.shape)
        node_id = self._append(node, requires_grad)
        return Tensor(value, node_id, self)

    def backward(self, root):
        if self.consumed:
            raise TapeError("backward already ran on this tape")
        if not isinstance(root, Tensor) or root.tape is not self:
            raise TapeError("backward root must be a tensor recorded on this tape")
        if root.size != 1:
            raise TapeError(f"backward root must be scalar, got shape {root.shape}")

        adjoints = {root.node_id : np.ones_like(root.data)}
        for node_id in range(root.node_id, -1, -1):
            grad = adjoints.get(node_id)
            if grad is None: continue
            node = self.nodes[node_id]
            if not node.inputs: continue

            input_grads = OPS[node.op].backward(grad, node.saved, node.attrs)
            for input_id, input_grad in zip(node.inputs, input_grads):
                if not self.requires_grad[input_id]: continue
                prev = adjoints.get(input_id)
                adjoints[input_id] = input_grad if prev is None else prev + input_grad
            del adjoints[node_id]

        self.consumed = True
        grads = GradientMap()
        for node_id in self.trainable_ids:
            grad = adjoints.get(node_id)
            grads[node_id] = np.zeros(self.nodes[node_id].shape) if grad is None else np.asarray(grad, dtype = np.float64)
        return grads


def _lookup(op_kind, inputs):
    op_def = OPS.get(op_kind)
    if op_def is None:
        raise ValueError(f"unknown op kind '{op_kind}'")
    if op_def.arity is not None and len(inputs) != op_def.arity:
        raise ShapeError(f"'{op_kind}' takes {op_def.arity} inputs, got {len(inputs)}")
    return op_def


def active_tape():
    return _ACTIVE_TAPE.get()


@contextmanager
def no_record():
    """ Evaluate eagerly even while a tape is active.
    """
    token = _ACTIVE_TAPE.set(None)
    try:
        yield
    finally:
        _ACTIVE_TAPE.reset(token)


def record(op_kind, *inputs, **attrs):
    tape = _ACTIVE_TAPE.get()
    if tape is not None:
        return tape.record(op_kind, *inputs, **attrs)

    op_def = _lookup(op_kind, inputs)
    arrays = [x.data if isinstance(x, Tensor) else _as_float_array(x) for x in inputs]
    value, _ = op_def.forward(arrays, attrs)
    _check_finite(value, op_kind)
    return Tensor(value)


def backward(tape, root):
    return tape.backward(root)


# -----------------------------------------------------------------------------
#  Array-or-tensor helpers.  Plain arrays stay on the numpy path.
# -----------------------------------------------------------------------------
def is_tensor(x):
    return isinstance(x, Tensor)


def as_array(x):
    return x.data if isinstance(x, Tensor) else np.asarray(x, dtype = np.float64)


def tanh(x):
    return record('tanh', x) if is_tensor(x) else np.tanh(x)


def square(x):
    return record('square', x) if is_tensor(x) else np.square(x)


def reciprocal(x):
    return record('reciprocal', x) if is_tensor(x) else 1.0 / np.asarray(x, dtype = np.float64)


def mean(x):
    return record('mean', x) if is_tensor(x) else np.mean(x)


def concat(items, axis = 0):
    items = list(items)
    if any(is_tensor(x) for x in items):
        return record('concat', *items, axis = axis)
    return np.concatenate(items, axis = axis)


def finite_diff_gradient(f, x, h = 1e-6):
    """
    Central-difference gradient of a scalar function, coordinate by
    coordinate.  Used as an independent oracle for the tape.
    """
    if not h > 0:
        raise ValueError(f"finite-difference step must be positive, got {h}")

    x    = _as_float_array(x)
    grad = np.zeros_like(x)
    for i in range(x.size):
        x_plus  = x.copy(); x_plus.flat[i]  += h
        x_minus = x.copy(); x_minus.flat[i] -= h
        f_plus  = as_array(f(x_plus)).reshape(-1)[0]
        f_minus = as_array(f(x_minus)).reshape(-1)[0]
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NonFiniteError(f"non-finite function value at coordinate {i}", op = 'finite_diff_gradient')
        grad.flat[i] = (f_plus - f_minus) / (2.0 * h)

    return grad
