import numpy as np
import pytest

from dynnet.autodiff import (Tape, Tensor, active_tape, backward, concat, finite_diff_gradient, no_record,
                             reciprocal, record, square, tanh)
from dynnet.errors   import NonFiniteError, ShapeError, TapeError

from conftest import relative_gradient_error, tape_gradient

NUM_GRAPHS = 50


def _graphs(rng):
    """ (name, input shape, fn) per op kind; constants drawn once per graph. """
    c34 = rng.normal(size = (3, 4))
    w34 = rng.normal(size = (3, 4))
    w23 = rng.normal(size = (2, 3))
    c32 = rng.normal(size = (3, 2))
    c61 = rng.normal(size = (1, 6))
    c64 = rng.normal(size = (6, 4))
    return [
        ('add'       , (3, 1), lambda x: square(x + c34).sum()),
        ('sub'       , (3, 4), lambda x: square(c34 - x).sum()),
        ('mul'       , (3, 4), lambda x: (x * x * c34).sum()),
        ('scalar_mul', (3, 4), lambda x: square(x * 2.5 - x / 4.0).sum()),
        ('matmul'    , (2, 3), lambda x: square(x @ w34).sum() + square(w23 @ x.reshape(3, 2)).sum()),
        ('tanh'      , (3, 4), lambda x: (tanh(x) * c34).sum()),
        ('square'    , (3, 4), lambda x: (square(x) * c34).sum()),
        ('power'     , (3, 4), lambda x: (x ** 3 * c34).sum()),
        ('reciprocal', (3, 4), lambda x: (reciprocal(x * 0.5 + 2.0) * c34).sum()),
        ('sum'       , (3, 4), lambda x: square(x.sum())),
        ('mean'      , (3, 4), lambda x: square(x.mean() - 0.3)),
        ('concat'    , (3, 2), lambda x: square(concat([x, c32, x], axis = 1) @ c64).sum()),
        ('slice'     , (3, 4), lambda x: square(x[1:, :2]).sum() + (x[0:1, :] * c34[0:1, :]).sum()),
        ('reshape'   , (2, 3), lambda x: square(c61 @ x.reshape(6, 1)).sum()),
    ]


@pytest.mark.parametrize("op_index", range(14))
def test_reverse_mode_matches_central_differences(op_index):
    rng = np.random.default_rng(op_index)
    worst = 0.0
    for _ in range(NUM_GRAPHS):
        name, shape, fn = _graphs(rng)[op_index]
        x = rng.uniform(0.2, 1.5, size = shape)

        g_tape = tape_gradient(fn, x)
        with no_record():
            g_fd = finite_diff_gradient(fn, x)
        worst = max(worst, relative_gradient_error(g_tape, g_fd))
    assert worst < 1e-5, name


def test_untouched_trainable_leaf_gets_zero_gradient():
    with Tape() as tape:
        a = tape.leaf(np.ones((2, 2)), trainable = True)
        b = tape.leaf(np.ones(3), trainable = True)
        loss = square(a).sum()
    grads = tape.backward(loss)
    np.testing.assert_array_equal(grads[a], 2.0 * np.ones((2, 2)))
    np.testing.assert_array_equal(grads[b], np.zeros(3))


def test_shared_subexpression_accumulates():
    # d/dx (x*x + x) = 2x + 1
    with Tape() as tape:
        x = tape.leaf(np.array([3.0]), trainable = True)
        y = x * x + x
        loss = y.sum()
    assert tape.backward(loss)[x][0] == pytest.approx(7.0)


def test_repeated_gather_indices_accumulate():
    with Tape() as tape:
        x = tape.leaf(np.array([1.0, 2.0, 3.0]), trainable = True)
        loss = square(x[np.array([0, 0, 2, 0])]).sum()
    np.testing.assert_array_equal(tape.backward(loss)[x], [6.0, 0.0, 6.0])


def test_constants_are_not_differentiated():
    with Tape() as tape:
        x = tape.leaf(np.array([2.0]), trainable = True)
        c = tape.constant(np.array([5.0]))
        loss = (x * c + c * c).sum()
    grads = backward(tape, loss)
    assert list(grads.keys()) == [x.node_id]
    assert grads[x][0] == pytest.approx(5.0)


def test_numpy_on_the_left_defers_to_tensor():
    with Tape() as tape:
        x   = tape.leaf(np.ones((2, 2)), trainable = True)
        out = np.full((2, 2), 3.0) * x
        assert isinstance(out, Tensor)
        loss = (np.eye(2) @ out).sum()
    np.testing.assert_allclose(tape.backward(loss)[x], 3.0 * np.ones((2, 2)))


def test_backward_twice_raises():
    with Tape() as tape:
        x = tape.leaf(np.ones(2), trainable = True)
        loss = x.sum()
    tape.backward(loss)
    with pytest.raises(TapeError):
        tape.backward(loss)


def test_recording_after_backward_raises():
    with Tape() as tape:
        x = tape.leaf(np.ones(2), trainable = True)
        loss = x.sum()
        tape.backward(loss)
        with pytest.raises(TapeError):
            x + 1.0


def test_non_scalar_root_raises():
    with Tape() as tape:
        x = tape.leaf(np.ones(2), trainable = True)
        y = x * 2.0
    with pytest.raises(TapeError):
        tape.backward(y)


def test_tensor_from_another_tape_raises():
    with Tape() as other:
        foreign = other.leaf(np.ones(2), trainable = True)
    with Tape() as tape:
        x = tape.leaf(np.ones(2), trainable = True)
        with pytest.raises(TapeError):
            x + foreign


def test_non_finite_values_raise_at_the_op():
    with Tape() as tape:
        x = tape.leaf(np.array([0.0, 1.0]), trainable = True)
        with pytest.raises(NonFiniteError) as info:
            reciprocal(x)
    assert info.value.op == 'reciprocal'

    with pytest.raises(NonFiniteError):
        Tape().leaf(np.array([np.nan]))


def test_shape_mismatch_names_the_op():
    with Tape() as tape:
        x = tape.leaf(np.ones((2, 3)), trainable = True)
        with pytest.raises(ShapeError, match = 'matmul'):
            x @ np.ones((2, 3))
        with pytest.raises(ShapeError, match = 'add'):
            x + np.ones((4, 3))


def test_without_tape_ops_evaluate_eagerly():
    assert active_tape() is None
    out = record('add', np.ones(2), np.ones(2))
    assert isinstance(out, Tensor) and out.node_id is None
    np.testing.assert_array_equal(out.numpy(), [2.0, 2.0])


def test_no_record_suspends_the_active_tape():
    with Tape() as tape:
        x = tape.leaf(np.ones(2), trainable = True)
        n = len(tape)
        with no_record():
            assert active_tape() is None
            eager = x * 2.0
        assert eager.node_id is None
        assert len(tape) == n
        assert active_tape() is tape


def test_finite_diff_gradient_of_quadratic():
    g = finite_diff_gradient(lambda x: (x ** 2).sum(), np.array([1.0, -2.0, 0.5]))
    np.testing.assert_allclose(g, [2.0, -4.0, 1.0], rtol = 1e-8)
    with pytest.raises(ValueError):
        finite_diff_gradient(lambda x: x.sum(), np.ones(2), h = 0.0)


def test_gradients_agree_with_torch(tiny_state_spec, tiny_state_params):
    torch = pytest.importorskip("torch")
    from dynnet.modeling.mlp import MLP

    x     = np.random.default_rng(3).normal(size = (5, 2))
    theta = tiny_state_params.theta

    g_tape = tape_gradient(lambda th: square(MLP(tiny_state_spec, th)(x) - 0.5).mean(), theta)

    th = torch.tensor(theta, dtype = torch.float64, requires_grad = True)
    xt = torch.tensor(x, dtype = torch.float64)
    h  = xt
    for layer_index, layer in enumerate(tiny_state_spec.layout()):
        W = th[layer.weight_slice].reshape(layer.fan_in, layer.fan_out)
        b = th[layer.bias_slice].reshape(1, layer.fan_out)
        h = h @ W + b
        if layer_index < len(tiny_state_spec.layout()) - 1:
            h = torch.tanh(h)
    loss = ((h - 0.5) ** 2).mean()
    loss.backward()

    np.testing.assert_allclose(g_tape, th.grad.numpy(), rtol = 1e-10, atol = 1e-13)
