import numpy as np
import pytest

from dynnet.metrics import compute_mse, parameter_table, per_state_mse, relative_error


def test_relative_error_examples():
    assert round(relative_error(0.507, 0.7), 3) == 0.276
    assert round(relative_error(9.528, 10.0), 3) == 0.047
    assert relative_error(-2.0, -1.0) == 1.0
    with pytest.raises(ValueError):
        relative_error(1.0, 0.0)


def test_mse():
    assert compute_mse([1.0, 2.0], [1.0, 4.0]) == 2.0
    with pytest.raises(ValueError):
        compute_mse([1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        compute_mse([], [])

    pred = np.array([[0.0, 1.0], [0.0, 1.0]])
    true = np.array([[1.0, 1.0], [1.0, 3.0]])
    assert per_state_mse(pred, true, ('v', 'w')) == {'v': 1.0, 'w': 2.0}


def test_parameter_table():
    rows = parameter_table(('a', 'c'), (0.7, 12.5), (0.3, 11.0), (0.507, 12.5))
    assert [ r.name for r in rows ] == ['a', 'c']
    assert rows[0].rel_error == pytest.approx(0.2757, abs = 1e-4)
    assert rows[1].as_row() == ['c', 12.5, 11.0, 12.5, 0.0]
