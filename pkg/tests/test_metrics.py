import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iaefilter.data import MaskedMatrix
from iaefilter.errors import EvaluationError, ShapeError
from iaefilter.metrics import EvalReport, avg_epoch_time, rmse
from oracles import loop_rmse


def _truth(values, observed):
    return MaskedMatrix(np.asarray(values, float), np.asarray(observed, bool))


def test_rmse_examples():
    truth = _truth([[1.0, 2.0, 9.0]], [[True, True, False]])
    assert rmse(np.array([[1.0, 2.0, -5.0]]), truth) == 0.0
    assert rmse(np.array([[0.0, 3.0, 0.0]]), truth) == 1.0
    assert math.isclose(rmse(np.array([[-2.0, -2.0, 0.0]]), truth), 3.5355339059327378, rel_tol=1e-15)
    assert math.isclose(rmse(np.array([[-2.0, -2.0, 0.0]]), truth), math.sqrt(12.5), rel_tol=1e-15)


def test_rmse_errors():
    with pytest.raises(EvaluationError):
        rmse(np.zeros((2, 2)), _truth(np.zeros((2, 2)), np.zeros((2, 2))))
    with pytest.raises(ShapeError):
        rmse(np.zeros((2, 3)), _truth(np.zeros((2, 2)), np.ones((2, 2))))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_rmse_matches_loop_oracle(seed):
    rng = np.random.default_rng(seed)
    shape = tuple(rng.integers(1, 101, size=2))
    obs = rng.random(shape) < rng.uniform(0.05, 1.0)
    obs.flat[rng.integers(obs.size)] = True
    truth = _truth(rng.normal(30, 10, shape), obs)
    pred = rng.normal(30, 10, shape)
    oracle = loop_rmse(pred, truth.values, obs)
    assert abs(rmse(pred, truth) - oracle) <= 1e-12 * oracle


def test_rmse_invariant_under_cell_permutation():
    rng = np.random.default_rng(4)
    vals, obs, pred = rng.normal(size=(8, 6)), rng.random((8, 6)) < 0.5, rng.normal(size=(8, 6))
    perm = rng.permutation(vals.size)
    a = rmse(pred, _truth(vals, obs))
    b = rmse(pred.ravel()[perm].reshape(8, 6), _truth(vals.ravel()[perm].reshape(8, 6), obs.ravel()[perm].reshape(8, 6)))
    assert abs(a - b) <= 1e-12 * a


def test_avg_epoch_time():
    assert avg_epoch_time(100.0, 100) == 1.0
    assert avg_epoch_time(7.5, 1) == 7.5
    assert math.isclose(avg_epoch_time(2383.0, 100), 23.83, rel_tol=1e-12)
    with pytest.raises(EvaluationError):
        avg_epoch_time(1.0, 0)


@given(st.floats(0.0, 1e6), st.integers(1, 10_000))
def test_avg_epoch_time_times_epochs_recovers_total(total, n):
    assert abs(avg_epoch_time(total, n) * n - total) <= 1e-9 * max(total, 1e-300)


def test_eval_report_ok_flag():
    assert EvalReport("ae").ok
    assert not EvalReport("ae", error="boom").ok
