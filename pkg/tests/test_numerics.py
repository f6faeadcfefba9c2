import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from iaefilter.errors import ConfigError, ShapeError
from iaefilter.numerics import (
    Activation,
    Adam,
    AdamSettings,
    AdamState,
    activate,
    activate_grad,
    adam_step,
    add_bias_rows,
    as_matrix,
    masked_sq_error,
    matmul,
)
from oracles import loop_masked_sq_error, loop_matmul, scalar_adam

dims = st.integers(1, 16)


@st.composite
def int_pair(draw):
    n, k, m = draw(dims), draw(dims), draw(dims)
    ints = st.integers(-10, 10).map(float)
    a = draw(hnp.arrays(np.float64, (n, k), elements=ints))
    b = draw(hnp.arrays(np.float64, (k, m), elements=ints))
    return a, b


@given(int_pair())
@settings(max_examples=60, deadline=None)
def test_matmul_matches_loop_exactly_on_integer_grids(pair):
    a, b = pair
    assert np.array_equal(matmul(a, b), loop_matmul(a, b))


@pytest.mark.parametrize("seed", range(10))
def test_matmul_matches_loop_on_real_entries(seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-10, 10, (16, 11))
    b = rng.uniform(-10, 10, (11, 9))
    np.testing.assert_allclose(matmul(a, b), loop_matmul(a, b), rtol=1e-12, atol=1e-12)


def test_matmul_shape_mismatch():
    with pytest.raises(ShapeError):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_matmul_small_examples():
    assert matmul(np.eye(3), np.arange(9.0).reshape(3, 3)).tolist() == np.arange(9.0).reshape(3, 3).tolist()
    assert matmul(np.array([[1.0, 2.0]]), np.array([[3.0], [4.0]])).tolist() == [[11.0]]


def test_as_matrix_promotes_vectors_and_rejects_3d():
    assert as_matrix([1, 2, 3]).shape == (1, 3)
    with pytest.raises(ShapeError):
        as_matrix(np.zeros((2, 2, 2)))


def test_add_bias_rows_broadcasts_and_checks_length():
    out = add_bias_rows(np.zeros((3, 2)), np.array([1.0, -1.0]))
    assert out.tolist() == [[1.0, -1.0]] * 3
    with pytest.raises(ShapeError):
        add_bias_rows(np.zeros((3, 2)), np.ones(3))


@pytest.mark.parametrize("kind", list(Activation))
def test_activation_grad_matches_central_difference(kind):
    h = 1e-5
    z = np.linspace(-5, 5, 2001)
    if kind is Activation.RELU:
        z = z[np.abs(z) > 2 * h]  # the kink is not differentiable
    fd = (activate(kind, z + h) - activate(kind, z - h)) / (2 * h)
    assert np.max(np.abs(activate_grad(kind, z) - fd)) <= 1e-6


def test_activation_values():
    z = np.array([-1.0, 0.0, 2.0])
    assert activate("identity", z).tolist() == [-1.0, 0.0, 2.0]
    assert activate("relu", z).tolist() == [0.0, 0.0, 2.0]
    assert activate("sigmoid", np.array([0.0]))[0] == 0.5
    assert activate_grad("relu", np.array([0.0]))[0] == 0.0


def test_sigmoid_is_stable_at_extremes():
    s = activate(Activation.SIGMOID, np.array([-800.0, 800.0]))
    assert np.all(np.isfinite(s))
    assert s[0] == 0.0 and s[1] == 1.0


def test_identity_does_not_alias_input():
    z = np.ones(3)
    out = activate(Activation.IDENTITY, z)
    out[0] = 5.0
    assert z[0] == 1.0


def test_masked_sq_error_hand_example():
    target = np.array([[1.0, 2.0], [3.0, 4.0]])
    mask = np.array([[True, False], [False, True]])
    assert masked_sq_error(np.zeros((2, 2)), target, mask) == 17.0


def test_masked_sq_error_edge_cases():
    t = np.arange(6.0).reshape(2, 3)
    assert masked_sq_error(t, t, np.ones((2, 3), bool)) == 0.0
    assert masked_sq_error(np.zeros((2, 3)), t, np.zeros((2, 3), bool)) == 0.0
    with pytest.raises(ShapeError):
        masked_sq_error(t, t, np.ones((3, 2), bool))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_masked_sq_error_full_mask_is_frobenius(seed):
    rng = np.random.default_rng(seed)
    shape = tuple(rng.integers(1, 30, size=2))
    p, t = rng.normal(size=shape), rng.normal(size=shape)
    full = masked_sq_error(p, t, np.ones(shape, bool))
    fro = np.linalg.norm(t - p, "fro") ** 2
    assert abs(full - fro) <= 1e-12 * max(fro, 1.0)
    mask = rng.random(shape) < 0.4
    oracle = loop_masked_sq_error(p, t, mask)
    assert abs(masked_sq_error(p, t, mask) - oracle) <= 1e-12 * max(oracle, 1.0)


def test_adam_zero_gradient_leaves_param():
    p = np.array([[0.3, -0.2]])
    st0 = AdamState.fresh(p)
    new, st1 = adam_step(st0, p, np.zeros_like(p))
    assert np.array_equal(new, p)
    assert st1.t == 1


def test_adam_first_step_moves_by_lr():
    p = np.array([1.0])
    new, _ = adam_step(AdamState.fresh(p), p, np.array([1.0]))
    assert abs((p - new)[0] - 0.001) <= 1e-6


@given(hnp.arrays(np.float64, 8, elements=st.floats(-100, 100).filter(lambda g: abs(g) > 1e-6)))
@settings(max_examples=50, deadline=None)
def test_adam_first_step_opposes_gradient(grad):
    p = np.zeros(8)
    new, _ = adam_step(AdamState.fresh(p), p, grad)
    assert np.all(np.sign(new) == -np.sign(grad))


def test_adam_matches_scalar_oracle_over_many_steps():
    rng = np.random.default_rng(3)
    grads = rng.normal(size=50)
    p = np.array([0.7])
    st0 = AdamState.fresh(p, lr=0.01)
    for g in grads:
        p, st0 = adam_step(st0, p, np.array([g]))
    assert st0.t == 50
    assert abs(p[0] - scalar_adam(0.7, grads, lr=0.01)) <= 1e-14


def test_adam_is_pure_and_deterministic():
    rng = np.random.default_rng(0)
    p, g = rng.normal(size=(3, 4)), rng.normal(size=(3, 4))
    st0 = AdamState.fresh(p)
    before = (p.copy(), st0.m.copy())
    a = adam_step(st0, p, g)
    b = adam_step(st0, p, g)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1].v, b[1].v)
    assert np.array_equal(p, before[0]) and np.array_equal(st0.m, before[1]) and st0.t == 0


def test_adam_shape_and_hyperparameter_validation():
    with pytest.raises(ShapeError):
        adam_step(AdamState.fresh(np.zeros(3)), np.zeros(3), np.zeros(4))
    with pytest.raises(ConfigError):
        AdamState.fresh(np.zeros(2), beta1=1.0)
    with pytest.raises(ConfigError):
        AdamState.fresh(np.zeros(2), lr=0.0)


def test_adam_wrapper_keeps_state_per_grid():
    opt = Adam(AdamSettings(lr=0.1))
    params = {"a": np.zeros(2), "b": np.zeros(1)}
    for _ in range(3):
        params = opt.step(params, {"a": np.ones(2), "b": -np.ones(1)})
    assert opt.states["a"].t == 3 and opt.states["b"].t == 3
    assert np.all(params["a"] < 0) and params["b"][0] > 0
