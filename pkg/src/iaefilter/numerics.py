"""Dense float64 arithmetic, activations and a hand-written Adam.

Matrices are plain 2-D ``numpy.ndarray`` objects of dtype float64. The helpers
here only add shape checking and the few element-wise kernels the models need.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError

DTYPE = np.float64


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce ``x`` to a C-contiguous 2-D float64 array."""
    arr = np.ascontiguousarray(x, dtype=DTYPE)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return a @ b


def add_bias_rows(x: np.ndarray, b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=DTYPE)
    if b.ndim != 1 or b.shape[0] != x.shape[1]:
        raise ShapeError(f"bias of shape {b.shape} does not fit rows of {x.shape}")
    return x + b


class Activation(str, enum.Enum):
    IDENTITY = "identity"
    SIGMOID = "sigmoid"
    TANH = "tanh"
    RELU = "relu"


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def activate(kind: Activation, z: np.ndarray) -> np.ndarray:
    kind = Activation(kind)
    if kind is Activation.IDENTITY:
        return z.copy()
    if kind is Activation.SIGMOID:
        return _sigmoid(z)
    if kind is Activation.TANH:
        return np.tanh(z)
    return np.maximum(z, 0.0)


def activate_grad(kind: Activation, z: np.ndarray) -> np.ndarray:
    """Element-wise derivative of ``activate(kind, .)`` evaluated at ``z``.

    ReLU uses the subgradient 0 at exactly ``z == 0``.
    """
    kind = Activation(kind)
    if kind is Activation.IDENTITY:
        return np.ones_like(z)
    if kind is Activation.SIGMOID:
        s = _sigmoid(z)
        return s * (1.0 - s)
    if kind is Activation.TANH:
        t = np.tanh(z)
        return 1.0 - t * t
    return (z > 0).astype(DTYPE)


def masked_sq_error(pred: np.ndarray, target: np.ndarray, mask: np.ndarray) -> float:
    if pred.shape != target.shape or np.shape(mask) != pred.shape:
        raise ShapeError(
            f"masked_sq_error shapes differ: pred {pred.shape}, "
            f"target {target.shape}, mask {np.shape(mask)}"
        )
    diff = np.where(mask, target - pred, 0.0)
    return float(np.sum(diff * diff))


@dataclass
class AdamState:
    """Moment estimates for one parameter grid."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.m.shape != self.v.shape:
            raise ShapeError(f"Adam moments disagree: {self.m.shape} vs {self.v.shape}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError(f"Adam betas must lie in [0, 1): {self.beta1}, {self.beta2}")
        if self.epsilon <= 0 or self.lr <= 0:
            raise ConfigError("Adam lr and epsilon must be positive")
        if self.t < 0:
            raise ConfigError("Adam step counter must be nonnegative")

    @classmethod
    def fresh(cls, like: np.ndarray, **hyper) -> "AdamState":
        return cls(np.zeros_like(like, dtype=DTYPE), np.zeros_like(like, dtype=DTYPE), **hyper)


def adam_step(state: AdamState, param: np.ndarray, grad: np.ndarray):
    """One bias-corrected Adam update.

    Returns ``(new_param, new_state)``; neither input is modified.
    """
    if not (param.shape == grad.shape == state.m.shape):
        raise ShapeError(
            f"adam_step shapes differ: param {param.shape}, grad {grad.shape}, "
            f"state {state.m.shape}"
        )
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * (grad * grad)
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_param = param - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    new_state = AdamState(m, v, t, state.lr, state.beta1, state.beta2, state.epsilon)
    return new_param, new_state


@dataclass
class AdamSettings:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


@dataclass
class Adam:
    """Keeps one :class:`AdamState` per named parameter grid."""

    settings: AdamSettings = field(default_factory=AdamSettings)
    states: dict = field(default_factory=dict)

    def step(self, params: dict, grads: dict) -> dict:
        out = {}
        s = self.settings
        for name, p in params.items():
            st = self.states.get(name)
            if st is None:
                st = AdamState.fresh(p, lr=s.lr, beta1=s.beta1, beta2=s.beta2, epsilon=s.epsilon)
            out[name], self.states[name] = adam_step(st, p, grads[name])
        return out
