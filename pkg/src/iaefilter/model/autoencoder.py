"""Single autoencoder: parameters, forward/backward, corruption, training loop.

Rows of every input matrix are samples. An autoencoder maps a row ``x`` to

    H = enc_act(x W^T + b)
    O = dec_act(H W_dec^T + b_dec)

and is scored by the squared error on the observed cells only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from ..errors import ConfigError, NumericError, ShapeError
from ..numerics import (
    DTYPE,
    Activation,
    Adam,
    AdamSettings,
    activate,
    activate_grad,
    add_bias_rows,
    masked_sq_error,
    matmul,
)

PARAM_NAMES = ("W", "b", "W_dec", "b_dec")


@dataclass
class TrainConfig:
    epochs: int = 100
    # layer-wise epochs for stacked models; None means same as ``epochs``
    pretrain_epochs: Optional[int] = None
    adam: AdamSettings = field(default_factory=AdamSettings)
    seed: int = 0
    # optional L2 on the weight grids of the baselines (they carry none by default)
    l2: float = 0.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.pretrain_epochs is not None and self.pretrain_epochs < 1:
            raise ConfigError(f"pretrain_epochs must be >= 1, got {self.pretrain_epochs}")
        if self.l2 < 0:
            raise ConfigError(f"l2 must be nonnegative, got {self.l2}")

    @property
    def layer_epochs(self) -> int:
        return self.epochs if self.pretrain_epochs is None else self.pretrain_epochs


@dataclass
class PhaseCounter:
    """Counts calls into the optimisation loop, one per objective minimised."""

    phases: int = 0
    labels: list = field(default_factory=list)

    def tick(self, label: str) -> None:
        self.phases += 1
        self.labels.append(label)


@dataclass
class TrainResult:
    model: object
    loss_trace: list
    phases: int


@dataclass
class AeParams:
    W: np.ndarray
    b: np.ndarray
    W_dec: np.ndarray
    b_dec: np.ndarray
    enc_act: Activation = Activation.SIGMOID
    dec_act: Activation = Activation.IDENTITY

    def __post_init__(self):
        self.enc_act = Activation(self.enc_act)
        self.dec_act = Activation(self.dec_act)
        if self.W.ndim != 2 or self.W_dec.ndim != 2:
            raise ShapeError("AE weight grids must be 2-D")
        if self.b.shape != (self.W.shape[0],):
            raise ShapeError(f"encoder bias {self.b.shape} does not match W {self.W.shape}")
        if self.b_dec.shape != (self.W_dec.shape[0],):
            raise ShapeError(
                f"decoder bias {self.b_dec.shape} does not match W_dec {self.W_dec.shape}"
            )
        if self.W_dec.shape[1] != self.W.shape[0]:
            raise ShapeError(f"W_dec {self.W_dec.shape} does not follow W {self.W.shape}")

    @property
    def n_in(self) -> int:
        return self.W.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.W.shape[0]

    @property
    def n_out(self) -> int:
        return self.W_dec.shape[0]

    def arrays(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def with_arrays(self, arrays: dict) -> "AeParams":
        return replace(self, **{k: arrays[k] for k in PARAM_NAMES})

    def encoder_layers(self):
        return [(self.W, self.b, self.enc_act)]

    def decoder_layers(self):
        return [(self.W_dec, self.b_dec, self.dec_act)]


def glorot(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


def init_ae(
    n_in: int,
    n_hidden: int,
    rng: np.random.Generator,
    n_out: Optional[int] = None,
    enc_act=Activation.SIGMOID,
    dec_act=Activation.IDENTITY,
) -> AeParams:
    """Glorot-uniform weights, zero biases. Draws W before W_dec."""
    n_out = n_in if n_out is None else n_out
    if min(n_in, n_hidden, n_out) < 1:
        raise ConfigError(f"AE dimensions must be positive: {n_in}, {n_hidden}, {n_out}")
    W = glorot(rng, n_hidden, n_in)
    W_dec = glorot(rng, n_out, n_hidden)
    return AeParams(
        W, np.zeros(n_hidden, DTYPE), W_dec, np.zeros(n_out, DTYPE), enc_act, dec_act
    )


# --- dense-chain forward/backward shared by every architecture -------------


def chain_forward(layers, x: np.ndarray):
    """Run ``x`` through ``[(W, b, act), ...]``.

    Returns the output plus a cache of ``(layer_input, pre_activation)`` pairs.
    """
    cache = []
    h = x
    for W, b, act in layers:
        if h.shape[1] != W.shape[1]:
            raise ShapeError(f"layer input {h.shape} does not fit weight {W.shape}")
        z = add_bias_rows(matmul(h, W.T), b)
        cache.append((h, z))
        h = activate(act, z)
    return h, cache


def chain_backward(layers, cache, d_out: np.ndarray):
    """Backpropagate ``d_out`` (gradient w.r.t. chain output).

    Returns ``([(dW, db), ...], d_input)``.
    """
    grads = [None] * len(layers)
    d = d_out
    for i in range(len(layers) - 1, -1, -1):
        W, _, act = layers[i]
        h_in, z = cache[i]
        dz = d * activate_grad(act, z)
        grads[i] = (dz.T @ h_in, dz.sum(axis=0))
        d = dz @ W
    return grads, d


def _check_mask(x: np.ndarray, mask) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x.shape:
        raise ShapeError(f"mask shape {mask.shape} differs from data shape {x.shape}")
    return mask


def ae_forward(p: AeParams, x: np.ndarray):
    """Return ``(H, O)`` for the row batch ``x``."""
    if x.ndim != 2 or x.shape[1] != p.n_in:
        raise ShapeError(f"input {x.shape} does not fit AE with {p.n_in} inputs")
    H, _ = chain_forward(p.encoder_layers(), x)
    O, _ = chain_forward(p.decoder_layers(), H)
    return H, O


def ae_loss(p: AeParams, x: np.ndarray, mask, target: Optional[np.ndarray] = None, l2: float = 0.0) -> float:
    """Masked squared reconstruction error.

    ``target`` defaults to ``x``; the denoising variant passes the corrupted
    input as ``x`` and the clean data as ``target``.
    """
    target = x if target is None else target
    mask = _check_mask(target, mask)
    _, O = ae_forward(p, x)
    loss = masked_sq_error(O, target, mask)
    if l2:
        loss += 0.5 * l2 * (np.sum(p.W * p.W) + np.sum(p.W_dec * p.W_dec))
    return loss


def ae_backward(p: AeParams, x: np.ndarray, mask, target: Optional[np.ndarray] = None, l2: float = 0.0):
    """Analytic gradient of :func:`ae_loss` as a dict keyed like ``p.arrays()``."""
    return _ae_loss_and_grad(p, x, mask, target, l2)[1]


def _ae_loss_and_grad(p, x, mask, target=None, l2=0.0):
    target = x if target is None else target
    mask = _check_mask(target, mask)
    if x.ndim != 2 or x.shape[1] != p.n_in:
        raise ShapeError(f"input {x.shape} does not fit AE with {p.n_in} inputs")
    layers = p.encoder_layers() + p.decoder_layers()
    O, cache = chain_forward(layers, x)
    if O.shape != target.shape:
        raise ShapeError(f"AE output {O.shape} differs from target {target.shape}")
    resid = np.where(mask, O - target, 0.0)
    loss = float(np.sum(resid * resid))
    (dW, db), (dWd, dbd) = chain_backward(layers, cache, 2.0 * resid)[0]
    if l2:
        loss += 0.5 * l2 * (np.sum(p.W * p.W) + np.sum(p.W_dec * p.W_dec))
        dW = dW + l2 * p.W
        dWd = dWd + l2 * p.W_dec
    return loss, {"W": dW, "b": db, "W_dec": dWd, "b_dec": dbd}


# --- corruption ------------------------------------------------------------


class CorruptionKind(str, enum.Enum):
    NONE = "none"
    MASKING = "masking"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class CorruptionSpec:
    kind: CorruptionKind = CorruptionKind.NONE
    level: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", CorruptionKind(self.kind))
        if not np.isfinite(self.level) or self.level < 0:
            raise ConfigError(f"corruption level must be finite and >= 0, got {self.level}")
        if self.kind is CorruptionKind.MASKING and self.level > 1:
            raise ConfigError(f"masking level must lie in [0, 1], got {self.level}")

    @property
    def active(self) -> bool:
        return self.kind is not CorruptionKind.NONE


NO_CORRUPTION = CorruptionSpec()


def corrupt(x: np.ndarray, spec: CorruptionSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.kind is CorruptionKind.NONE:
        return x
    if spec.kind is CorruptionKind.MASKING:
        keep = rng.random(x.shape) >= spec.level
        return np.where(keep, x, 0.0)
    return x + rng.normal(0.0, spec.level, size=x.shape)


def corruption_rng(seed: int, stream: int) -> np.random.Generator:
    """Independent corruption stream per (seed, layer index)."""
    return np.random.default_rng([seed, 7919, stream])


# --- optimisation loop -----------------------------------------------------


def optimize(
    params: dict,
    loss_and_grad: Callable[[dict, int], tuple],
    epochs: int,
    adam: Adam,
    counter: Optional[PhaseCounter] = None,
    label: str = "",
    on_epoch: Optional[Callable[[int, dict, float], None]] = None,
):
    """Full-batch Adam on ``params`` for ``epochs`` steps: one optimisation phase.

    ``loss_and_grad(params, epoch)`` returns the loss at ``params`` and its
    gradient dict. The trace records that loss (pre-update) each epoch.
    ``on_epoch(epoch, params, loss)`` sees the post-update parameters.
    """
    if counter is not None:
        counter.tick(label)
    trace = []
    for epoch in range(epochs):
        loss, grads = loss_and_grad(params, epoch)
        if not np.isfinite(loss):
            raise NumericError(f"non-finite loss {loss} at epoch {epoch + 1} ({label})")
        params = adam.step(params, grads)
        trace.append(loss)
        if on_epoch is not None:
            on_epoch(epoch, params, loss)
    return params, trace


def wrap_hook(on_epoch, rebuild):
    """Adapt a model-level epoch callback to the raw parameter dicts of :func:`optimize`."""
    if on_epoch is None:
        return None
    return lambda epoch, arrays, loss: on_epoch(epoch, rebuild(arrays), loss)


def _require_observed(mask) -> None:
    if not np.any(mask):
        raise ConfigError("training data has no observed cells")


def dae_train(
    p: AeParams,
    x: np.ndarray,
    mask,
    spec: CorruptionSpec,
    cfg: TrainConfig,
    counter: Optional[PhaseCounter] = None,
    on_epoch=None,
    epochs: Optional[int] = None,
    stream: int = 0,
) -> TrainResult:
    """Denoising training: corrupt each epoch, score against the clean ``x``.

    With ``spec`` of kind NONE this is plain autoencoder training.
    """
    mask = _check_mask(x, mask)
    _require_observed(mask)
    rng = corruption_rng(cfg.seed, stream)

    def loss_and_grad(arrays, _epoch):
        x_in = corrupt(x, spec, rng)
        return _ae_loss_and_grad(p.with_arrays(arrays), x_in, mask, x, cfg.l2)

    hook = wrap_hook(on_epoch, p.with_arrays)
    arrays, trace = optimize(
        p.arrays(),
        loss_and_grad,
        cfg.epochs if epochs is None else epochs,
        Adam(cfg.adam),
        counter,
        "dae" if spec.active else "ae",
        hook,
    )
    return TrainResult(p.with_arrays(arrays), trace, 1)


def ae_train(p, x, mask, cfg, counter=None, on_epoch=None) -> TrainResult:
    return dae_train(p, x, mask, NO_CORRUPTION, cfg, counter, on_epoch)
