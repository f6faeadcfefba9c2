"""Stacked (denoising) autoencoders: layer-wise pre-training, then fine-tuning.

A stack of ``k`` autoencoders costs ``k + 1`` optimisation phases: one per
layer during pre-training, one for the unrolled ``2k``-layer network.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ShapeError
from ..numerics import Activation, Adam
from .autoencoder import (
    NO_CORRUPTION,
    PARAM_NAMES,
    CorruptionSpec,
    PhaseCounter,
    TrainConfig,
    TrainResult,
    _check_mask,
    _require_observed,
    chain_backward,
    chain_forward,
    dae_train,
    init_ae,
    optimize,
    wrap_hook,
)


@dataclass
class StackModel:
    layers: list
    # Adam state of the unrolled network, kept so fine-tuning can resume
    fine_tune_state: Optional[Adam] = field(default=None, repr=False)

    def __post_init__(self):
        if not self.layers:
            raise ShapeError("a stack needs at least one layer")
        for i in range(1, len(self.layers)):
            prev, cur = self.layers[i - 1], self.layers[i]
            if cur.n_in != prev.n_hidden:
                raise ShapeError(
                    f"layer {i + 1} expects {cur.n_in} inputs but layer {i} "
                    f"has {prev.n_hidden} hidden units"
                )

    @property
    def k(self) -> int:
        return len(self.layers)

    def unrolled(self):
        enc = [(p.W, p.b, p.enc_act) for p in self.layers]
        dec = [(p.W_dec, p.b_dec, p.dec_act) for p in reversed(self.layers)]
        return enc + dec

    def arrays(self) -> dict:
        return {
            f"layer{i}.{name}": arr
            for i, p in enumerate(self.layers)
            for name, arr in p.arrays().items()
        }

    def with_arrays(self, arrays: dict) -> "StackModel":
        layers = [
            p.with_arrays({n: arrays[f"layer{i}.{n}"] for n in PARAM_NAMES})
            for i, p in enumerate(self.layers)
        ]
        return StackModel(layers, self.fine_tune_state)


def init_stack(
    n_in: int,
    hidden: list,
    rng: np.random.Generator,
    enc_act=Activation.SIGMOID,
    dec_act=Activation.IDENTITY,
) -> StackModel:
    layers = []
    width = n_in
    for h in hidden:
        layers.append(init_ae(width, h, rng, enc_act=enc_act, dec_act=dec_act))
        width = h
    return StackModel(layers)


def stack_pretrain(
    stack: StackModel,
    x: np.ndarray,
    mask,
    spec: CorruptionSpec = NO_CORRUPTION,
    cfg: Optional[TrainConfig] = None,
    counter: Optional[PhaseCounter] = None,
) -> TrainResult:
    """Greedy layer-wise training.

    Layer 1 sees ``x`` under ``mask``; every later layer is trained on the
    encoder output of the layer below, which is dense, so its mask is all-true.
    Corruption (if any) is applied to each layer's input with its own stream.
    """
    cfg = cfg or TrainConfig()
    mask = _check_mask(x, mask)
    _require_observed(mask)
    if x.shape[1] != stack.layers[0].n_in:
        raise ShapeError(f"input {x.shape} does not fit stack with {stack.layers[0].n_in} inputs")
    trained = []
    traces = []
    h, m = x, mask
    for i, layer in enumerate(stack.layers):
        res = dae_train(layer, h, m, spec, cfg, counter, epochs=cfg.layer_epochs, stream=i)
        trained.append(res.model)
        traces.append(res.loss_trace)
        h, _ = chain_forward(res.model.encoder_layers(), h)
        m = np.ones(h.shape, dtype=bool)
    return TrainResult(StackModel(trained), traces, stack.k)


def stack_forward(stack: StackModel, x: np.ndarray) -> np.ndarray:
    if x.ndim != 2 or x.shape[1] != stack.layers[0].n_in:
        raise ShapeError(f"input {x.shape} does not fit stack with {stack.layers[0].n_in} inputs")
    out, _ = chain_forward(stack.unrolled(), x)
    return out


def _stack_loss_and_grad(stack: StackModel, x, mask, l2=0.0):
    mask = _check_mask(x, mask)
    if x.shape[1] != stack.layers[0].n_in:
        raise ShapeError(f"input {x.shape} does not fit stack with {stack.layers[0].n_in} inputs")
    layers = stack.unrolled()
    out, cache = chain_forward(layers, x)
    resid = np.where(mask, out - x, 0.0)
    loss = float(np.sum(resid * resid))
    grads, _ = chain_backward(layers, cache, 2.0 * resid)
    k = stack.k
    g = {}
    for i, p in enumerate(stack.layers):
        dW, db = grads[i]
        dWd, dbd = grads[2 * k - 1 - i]
        if l2:
            loss += 0.5 * l2 * (np.sum(p.W * p.W) + np.sum(p.W_dec * p.W_dec))
            dW = dW + l2 * p.W
            dWd = dWd + l2 * p.W_dec
        g[f"layer{i}.W"], g[f"layer{i}.b"] = dW, db
        g[f"layer{i}.W_dec"], g[f"layer{i}.b_dec"] = dWd, dbd
    return loss, g


def stack_loss(stack: StackModel, x, mask, l2: float = 0.0) -> float:
    return _stack_loss_and_grad(stack, x, mask, l2)[0]


def stack_backward(stack: StackModel, x, mask, l2: float = 0.0) -> dict:
    """Gradients of the end-to-end masked loss, keyed like ``stack.arrays()``."""
    return _stack_loss_and_grad(stack, x, mask, l2)[1]


def stack_finetune(
    stack: StackModel,
    x: np.ndarray,
    mask,
    cfg: Optional[TrainConfig] = None,
    counter: Optional[PhaseCounter] = None,
    on_epoch=None,
) -> TrainResult:
    cfg = cfg or TrainConfig()
    mask = _check_mask(x, mask)
    _require_observed(mask)
    adam = stack.fine_tune_state or Adam(cfg.adam)

    def loss_and_grad(arrays, _epoch):
        return _stack_loss_and_grad(stack.with_arrays(arrays), x, mask, cfg.l2)

    hook = wrap_hook(on_epoch, stack.with_arrays)
    arrays, trace = optimize(stack.arrays(), loss_and_grad, cfg.epochs, adam, counter, "finetune", hook)
    tuned = stack.with_arrays(arrays)
    tuned.fine_tune_state = adam
    return TrainResult(tuned, trace, 1)


def stack_train(
    stack: StackModel,
    x: np.ndarray,
    mask,
    spec: CorruptionSpec = NO_CORRUPTION,
    cfg: Optional[TrainConfig] = None,
    counter: Optional[PhaseCounter] = None,
    on_epoch=None,
) -> TrainResult:
    """Pre-train then fine-tune; the result reports ``k + 1`` phases."""
    pre = stack_pretrain(stack, x, mask, spec, cfg, counter)
    fine = stack_finetune(pre.model, x, mask, cfg, counter, on_epoch)
    return TrainResult(fine.model, fine.loss_trace, pre.phases + fine.phases)
