"""Integrated autoencoder: two chained autoencoders under one objective.

The first AE encodes and decodes the auxiliary matrix ``a`` into ``a_tilde``.
The second AE reconstructs the horizontal concatenation ``[v, a_tilde]``; its
first ``n`` output columns are the prediction of ``v``. Training minimises

    sum_obs (v - recon_v)^2 + sum (a_tilde - recon_a)^2
        + lam / 2 * (|W2|_F^2 + |W2_dec|_F^2)

over all eight parameter grids at once. The first AE is never fitted against
``a`` itself; it only receives gradient through ``a_tilde``, which appears both
as input and as target of the second AE.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from ..errors import ConfigError, ShapeError
from ..numerics import Activation, Adam
from .autoencoder import (
    PARAM_NAMES,
    AeParams,
    PhaseCounter,
    TrainConfig,
    TrainResult,
    _check_mask,
    _require_observed,
    chain_backward,
    chain_forward,
    init_ae,
    optimize,
    wrap_hook,
)


@dataclass
class IaeModel:
    ae1: AeParams
    ae2: AeParams
    lam: float = 0.01
    n_cols_v: int = 0
    # True: unmasked Frobenius error over the whole concatenation, V block included
    dense_v_loss: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigError(f"lambda must be nonnegative, got {self.lam}")
        if self.ae1.n_out != self.ae1.n_in:
            raise ShapeError(
                f"first AE must reconstruct its input: {self.ae1.n_in} in, {self.ae1.n_out} out"
            )
        if self.ae2.n_in != self.n_cols_v + self.ae1.n_out:
            raise ShapeError(
                f"second AE takes {self.ae2.n_in} inputs, expected "
                f"{self.n_cols_v} + {self.ae1.n_out}"
            )
        if self.ae2.n_out != self.ae2.n_in:
            raise ShapeError("second AE must reconstruct its input")

    def arrays(self) -> dict:
        out = {f"ae1.{k}": v for k, v in self.ae1.arrays().items()}
        out.update({f"ae2.{k}": v for k, v in self.ae2.arrays().items()})
        return out

    def with_arrays(self, arrays: dict) -> "IaeModel":
        return replace(
            self,
            ae1=self.ae1.with_arrays({k: arrays[f"ae1.{k}"] for k in PARAM_NAMES}),
            ae2=self.ae2.with_arrays({k: arrays[f"ae2.{k}"] for k in PARAM_NAMES}),
        )


def init_iae(
    n_cols_v: int,
    n_cols_a: int,
    hidden1: int,
    hidden2: int,
    rng: np.random.Generator,
    lam: float = 0.01,
    enc_act=Activation.SIGMOID,
    dec_act=Activation.IDENTITY,
    dense_v_loss: bool = False,
) -> IaeModel:
    ae1 = init_ae(n_cols_a, hidden1, rng, enc_act=enc_act, dec_act=dec_act)
    ae2 = init_ae(n_cols_v + n_cols_a, hidden2, rng, enc_act=enc_act, dec_act=dec_act)
    return IaeModel(ae1, ae2, lam, n_cols_v, dense_v_loss)


class IaeForward(NamedTuple):
    a_tilde: np.ndarray
    concat: np.ndarray
    recon: np.ndarray
    v_hat: np.ndarray


def _check_inputs(model: IaeModel, v: np.ndarray, a: np.ndarray) -> None:
    if v.ndim != 2 or a.ndim != 2:
        raise ShapeError("v and a must be 2-D")
    if v.shape[0] != a.shape[0]:
        raise ShapeError(f"v has {v.shape[0]} rows but a has {a.shape[0]} (shapes {v.shape}, {a.shape})")
    if v.shape[1] != model.n_cols_v:
        raise ShapeError(f"v has {v.shape[1]} columns, model expects {model.n_cols_v}")
    if a.shape[1] != model.ae1.n_in:
        raise ShapeError(f"a has {a.shape[1]} columns, model expects {model.ae1.n_in}")


def _layers(p: AeParams):
    return p.encoder_layers() + p.decoder_layers()


def iae_forward(model: IaeModel, v: np.ndarray, a: np.ndarray) -> IaeForward:
    _check_inputs(model, v, a)
    a_tilde, _ = chain_forward(_layers(model.ae1), a)
    concat = np.hstack([v, a_tilde])
    recon, _ = chain_forward(_layers(model.ae2), concat)
    return IaeForward(a_tilde, concat, recon, recon[:, : model.n_cols_v])


def _full_mask(model: IaeModel, mask_v: np.ndarray, n_rows: int) -> np.ndarray:
    if model.dense_v_loss:
        return np.ones((n_rows, model.ae2.n_in), dtype=bool)
    return np.hstack([mask_v, np.ones((n_rows, model.ae1.n_out), dtype=bool)])


def _iae_loss_and_grad(model: IaeModel, v, a, mask_v, want_grad=True):
    _check_inputs(model, v, a)
    mask_v = _check_mask(v, mask_v)
    l1 = _layers(model.ae1)
    l2 = _layers(model.ae2)
    a_tilde, cache1 = chain_forward(l1, a)
    concat = np.hstack([v, a_tilde])
    recon, cache2 = chain_forward(l2, concat)

    mask = _full_mask(model, mask_v, v.shape[0])
    resid = np.where(mask, recon - concat, 0.0)
    W2, W2d = model.ae2.W, model.ae2.W_dec
    reg = 0.5 * model.lam * (np.sum(W2 * W2) + np.sum(W2d * W2d))
    loss = float(np.sum(resid * resid) + reg)
    if not want_grad:
        return loss, None

    d_recon = 2.0 * resid
    grads2, d_concat_input = chain_backward(l2, cache2, d_recon)
    # concat is also the target: d/d(concat) of (recon - concat)^2 adds -d_recon
    d_concat = d_concat_input - d_recon
    d_a_tilde = d_concat[:, model.n_cols_v :]
    grads1, _ = chain_backward(l1, cache1, d_a_tilde)

    (dW1, db1), (dW1d, db1d) = grads1
    (dW2, db2), (dW2d, db2d) = grads2
    g = {
        "ae1.W": dW1,
        "ae1.b": db1,
        "ae1.W_dec": dW1d,
        "ae1.b_dec": db1d,
        "ae2.W": dW2 + model.lam * W2,
        "ae2.b": db2,
        "ae2.W_dec": dW2d + model.lam * W2d,
        "ae2.b_dec": db2d,
    }
    return loss, g


def iae_loss(model: IaeModel, v: np.ndarray, a: np.ndarray, mask_v) -> float:
    return _iae_loss_and_grad(model, v, a, mask_v, want_grad=False)[0]


def iae_backward(model: IaeModel, v: np.ndarray, a: np.ndarray, mask_v) -> dict:
    """Gradients for all eight grids, keyed like ``model.arrays()``."""
    return _iae_loss_and_grad(model, v, a, mask_v)[1]


def iae_train(
    model: IaeModel,
    v: np.ndarray,
    a: np.ndarray,
    mask_v,
    cfg: Optional[TrainConfig] = None,
    counter: Optional[PhaseCounter] = None,
    on_epoch=None,
) -> TrainResult:
    cfg = cfg or TrainConfig()
    _check_inputs(model, v, a)
    mask_v = _check_mask(v, mask_v)
    _require_observed(mask_v)

    def loss_and_grad(arrays, _epoch):
        return _iae_loss_and_grad(model.with_arrays(arrays), v, a, mask_v)

    hook = wrap_hook(on_epoch, model.with_arrays)
    arrays, trace = optimize(
        model.arrays(), loss_and_grad, cfg.epochs, Adam(cfg.adam), counter, "iae", hook
    )
    return TrainResult(model.with_arrays(arrays), trace, 1)
