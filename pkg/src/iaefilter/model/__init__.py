from .autoencoder import (
    NO_CORRUPTION,
    AeParams,
    CorruptionKind,
    CorruptionSpec,
    PhaseCounter,
    TrainConfig,
    TrainResult,
    ae_backward,
    ae_forward,
    ae_loss,
    ae_train,
    corrupt,
    dae_train,
    init_ae,
)
from .iae import IaeForward, IaeModel, iae_backward, iae_forward, iae_loss, iae_train, init_iae
from .stack import (
    StackModel,
    init_stack,
    stack_backward,
    stack_finetune,
    stack_forward,
    stack_loss,
    stack_pretrain,
    stack_train,
)
from ..errors import ShapeError

__all__ = [
    "NO_CORRUPTION", "AeParams", "CorruptionKind", "CorruptionSpec", "PhaseCounter",
    "TrainConfig", "TrainResult", "ae_backward", "ae_forward", "ae_loss", "ae_train",
    "corrupt", "dae_train", "init_ae", "IaeForward", "IaeModel", "iae_backward",
    "iae_forward", "iae_loss", "iae_train", "init_iae", "StackModel", "init_stack",
    "stack_backward", "stack_finetune", "stack_forward", "stack_loss", "stack_pretrain",
    "stack_train", "predict",
]


def predict(model, v, a=None):
    """Dense prediction of ``v`` for every cell.

    ``v`` is the zero-filled training matrix. The IAE also needs the
    auxiliary matrix ``a``; the other architectures reconstruct ``v`` alone.
    """
    if isinstance(model, IaeModel):
        if a is None:
            raise ShapeError("IAE prediction needs the auxiliary matrix")
        return iae_forward(model, v, a).v_hat
    if isinstance(model, StackModel):
        return stack_forward(model, v)
    if isinstance(model, AeParams):
        return ae_forward(model, v)[1]
    raise TypeError(f"cannot predict with {type(model).__name__}")
