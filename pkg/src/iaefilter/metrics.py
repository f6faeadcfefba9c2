"""Test-set error and timing metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import MaskedMatrix
from .errors import EvaluationError, ShapeError


def rmse(pred: np.ndarray, truth: MaskedMatrix) -> float:
    """Root mean squared error over the observed cells of ``truth``."""
    pred = np.asarray(pred, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ShapeError(f"prediction {pred.shape} and truth {truth.shape} differ")
    n = truth.n_observed
    if n == 0:
        raise EvaluationError("RMSE is undefined on an empty test set")
    diff = truth.values[truth.observed] - pred[truth.observed]
    return math.sqrt(float(np.dot(diff, diff)) / n)


def avg_epoch_time(total_time: float, n_epochs: int) -> float:
    if n_epochs < 1:
        raise EvaluationError(f"average epoch time needs at least one epoch, got {n_epochs}")
    return total_time / n_epochs


@dataclass
class EvalReport:
    algorithm: str
    target: str = "v"
    final_rmse: float = math.nan
    rmse_trace: list = field(default_factory=list)
    loss_trace: list = field(default_factory=list)
    total_time: float = 0.0
    avg_epoch_time: float = 0.0
    phases: int = 0
    seed: int = 0
    config: dict = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None
