"""Flat run configuration shared by the CLI and the benchmark harness.

Defaults for lambda, phi, epochs and the two hidden widths follow the
published parameter table; everything else is a local choice.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from .data import SCHEMES, SynthParams
from .errors import ConfigError, ParseError
from .model import CorruptionSpec, TrainConfig
from .numerics import Activation, AdamSettings

ALGORITHMS = ("ae", "dae", "sae", "sdae", "iae")

HELP = {
    "algorithms": "algorithms to run (subset of ae, dae, sae, sdae, iae)",
    "hidden1": "neurons in the first hidden layer (clamped to the input width)",
    "hidden2": "neurons in the second hidden layer (clamped to the input width)",
    "lam": "L2 weight on the second IAE autoencoder's weight grids",
    "phi": "percentage of observed cells used for training",
    "epochs": "training epochs (fine-tuning epochs for stacked models)",
    "pretrain_epochs": "layer-wise epochs for stacked models (default: epochs)",
    "enc_act": "encoder activation",
    "dec_act": "decoder activation",
    "corruption": "input corruption for dae/sdae",
    "corruption_level": "masking probability or Gaussian noise sd",
    "lr": "Adam learning rate",
    "beta1": "Adam first-moment decay",
    "beta2": "Adam second-moment decay",
    "epsilon": "Adam epsilon",
    "l2": "optional L2 weight for the baselines",
    "dense_v_loss": "score the IAE on every V cell instead of observed cells only",
    "normalize": "value scaling fitted on training cells",
    "aux_normalize": "column scaling of the auxiliary matrix (none or zscore)",
    "seed": "seed for initialisation, corruption and splitting",
    "header": "value/aux CSV files carry a header row",
    "m": "synthetic rows",
    "n": "synthetic columns",
    "rank": "synthetic rank",
    "density": "synthetic observed fraction",
    "noise_sd": "synthetic observation noise sd",
    "aux_informativeness": "synthetic aux blend: 1 = row similarity, 0 = noise",
    "n_jobs": "algorithms trained in parallel by the benchmark",
}


@dataclass
class RunConfig:
    algorithms: list = field(default_factory=lambda: list(ALGORITHMS))
    hidden1: int = 1000
    hidden2: int = 3000
    lam: float = 0.01
    phi: float = 80.0
    epochs: int = 100
    pretrain_epochs: Optional[int] = None
    enc_act: str = "sigmoid"
    dec_act: str = "identity"
    corruption: str = "masking"
    corruption_level: float = 0.2
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    l2: float = 0.0
    dense_v_loss: bool = False
    normalize: str = "zscore"
    aux_normalize: str = "zscore"
    seed: int = 0
    header: bool = False
    m: int = 200
    n: int = 50
    rank: int = 5
    density: float = 0.2
    noise_sd: float = 0.1
    aux_informativeness: float = 1.0
    n_jobs: int = 1

    def __post_init__(self):
        if isinstance(self.algorithms, str):
            self.algorithms = [a.strip() for a in self.algorithms.split(",") if a.strip()]
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ConfigError(f"unknown algorithm(s) {unknown}; choose from {list(ALGORITHMS)}")
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        if self.hidden1 < 1 or self.hidden2 < 1:
            raise ConfigError("hidden sizes must be positive")
        if self.lam < 0:
            raise ConfigError(f"lam must be nonnegative, got {self.lam}")
        if self.normalize not in SCHEMES:
            raise ConfigError(f"normalize must be one of {SCHEMES}")
        if self.aux_normalize not in ("none", "zscore"):
            raise ConfigError("aux_normalize must be none or zscore")
        if self.n_jobs < 1:
            raise ConfigError("n_jobs must be >= 1")
        for act in (self.enc_act, self.dec_act):
            try:
                Activation(act)
            except ValueError:
                raise ConfigError(f"unknown activation {act!r}") from None
        # validate eagerly so bad values fail before any work starts
        self.corruption_spec()
        self.train_config()

    def corruption_spec(self) -> CorruptionSpec:
        try:
            return CorruptionSpec(self.corruption, self.corruption_level)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def train_config(self) -> TrainConfig:
        adam = AdamSettings(self.lr, self.beta1, self.beta2, self.epsilon)
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1) or self.lr <= 0 or self.epsilon <= 0:
            raise ConfigError("invalid Adam settings")
        return TrainConfig(self.epochs, self.pretrain_epochs, adam, self.seed, self.l2)

    def synth_params(self) -> SynthParams:
        return SynthParams(
            self.m, self.n, self.rank, self.density, self.noise_sd, self.aux_informativeness, self.seed
        )

    def to_dict(self) -> dict:
        return asdict(self)


FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def load_config_file(path) -> dict:
    """Read a flat JSON object of RunConfig keys."""
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a flat JSON object")
    unknown = sorted(set(raw) - set(FIELD_TYPES))
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {unknown}")
    return raw


def make_config(file_values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Layer built-in defaults < config file < explicit overrides."""
    merged = dict(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
