"""Sparse target matrices, auxiliary matrices and the train/test protocol."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, ParseError, ShapeError
from .numerics import DTYPE


@dataclass(frozen=True)
class MaskedMatrix:
    values: np.ndarray
    observed: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=DTYPE)
        observed = np.asarray(self.observed, dtype=bool)
        if values.ndim != 2 or values.shape != observed.shape:
            raise ShapeError(
                f"values {values.shape} and observed mask {observed.shape} must be equal 2-D shapes"
            )
        # unobserved cells hold exactly zero
        values = np.where(observed, values, 0.0)
        if not np.all(np.isfinite(values)):
            raise ParseError("observed values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "observed", observed)

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_observed(self) -> int:
        return int(self.observed.sum())


@dataclass
class RawData:
    """A sparse target plus auxiliary matrix, before splitting."""

    values: MaskedMatrix
    aux: Optional[np.ndarray] = None
    truth: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.aux is not None:
            self.aux = np.asarray(self.aux, dtype=DTYPE)
            if self.aux.ndim != 2 or self.aux.shape[0] != self.values.shape[0]:
                raise ShapeError(
                    f"aux {self.aux.shape} must be 2-D with {self.values.shape[0]} rows"
                )


@dataclass
class Dataset:
    v_train: MaskedMatrix
    v_test: MaskedMatrix
    aux: Optional[np.ndarray] = None
    truth: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.v_train.shape != self.v_test.shape:
            raise ShapeError(f"train {self.v_train.shape} and test {self.v_test.shape} differ")
        if np.any(self.v_train.observed & self.v_test.observed):
            raise ConfigError("train and test masks overlap")
        if self.aux is not None and self.aux.shape[0] != self.v_train.shape[0]:
            raise ShapeError(f"aux has {self.aux.shape[0]} rows, values have {self.v_train.shape[0]}")


@dataclass(frozen=True)
class SplitSpec:
    phi: float = 80.0
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.phi < 100:
            raise ConfigError(f"training ratio phi must lie strictly in (0, 100), got {self.phi}")


# --- CSV ---------------------------------------------------------------------


def _read_grid(path, header: bool, allow_empty: bool):
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        names = None
        for lineno, row in enumerate(reader, start=1):
            if header and names is None:
                names = row
                continue
            if not row:
                continue
            if rows and len(row) != len(rows[0][1]):
                raise ParseError(
                    f"{path}:{lineno}: expected {len(rows[0][1])} fields, got {len(row)}"
                )
            cells = []
            for col, cell in enumerate(row, start=1):
                cell = cell.strip()
                if not cell:
                    if not allow_empty:
                        raise ParseError(f"{path}:{lineno}: empty cell in column {col}")
                    cells.append(None)
                    continue
                try:
                    val = float(cell)
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: non-numeric cell {cell!r} in column {col}") from None
                if not np.isfinite(val):
                    raise ParseError(f"{path}:{lineno}: non-finite cell {cell!r} in column {col}")
                cells.append(val)
            rows.append((lineno, cells))
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return rows, names


def load_csv(values_path, aux_path=None, header: bool = False) -> RawData:
    """Read a sparse values grid (empty field = unobserved) and an optional dense aux grid."""
    rows, names = _read_grid(values_path, header, allow_empty=True)
    n_rows, n_cols = len(rows), len(rows[0][1])
    values = np.zeros((n_rows, n_cols), DTYPE)
    observed = np.zeros((n_rows, n_cols), bool)
    for i, (_, cells) in enumerate(rows):
        for j, c in enumerate(cells):
            if c is not None:
                values[i, j] = c
                observed[i, j] = True
    aux = None
    if aux_path is not None:
        arows, _ = _read_grid(aux_path, header, allow_empty=False)
        if len(arows) != n_rows:
            raise ParseError(
                f"{aux_path}:{arows[-1][0]}: aux has {len(arows)} rows, values have {n_rows}"
            )
        aux = np.array([cells for _, cells in arows], dtype=DTYPE)
    meta = {"columns": names} if names else {}
    return RawData(MaskedMatrix(values, observed), aux, meta=meta)


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _grid_text(values, observed=None, names=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if names:
        w.writerow(names)
    for i in range(values.shape[0]):
        w.writerow(
            repr(float(values[i, j])) if observed is None or observed[i, j] else ""
            for j in range(values.shape[1])
        )
    return buf.getvalue()


def save_csv(path, mm: MaskedMatrix, names=None) -> None:
    atomic_write_text(path, _grid_text(mm.values, mm.observed, names))


def save_dense_csv(path, grid: np.ndarray, names=None) -> None:
    atomic_write_text(path, _grid_text(np.asarray(grid, DTYPE), None, names))


# --- split -------------------------------------------------------------------


def split(mm: MaskedMatrix, spec: SplitSpec):
    """Shuffle the observed cells and send the first floor(phi% * N) to train."""
    n = mm.n_observed
    if n < 2:
        raise ConfigError(f"need at least 2 observed cells to split, got {n}")
    rows, cols = np.nonzero(mm.observed)
    order = np.random.default_rng(spec.seed).permutation(n)
    n_train = int(np.floor(spec.phi * n / 100.0))
    if n_train == 0 or n_train == n:
        raise ConfigError(f"phi={spec.phi} leaves an empty side when splitting {n} observed cells")
    train_mask = np.zeros(mm.shape, bool)
    test_mask = np.zeros(mm.shape, bool)
    tr = order[:n_train]
    te = order[n_train:]
    train_mask[rows[tr], cols[tr]] = True
    test_mask[rows[te], cols[te]] = True
    return MaskedMatrix(mm.values, train_mask), MaskedMatrix(mm.values, test_mask)


def build_dataset(raw: RawData, spec: SplitSpec) -> Dataset:
    train, test = split(raw.values, spec)
    meta = dict(raw.meta)
    meta["split"] = asdict(spec)
    return Dataset(train, test, raw.aux, raw.truth, meta)


# --- synthetic data ----------------------------------------------------------


@dataclass(frozen=True)
class SynthParams:
    m: int = 200
    n: int = 50
    rank: int = 5
    density: float = 0.2
    noise_sd: float = 0.1
    aux_informativeness: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ConfigError(f"m and n must be positive, got {self.m}, {self.n}")
        if not 1 <= self.rank <= min(self.m, self.n):
            raise ConfigError(f"rank must lie in [1, min(m, n)], got {self.rank}")
        if not 0 < self.density <= 1:
            raise ConfigError(f"density must lie in (0, 1], got {self.density}")
        if not (np.isfinite(self.noise_sd) and self.noise_sd >= 0):
            raise ConfigError(f"noise_sd must be >= 0, got {self.noise_sd}")
        if not 0 <= self.aux_informativeness <= 1:
            raise ConfigError(
                f"aux_informativeness must lie in [0, 1], got {self.aux_informativeness}"
            )


def _rescale01(x: np.ndarray) -> np.ndarray:
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


def synth_generate(params: SynthParams) -> RawData:
    """Low-rank target with noisy partial observations and a row-similarity aux matrix.

    Truth is ``L R^T``. The aux matrix blends the min-max rescaled ``L L^T``
    with uniform noise according to ``aux_informativeness``. Each random
    ingredient has its own stream, so changing the informativeness leaves the
    target and its mask untouched.
    """
    p = params
    s_left, s_right, s_obs, s_aux = np.random.SeedSequence(p.seed).spawn(4)
    L = np.random.default_rng(s_left).standard_normal((p.m, p.rank))
    R = np.random.default_rng(s_right).standard_normal((p.n, p.rank))
    truth = L @ R.T

    rng_obs = np.random.default_rng(s_obs)
    n_cells = p.m * p.n
    n_obs = max(1, int(round(p.density * n_cells)))
    picked = rng_obs.permutation(n_cells)[:n_obs]
    observed = np.zeros(n_cells, bool)
    observed[picked] = True
    observed = observed.reshape(p.m, p.n)
    noisy = truth + rng_obs.normal(0.0, 1.0, size=truth.shape) * p.noise_sd

    similarity = _rescale01(L @ L.T)
    noise = np.random.default_rng(s_aux).random((p.m, p.m))
    w = p.aux_informativeness
    aux = w * similarity + (1.0 - w) * noise
    return RawData(MaskedMatrix(noisy, observed), aux, truth, meta={"synthetic": asdict(p)})


def write_manifest(path, params: SynthParams) -> None:
    atomic_write_text(path, json.dumps(asdict(params), indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> SynthParams:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}: {exc.msg}") from None
    try:
        return SynthParams(**raw)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


# --- normalisation -----------------------------------------------------------

SCHEMES = ("none", "minmax", "zscore")


@dataclass(frozen=True)
class Normalizer:
    scheme: str = "none"
    shift: float = 0.0
    scale: float = 1.0

    def transform(self, x):
        return (np.asarray(x, DTYPE) - self.shift) / self.scale

    def inverse(self, x):
        return np.asarray(x, DTYPE) * self.scale + self.shift

    def apply(self, mm: MaskedMatrix) -> MaskedMatrix:
        return MaskedMatrix(self.transform(mm.values), mm.observed)


def fit_normalizer(train: MaskedMatrix, scheme: str = "zscore") -> Normalizer:
    """Statistics come from the observed training cells only."""
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown normalisation scheme {scheme!r}; choose from {SCHEMES}")
    if scheme == "none":
        return Normalizer()
    vals = train.values[train.observed]
    if vals.size == 0:
        raise ConfigError("cannot normalise without observed training cells")
    if scheme == "minmax":
        lo, hi = float(vals.min()), float(vals.max())
        if hi == lo:
            raise ConfigError("minmax normalisation needs at least two distinct training values")
        return Normalizer("minmax", lo, hi - lo)
    sd = float(vals.std())
    if sd == 0:
        raise ConfigError("zscore normalisation needs nonzero training variance")
    return Normalizer("zscore", float(vals.mean()), sd)


@dataclass(frozen=True)
class AuxScaler:
    """Column-wise standardisation of the (fully observed) auxiliary matrix."""

    mean: Optional[np.ndarray] = None
    sd: Optional[np.ndarray] = None

    def transform(self, aux):
        if aux is None or self.mean is None:
            return aux
        if aux.shape[1] != self.mean.shape[0]:
            raise ShapeError(f"aux has {aux.shape[1]} columns, scaler expects {self.mean.shape[0]}")
        return (aux - self.mean) / self.sd


def fit_aux_scaler(aux, scheme: str = "zscore") -> AuxScaler:
    if scheme not in ("none", "zscore"):
        raise ConfigError(f"unknown aux normalisation {scheme!r}; choose none or zscore")
    if aux is None or scheme == "none":
        return AuxScaler()
    sd = aux.std(axis=0)
    # constant columns are only centred
    sd = np.where(sd > 0, sd, 1.0)
    return AuxScaler(aux.mean(axis=0), sd)


def normalize(ds: Dataset, scheme: str = "zscore", aux_scheme: str = "none"):
    """Return ``(normalised_dataset, normalizer, aux_scaler)``.

    Target statistics come from observed training cells only; test cells
    never feed them. The aux matrix is dense and carries no test cells.
    """
    norm = fit_normalizer(ds.v_train, scheme)
    scaler = fit_aux_scaler(ds.aux, aux_scheme)
    out = replace(
        ds,
        v_train=norm.apply(ds.v_train),
        v_test=norm.apply(ds.v_test),
        aux=scaler.transform(ds.aux),
    )
    return out, norm, scaler
