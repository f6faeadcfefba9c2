"""Train the five architectures on one dataset and compare test RMSE and epoch time.

Per-epoch test RMSE is measured with the clock paused, so ``total_time``
covers training work only. For the stacked models it includes layer-wise
pre-training, which is where their extra objectives cost time.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .data import AuxScaler, Dataset, Normalizer, atomic_write_text, normalize
from .errors import ConfigError
from .metrics import EvalReport, avg_epoch_time, rmse
from .model import (
    NO_CORRUPTION,
    PhaseCounter,
    dae_train,
    iae_train,
    init_ae,
    init_iae,
    init_stack,
    predict,
    stack_train,
)

log = logging.getLogger(__name__)

TABLE_COLUMNS = ("algorithm", "target", "rmse", "total_time_s", "avg_epoch_time_s", "seed")
TRACE_COLUMNS = ("epoch", "train_loss", "test_rmse")


def clamp_width(configured: int, input_width: int, what: str) -> int:
    if configured > input_width:
        log.info("clamping %s from %d to input width %d", what, configured, input_width)
        return input_width
    return configured


def build_model(name: str, ds: Dataset, cfg: RunConfig):
    """Fresh, seeded initial parameters for algorithm ``name`` on ``ds``."""
    rng = np.random.default_rng(cfg.seed)
    n = ds.v_train.shape[1]
    acts = {"enc_act": cfg.enc_act, "dec_act": cfg.dec_act}
    if name in ("ae", "dae"):
        return init_ae(n, clamp_width(cfg.hidden1, n, "hidden1"), rng, **acts)
    if name in ("sae", "sdae"):
        h1 = clamp_width(cfg.hidden1, n, "hidden1")
        h2 = clamp_width(cfg.hidden2, h1, "hidden2")
        return init_stack(n, [h1, h2], rng, **acts)
    if name == "iae":
        if ds.aux is None:
            raise ConfigError("iae needs an auxiliary matrix")
        p = ds.aux.shape[1]
        h1 = clamp_width(cfg.hidden1, p, "hidden1")
        h2 = clamp_width(cfg.hidden2, n + p, "hidden2")
        return init_iae(n, p, h1, h2, rng, cfg.lam, dense_v_loss=cfg.dense_v_loss, **acts)
    raise ConfigError(f"unknown algorithm {name!r}")


def train_model(name, model, ds: Dataset, cfg: RunConfig, counter=None, on_epoch=None):
    tc = cfg.train_config()
    x, mask = ds.v_train.values, ds.v_train.observed
    spec = cfg.corruption_spec() if name in ("dae", "sdae") else NO_CORRUPTION
    if name in ("ae", "dae"):
        return dae_train(model, x, mask, spec, tc, counter, on_epoch)
    if name in ("sae", "sdae"):
        return stack_train(model, x, mask, spec, tc, counter, on_epoch)
    return iae_train(model, x, ds.aux, mask, tc, counter, on_epoch)


def predict_original_units(model, ds: Dataset, norm: Normalizer) -> np.ndarray:
    return norm.inverse(predict(model, ds.v_train.values, ds.aux))


@dataclass
class FitResult:
    model: object
    normalizer: Normalizer
    aux_scaler: AuxScaler
    report: EvalReport


def fit_and_evaluate(name: str, raw_ds: Dataset, cfg: RunConfig, target: str = "v") -> FitResult:
    """Normalise, train, and evaluate one algorithm on ``raw_ds``."""
    ds, norm, scaler = normalize(raw_ds, cfg.normalize, cfg.aux_normalize)
    test = raw_ds.v_test
    model = build_model(name, ds, cfg)
    counter = PhaseCounter()
    rmse_trace = []
    paused = 0.0

    def on_epoch(_epoch, current, _loss):
        nonlocal paused
        t0 = time.perf_counter()
        rmse_trace.append(rmse(predict_original_units(current, ds, norm), test))
        paused += time.perf_counter() - t0

    start = time.perf_counter()
    result = train_model(name, model, ds, cfg, counter, on_epoch)
    total = time.perf_counter() - start - paused

    report = EvalReport(
        algorithm=name,
        target=target,
        final_rmse=rmse_trace[-1],
        rmse_trace=rmse_trace,
        loss_trace=list(result.loss_trace),
        total_time=total,
        avg_epoch_time=avg_epoch_time(total, cfg.epochs),
        phases=counter.phases,
        seed=cfg.seed,
        config=cfg.to_dict(),
    )
    return FitResult(result.model, norm, scaler, report)


def _run_one(name, ds, cfg, target):
    try:
        return fit_and_evaluate(name, ds, cfg, target).report
    except Exception as exc:  # one failing algorithm must not stop the others
        log.error("%s on %s failed: %s", name, target, exc)
        return EvalReport(
            algorithm=name,
            target=target,
            seed=cfg.seed,
            config=cfg.to_dict(),
            error=f"{type(exc).__name__}: {exc}",
        )


def run_benchmark(ds: Dataset, algorithms, cfg: RunConfig, target: str = "v") -> list:
    if not algorithms:
        raise ConfigError("run_benchmark needs at least one algorithm")
    if cfg.n_jobs == 1:
        return [_run_one(a, ds, cfg, target) for a in algorithms]
    with ThreadPoolExecutor(max_workers=cfg.n_jobs) as pool:
        return list(pool.map(lambda a: _run_one(a, ds, cfg, target), algorithms))


# --- output files ------------------------------------------------------------


def table_text(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for r in reports:
        w.writerow([r.algorithm, r.target, repr(r.final_rmse), repr(r.total_time), repr(r.avg_epoch_time), r.seed])
    return buf.getvalue()


def read_table(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def trace_text(report: EvalReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for i, (loss, err) in enumerate(zip(report.loss_trace, report.rmse_trace), start=1):
        w.writerow([i, repr(loss), repr(err)])
    return buf.getvalue()


def write_outputs(out_dir, reports, cfg: RunConfig, extra_meta: dict | None = None) -> dict:
    """Write the comparison table, one trace per (algorithm, target), and metadata."""
    out_dir = Path(out_dir)
    paths = {"table": out_dir / "comparison.csv", "metadata": out_dir / "metadata.json", "traces": []}
    atomic_write_text(paths["table"], table_text(reports))
    for r in reports:
        if r.ok:
            p = out_dir / f"trace_{r.algorithm}_{r.target}.csv"
            atomic_write_text(p, trace_text(r))
            paths["traces"].append(p)
    meta = {
        "config": cfg.to_dict(),
        "runs": [
            {"algorithm": r.algorithm, "target": r.target, "phases": r.phases, "error": r.error}
            for r in reports
        ],
        **(extra_meta or {}),
    }
    atomic_write_text(paths["metadata"], json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return paths
