"""Command-line entry point: ``iaefilter {generate,train,benchmark,predict}``.

Settings are layered: built-in defaults, then a JSON config file
(``--config``), then explicit flags. Exit codes: 0 success, 1 usage or config
error, 2 data or parse error, 3 non-finite training loss.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import fit_and_evaluate, run_benchmark, table_text, trace_text, write_outputs
from .config import ALGORITHMS, HELP, RunConfig, load_config_file, make_config
from .data import (
    AuxScaler,
    Normalizer,
    SplitSpec,
    atomic_write_text,
    build_dataset,
    load_csv,
    read_manifest,
    save_csv,
    save_dense_csv,
    synth_generate,
    write_manifest,
)
from .errors import ConfigError, IaeError, ShapeError
from .model import predict
from .persist import load_model, save_model

log = logging.getLogger("iaefilter")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; usage errors here are exit code 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


_DEFAULTS = RunConfig()


def _add_config_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration (flags override --config)")
    g.add_argument("--config", type=Path, help="flat JSON file of configuration keys")
    for f in fields(RunConfig):
        default = getattr(_DEFAULTS, f.name)
        flag = "--" + f.name.replace("_", "-")
        shown = ",".join(default) if isinstance(default, list) else default
        help_text = f"{HELP[f.name]} (default: {shown})"
        if isinstance(default, bool):
            g.add_argument(flag, dest=f.name, action=argparse.BooleanOptionalAction, default=None, help=help_text)
        elif f.name == "algorithms":
            g.add_argument(flag, dest=f.name, default=None, help=help_text)
        elif f.name == "pretrain_epochs":
            g.add_argument(flag, dest=f.name, type=int, default=None, help=help_text)
        else:
            g.add_argument(flag, dest=f.name, type=type(default), default=None, help=help_text)


def _config_from(args) -> RunConfig:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig)}
    return make_config(file_values, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="iaefilter", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a synthetic sparse dataset")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--manifest", type=Path, help="regenerate from an existing manifest")
    _add_config_args(p)

    p = sub.add_parser("train", help="train one algorithm and save the model")
    p.add_argument("--values", type=Path, required=True, help="sparse values CSV")
    p.add_argument("--aux", type=Path, help="auxiliary CSV (required for iae)")
    p.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    p.add_argument("--out-dir", type=Path, required=True)
    _add_config_args(p)

    p = sub.add_parser("benchmark", help="compare algorithms on one or two targets")
    p.add_argument("--values", type=Path, nargs="+", required=True, help="one CSV per target")
    p.add_argument("--targets", help="comma-separated target names (default: vbar,sdv)")
    p.add_argument("--aux", type=Path)
    p.add_argument("--seeds", help="comma-separated seeds for a multi-seed run")
    p.add_argument("--out-dir", type=Path, required=True)
    _add_config_args(p)

    p = sub.add_parser("predict", help="write dense predictions from a saved model")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--values", type=Path, required=True, help="sparse values CSV fed as input")
    p.add_argument("--aux", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--header", action=argparse.BooleanOptionalAction, default=False)
    return parser


# --- commands ----------------------------------------------------------------


def cmd_generate(args) -> int:
    if args.manifest:
        params = read_manifest(args.manifest)
    else:
        params = _config_from(args).synth_params()
    raw = synth_generate(params)
    out = args.out_dir
    save_csv(out / "values.csv", raw.values)
    save_dense_csv(out / "aux.csv", raw.aux)
    save_dense_csv(out / "truth.csv", raw.truth)
    write_manifest(out / "manifest.json", params)
    log.info("wrote %s x %s values and %s aux to %s", *raw.values.shape, raw.aux.shape, out)
    return 0


def _load(values, aux, cfg):
    return load_csv(values, aux, header=cfg.header)


def cmd_train(args) -> int:
    cfg = _config_from(args)
    if args.algorithm == "iae" and args.aux is None:
        raise ConfigError("--aux is required for iae")
    raw = _load(args.values, args.aux, cfg)
    ds = build_dataset(raw, SplitSpec(cfg.phi, cfg.seed))
    fit = fit_and_evaluate(args.algorithm, ds, cfg)
    report = fit.report

    out = args.out_dir
    meta = {
        "algorithm": args.algorithm,
        "config": cfg.to_dict(),
        "normalizer": {"scheme": fit.normalizer.scheme, "shift": fit.normalizer.shift, "scale": fit.normalizer.scale},
        "aux_scaler": None
        if fit.aux_scaler.mean is None
        else {"mean": fit.aux_scaler.mean.tolist(), "sd": fit.aux_scaler.sd.tolist()},
        "values_shape": list(ds.v_train.shape),
    }
    save_model(out / "model.zip", fit.model, meta)
    atomic_write_text(out / f"trace_{args.algorithm}_v.csv", trace_text(report))
    atomic_write_text(out / "comparison.csv", table_text([report]))
    summary = {
        "algorithm": report.algorithm,
        "final_rmse": report.final_rmse,
        "total_time_s": report.total_time,
        "avg_epoch_time_s": report.avg_epoch_time,
        "phases": report.phases,
        "seed": report.seed,
        "config": report.config,
    }
    atomic_write_text(out / "report.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"{args.algorithm}: test RMSE {report.final_rmse:.6g}, A_t {report.avg_epoch_time:.4g} s")
    return 0


def cmd_benchmark(args) -> int:
    cfg = _config_from(args)
    names = args.targets.split(",") if args.targets else ["vbar", "sdv"][: len(args.values)]
    if len(names) != len(args.values):
        raise ConfigError(f"{len(args.values)} value files but {len(names)} target names")
    if "iae" in cfg.algorithms and args.aux is None:
        raise ConfigError("--aux is required when iae is benchmarked")
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [cfg.seed]

    reports = []
    for target, path in zip(names, args.values):
        raw = _load(path, args.aux, cfg)
        for seed in seeds:
            run_cfg = make_config(cfg.to_dict(), {"seed": seed})
            ds = build_dataset(raw, SplitSpec(run_cfg.phi, seed))
            reports.extend(run_benchmark(ds, run_cfg.algorithms, run_cfg, target))

    if len(seeds) > 1:
        # multi-seed mode: raw rows only, traces keyed by seed
        atomic_write_text(args.out_dir / "comparison.csv", table_text(reports))
        for r in reports:
            if r.ok:
                atomic_write_text(args.out_dir / f"trace_{r.algorithm}_{r.target}_seed{r.seed}.csv", trace_text(r))
        atomic_write_text(
            args.out_dir / "metadata.json", json.dumps({"config": cfg.to_dict(), "seeds": seeds}, indent=2) + "\n"
        )
    else:
        write_outputs(args.out_dir, reports, cfg, {"targets": names, "values": [str(p) for p in args.values]})

    for r in reports:
        status = f"rmse {r.final_rmse:.6g}  A_t {r.avg_epoch_time:.4g} s" if r.ok else f"FAILED {r.error}"
        print(f"{r.target:>6} {r.algorithm:>5} seed {r.seed}: {status}")
    if not any(r.ok for r in reports):
        print("all algorithms failed", file=sys.stderr)
        return 2
    return 0


def cmd_predict(args) -> int:
    model, meta = load_model(args.model)
    raw = load_csv(args.values, args.aux, header=args.header)
    expected = tuple(meta.get("values_shape", ()))
    if expected and raw.values.shape != expected:
        raise ShapeError(f"values shape {raw.values.shape} does not match model's {expected}")
    nm = meta["normalizer"]
    norm = Normalizer(nm["scheme"], nm["shift"], nm["scale"])
    v = norm.apply(raw.values).values
    aux = raw.aux
    if meta.get("aux_scaler") and aux is not None:
        sc = meta["aux_scaler"]
        aux = AuxScaler(np.array(sc["mean"]), np.array(sc["sd"])).transform(aux)
    pred = norm.inverse(predict(model, v, aux))
    save_dense_csv(args.out, pred)
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "benchmark": cmd_benchmark,
    "predict": cmd_predict,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except IaeError as exc:
        print(f"iaefilter {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"iaefilter {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
