"""Multi-seed comparison of the five architectures on synthetic data.

Prints the per-seed final test RMSE and the median per algorithm, and writes
the raw rows to ``--out`` as CSV. Any RunConfig key can be overridden with
``--set key=value``.

    python scripts/run_comparison.py --seeds 0 1 2 3 4 --out results/comparison.csv
"""

import argparse
import csv
import json
import time
from pathlib import Path

import numpy as np

from iaefilter.benchmark import run_benchmark
from iaefilter.config import make_config
from iaefilter.data import SplitSpec, build_dataset, synth_generate


def parse_sets(items):
    out = {}
    for item in items:
        key, _, raw = item.partition("=")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--set", dest="sets", action="append", default=[], metavar="KEY=VALUE")
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    overrides = parse_sets(args.sets)
    rows = []
    t0 = time.perf_counter()
    for seed in args.seeds:
        cfg = make_config(overrides, {"seed": seed})
        ds = build_dataset(synth_generate(cfg.synth_params()), SplitSpec(cfg.phi, seed))
        for r in run_benchmark(ds, cfg.algorithms, cfg, "vbar"):
            rows.append(r)
            print(f"seed {seed} {r.algorithm:>5}: rmse {r.final_rmse:.4f}  A_t {r.avg_epoch_time * 1e3:.2f} ms")

    print(f"\nmedian over {len(args.seeds)} seeds ({time.perf_counter() - t0:.0f} s):")
    for alg in make_config(overrides).algorithms:
        vals = [r.final_rmse for r in rows if r.algorithm == alg]
        times = [r.avg_epoch_time for r in rows if r.algorithm == alg]
        print(f"  {alg:>5}  rmse {np.median(vals):.4f}  A_t {np.median(times) * 1e3:.2f} ms")

    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with args.out.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["algorithm", "seed", "rmse", "total_time_s", "avg_epoch_time_s"])
            for r in rows:
                w.writerow([r.algorithm, r.seed, r.final_rmse, r.total_time, r.avg_epoch_time])


if __name__ == "__main__":
    main()
