"""Sweep learning rate, lambda and corruption to see where the IAE ranks.

For every grid point the five algorithms run on the same seeds and the median
final test RMSE is reported, together with the IAE's rank (1 = best) and its
median with a pure-noise auxiliary matrix. This is a diagnostic for how
sensitive the ordering is to settings the parameter table leaves open.

    python scripts/sweep_ranking.py --lr 0.001 0.01 --lam 0.01 1 10
"""

import argparse
import itertools
import time

import numpy as np

from iaefilter.benchmark import fit_and_evaluate
from iaefilter.config import ALGORITHMS, RunConfig
from iaefilter.data import SplitSpec, SynthParams, build_dataset, synth_generate


def datasets(seeds, informativeness):
    return {
        s: build_dataset(synth_generate(SynthParams(aux_informativeness=informativeness, seed=s)), SplitSpec(80, s))
        for s in seeds
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--lr", type=float, nargs="+", default=[0.001, 0.005, 0.01])
    ap.add_argument("--lam", type=float, nargs="+", default=[0.01])
    ap.add_argument("--corruption", nargs="+", default=["masking:0.2"], help="kind:level pairs")
    ap.add_argument("--aux-normalize", nargs="+", default=["zscore"])
    ap.add_argument("--epochs", type=int, default=100)
    args = ap.parse_args()

    informative = datasets(args.seeds, 1.0)
    noise = datasets(args.seeds, 0.0)
    header = ["lr", "lam", "corruption", "aux_norm", *ALGORITHMS, "iae@noise", "iae_rank"]
    print("  ".join(f"{h:>10}" for h in header), flush=True)
    for lr, lam, corr, aux_norm in itertools.product(args.lr, args.lam, args.corruption, args.aux_normalize):
        kind, _, level = corr.partition(":")
        t0 = time.perf_counter()
        med = {}
        for alg in ALGORITHMS:
            vals = []
            for s in args.seeds:
                cfg = RunConfig(
                    seed=s, lr=lr, lam=lam, corruption=kind, corruption_level=float(level or 0),
                    aux_normalize=aux_norm, epochs=args.epochs,
                )
                vals.append(fit_and_evaluate(alg, informative[s], cfg).report.final_rmse)
            med[alg] = float(np.median(vals))
        noise_vals = [
            fit_and_evaluate(
                "iae", noise[s],
                RunConfig(seed=s, lr=lr, lam=lam, aux_normalize=aux_norm, epochs=args.epochs),
            ).report.final_rmse
            for s in args.seeds
        ]
        rank = 1 + sum(med[a] < med["iae"] for a in ALGORITHMS if a != "iae")
        cells = [lr, lam, corr, aux_norm, *(f"{med[a]:.4f}" for a in ALGORITHMS), f"{np.median(noise_vals):.4f}", rank]
        print("  ".join(f"{c:>10}" for c in cells), f"({time.perf_counter() - t0:.0f} s)", flush=True)


if __name__ == "__main__":
    main()
