#!/usr/bin/env python3
"""Repeat an entropy estimator over many seeds and report the success fraction.

Each run's report is appended as one JSON line to ``--jsonl`` when given.
"""
import argparse
import json
from pathlib import Path

import numpy as np

from samplizer_lab.ensembles import random_density_matrix
from samplizer_lab.estimators import estimate_purity_swap, estimate_renyi_alpha, estimate_von_neumann


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quantity", choices=["von-neumann", "renyi", "swap"], default="von-neumann")
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--N", type=int, default=4)
    ap.add_argument("--rank", type=int, default=2)
    ap.add_argument("--eps", type=float, default=0.5)
    ap.add_argument("--delta", type=float, default=0.25)
    ap.add_argument("--mode", default="ideal-sampled")
    ap.add_argument("--runs", type=int, default=40)
    ap.add_argument("--state-seed", type=int, default=1000)
    ap.add_argument("--jsonl", type=Path, default=None)
    args = ap.parse_args()
    hits = 0
    out = open(args.jsonl, "w") if args.jsonl else None
    for seed in range(args.runs):
        rho = random_density_matrix(args.N, args.rank, np.random.default_rng(args.state_seed + seed))
        if args.quantity == "von-neumann":
            rep = estimate_von_neumann(rho, args.eps, args.delta, args.mode, seed)
        elif args.quantity == "renyi":
            rep = estimate_renyi_alpha(rho, args.alpha, args.eps, args.delta, args.mode, seed)
        else:
            rep = estimate_purity_swap(rho, args.eps, args.delta, seed)
        hits += rep.abs_error <= args.eps
        if out:
            out.write(json.dumps(rep.to_dict(), sort_keys=True) + "\n")
    if out:
        out.close()
    print(f"{hits}/{args.runs} runs within eps={args.eps} (target success >= {1 - args.delta:.2f})")


if __name__ == "__main__":
    main()
