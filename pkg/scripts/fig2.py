"""Scheduled power sweep (fig2 preset) with the equal-vs-optimal FDMA gap.

    python scripts/fig2.py --out results/fig2 --trials 2000
"""

import argparse
import csv
from dataclasses import replace
from pathlib import Path

from m2maccess.cli import TITLES, run_config
from m2maccess.config import FIG2

ap = argparse.ArgumentParser()
ap.add_argument("--out", default="results/fig2")
ap.add_argument("--trials", type=int, default=FIG2.n_trials)
ap.add_argument("--seed", type=int, default=FIG2.seed)
args = ap.parse_args()

cfg = replace(FIG2, n_trials=args.trials, seed=args.seed)
paths = run_config(cfg, Path(args.out), "fig2", TITLES["fig2"])
with open(paths[0], newline="") as fh:
    dbm = {(r["strategy"], float(r["lambda_per_s"])): float(r["p95_tx_power_dbm"]) for r in csv.DictReader(fh)}

print(f"{'lambda':>8} {'sic':>8} {'fdma_opt':>9} {'fdma_eq':>8} {'gap dB':>7}")
for lam in cfg.lambda_grid:
    sic, opt, eq = (dbm[k, lam] for k in ("sic", "fdma_opt", "fdma_equal"))
    print(f"{lam:8g} {sic:8.2f} {opt:9.2f} {eq:8.2f} {eq - opt:7.3f}")
