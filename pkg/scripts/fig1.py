"""Random-access power sweep (fig1 preset) with a summary of the F-TDMA
penalty and the CDMA advantage below its pole.

    python scripts/fig1.py --out results/fig1 --trials 5000
"""

import argparse
import csv
from dataclasses import replace
from pathlib import Path

from m2maccess.cli import TITLES, run_config
from m2maccess.config import FIG1

ap = argparse.ArgumentParser()
ap.add_argument("--out", default="results/fig1")
ap.add_argument("--trials", type=int, default=FIG1.n_trials)
ap.add_argument("--seed", type=int, default=FIG1.seed)
args = ap.parse_args()

cfg = replace(FIG1, n_trials=args.trials, seed=args.seed)
paths = run_config(cfg, Path(args.out), "fig1", TITLES["fig1"])
with open(paths[0], newline="") as fh:
    rows = {(r["strategy"], float(r["lambda_per_s"])): r for r in csv.DictReader(fh)}
dbm = lambda s, lam: float(rows[s, lam]["p95_tx_power_dbm"])

fdma, q1, q10 = (dbm(s, 100.0) for s in ("fdma", "ftdma_1khz", "ftdma_10khz"))
print(f"at 100/s: FTDMA 1 kHz is {q1 - fdma:+.2f} dB over FDMA, 10 kHz is {q10 - q1:+.2f} dB over 1 kHz")
for lam in cfg.lambda_grid:
    best_ftdma = min(dbm(s, lam) for s in ("ftdma_1khz", "ftdma_10khz"))
    outage = float(rows["cdma", lam]["outage"])
    print(f"lambda {lam:6g}: CDMA {dbm('cdma', lam):6.2f} dBm, best FTDMA {best_ftdma:6.2f} dBm, CDMA outage {outage:.3f}")
