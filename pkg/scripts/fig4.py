"""Maximum arrival rate against payload for one-stage and two-stage access
(fig4 preset). The full preset takes a few minutes on one core.

    python scripts/fig4.py --out results/fig4
"""

import argparse
import csv
from dataclasses import replace
from pathlib import Path

from m2maccess.cli import TITLES, run_config
from m2maccess.config import FIG4

ap = argparse.ArgumentParser()
ap.add_argument("--out", default="results/fig4")
ap.add_argument("--trials", type=int, default=FIG4.n_trials)
ap.add_argument("--seed", type=int, default=FIG4.seed)
args = ap.parse_args()

cfg = replace(FIG4, n_trials=args.trials, seed=args.seed)
paths = run_config(cfg, Path(args.out), "fig4", TITLES["fig4"])

table: dict = {}
with open(paths[0], newline="") as fh:
    for row in csv.DictReader(fh):
        table.setdefault(float(row["payload_bits"]), {})[row["strategy"]] = float(row["max_arrival_per_s"])

print(f"{'payload':>8} " + " ".join(f"{k:>18}" for k in next(iter(table.values()))))
for payload, row in table.items():
    print(f"{payload:8g} " + " ".join(f"{v:18.2f}" for v in row.values()))
    ratio = row["one_stage_optimal"] / row["two_stage"] if row["two_stage"] > 0 else float("inf")
    print(f"{'':8} one-stage optimal / two-stage = {ratio:.2f}")
