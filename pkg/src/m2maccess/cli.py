"""Command-line front end.

    m2maccess figure fig1 --out results --trials 2000
    m2maccess sweep my.cfg --out results
    m2maccess validate --level fast

Exit status: 0 success, 1 validation failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path

from . import __version__
from . import protocol as pr
from . import report
from . import simengine as se
from .config import PRESETS, ConfigError, RunConfig, apply_overrides, echo, load_config

TITLES = {
    "fig1": "RACH strategies, 100 kHz, 1 s, 500-bit payload",
    "fig2": "Scheduled strategies, 100 kHz, 1 s, 500-bit payload",
    "fig4": "One-stage vs two-stage access, 10 kHz, 1 s",
}


def _json_default(x):
    if hasattr(x, "item"):
        return x.item()
    raise TypeError(f"cannot serialise {type(x).__name__}")


def run_config(cfg: RunConfig, out_dir: Path, stem: str, title: str = "") -> list:
    """Run ``cfg`` and write ``stem``.csv/.svg/.config/.meta.json; returns the paths."""
    out_dir = Path(out_dir)
    paths = [out_dir / f"{stem}.{ext}" for ext in ("csv", "svg", "config", "meta.json")]
    meta = {"version": __version__, "mode": cfg.mode}
    if cfg.mode == "power_sweep":
        result = se.run_sweep(cfg.sweep_spec(), workers=cfg.workers)
        report.write_text(paths[0], report.sweep_csv(result))
        report.sweep_svg(result, paths[1], title)
        meta["resolved"] = result.config_echo
        meta["points"] = [asdict(p) for p in result.points]
    else:
        strategies = cfg.strategy_specs()
        curves = pr.protocol_curves(cfg.payload_grid, strategies, cfg.env(), cfg.slice(), cfg.overhead(),
                                    cfg.search(), cfg.rach())
        report.write_text(paths[0], report.curve_csv(curves))
        report.curve_svg(curves, paths[1], title)
        meta["overhead"] = asdict(cfg.overhead())
        meta["search"] = asdict(cfg.search())
        meta["dl_cap_per_s"] = cfg.overhead().dl_cap
    report.write_text(paths[2], echo(cfg))
    report.write_text(paths[3], json.dumps(meta, indent=1, sort_keys=True, default=_json_default) + "\n")
    return paths


def cmd_figure(args) -> int:
    cfg = PRESETS[args.name]
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.trials is not None:
        cfg = replace(cfg, n_trials=args.trials)
    cfg = apply_overrides(cfg, args.set or [])
    for p in run_config(cfg, Path(args.out), args.name, TITLES[args.name]):
        print(p)
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    for p in run_config(cfg, Path(args.out), Path(args.config).stem):
        print(p)
    return 0


def cmd_validate(args) -> int:
    from .validate import run_checks

    return 0 if run_checks(args.level) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="m2maccess", description="Transmit power vs arrival rate for M2M uplink access.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    f = sub.add_parser("figure", help="run a figure preset")
    f.add_argument("name", choices=sorted(PRESETS))
    f.add_argument("--out", default=".", help="output directory")
    f.add_argument("--seed", type=int)
    f.add_argument("--trials", type=int, help="slices per point")
    f.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
    f.set_defaults(fn=cmd_figure)

    s = sub.add_parser("sweep", help="run a sweep from a config file")
    s.add_argument("config")
    s.add_argument("--out", default=".")
    s.set_defaults(fn=cmd_sweep)

    v = sub.add_parser("validate", help="run the oracle checks")
    v.add_argument("--level", choices=("fast", "full"), default="fast")
    v.set_defaults(fn=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
