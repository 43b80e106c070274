"""CSV and SVG output.

Numbers are written with ``repr``-style formatting (always a dot decimal),
rows in strategy order then ascending rate. SVGs embed glyphs as paths and
carry no timestamp, so identical data gives identical files.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SWEEP_HEADER = ("strategy", "lambda_per_s", "p95_tx_power_dbm", "outage", "stderr_db")
CURVE_HEADER = ("strategy", "payload_bits", "max_arrival_per_s", "binding_constraint")


def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def sweep_csv(result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for p in result.points:
        w.writerow([p.strategy, _num(p.lam), _num(p.p95_dbm), _num(p.outage), _num(p.stderr_db)])
    return buf.getvalue()


def curve_csv(curves: dict) -> str:
    """``curves`` maps a strategy label to a list of ProtocolCurvePoint."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    for label, pts in curves.items():
        for p in sorted(pts, key=lambda p: p.payload_bits):
            w.writerow([label, _num(p.payload_bits), _num(p.max_arrival_rate), p.binding_constraint])
    return buf.getvalue()


def _save_svg(fig, path: Path):
    plt.rcParams["svg.hashsalt"] = "m2maccess"
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    write_text(path, buf.getvalue())


def _new_axes(title):
    with plt.rc_context({"svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.4))
    ax.set_title(title, fontsize=10)
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def sweep_svg(result, path: Path, title: str = ""):
    """p95 transmit power (dBm) against arrivals/s on a log axis; points that
    miss the outage target are left out."""
    limit = result.config_echo.get("rach", {}).get("target_outage", 0.1) * 1.05 + 1e-9
    with plt.rc_context({"svg.fonttype": "path"}):
        fig, ax = _new_axes(title)
        labels = []
        for p in result.points:
            if p.strategy not in labels:
                labels.append(p.strategy)
        for lab in labels:
            pts = [p for p in result.series(lab) if p.status == "ok" and p.outage <= limit]
            ax.plot([p.lam for p in pts], [p.p95_dbm for p in pts], marker="o", ms=3, label=lab)
        ax.set_xscale("log")
        ax.set_xlabel("arrival rate (arrivals/s)")
        ax.set_ylabel("95th-percentile transmit power (dBm)")
        ax.legend(fontsize=8)
        fig.tight_layout()
        _save_svg(fig, path)


def curve_svg(curves: dict, path: Path, title: str = ""):
    with plt.rc_context({"svg.fonttype": "path"}):
        fig, ax = _new_axes(title)
        for label, pts in curves.items():
            pts = sorted((p for p in pts if p.max_arrival_rate > 0), key=lambda p: p.payload_bits)
            ax.plot([p.payload_bits for p in pts], [p.max_arrival_rate for p in pts], marker="o", ms=3, label=label)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("payload (bits)")
        ax.set_ylabel("max arrival rate (arrivals/s)")
        ax.legend(fontsize=8)
        fig.tight_layout()
        _save_svg(fig, path)


def write_text(path, text: str):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
