"""Flat ``key = value unit`` run configuration.

One setting per line, ``#`` starts a comment, physical quantities must carry
a unit. Lists are comma separated with one trailing unit::

    bandwidth   = 100 kHz
    lambda_grid = 1, 10, 100 /s
    strategies  = optimal, cdma, fdma, ftdma:1kHz

:func:`echo` writes every resolved setting in canonical units; parsing that
text and echoing it again gives the same bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from . import protocol as pr
from . import random_access as ra
from . import simengine as se
from .linkmodel import LinkEnv, ResourceSlice, dbm_to_watt, watt_to_dbm


class ConfigError(ValueError):
    """Malformed configuration; the message names the line and key."""


_UNITS = {
    "freq": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6},
    "bits": {"bit": 1.0, "bits": 1.0, "kbit": 1e3},
    "length": {"m": 1.0, "km": 1e3},
    "db": {"dB": 1.0},
    "rate": {"/s": 1.0},
    "se": {"bit/s/Hz": 1.0},
}
_CANONICAL = {"freq": "Hz", "time": "s", "bits": "bit", "length": "m", "db": "dB", "rate": "/s", "se": "bit/s/Hz",
              "power": "dBm", "psd": "dBm/Hz"}
_MODES = ("power_sweep", "protocol_curve")


@dataclass(frozen=True)
class RunConfig:
    """Everything one run needs, in canonical units (Hz, s, bit, m, dB, dBm)."""

    mode: str = "power_sweep"
    strategies: tuple = ("optimal", "cdma", "fdma", "ftdma:1000.0Hz", "ftdma:10000.0Hz")
    lambda_grid: tuple = (1.0, 10.0, 100.0)
    payload_grid: tuple = (20.0, 100.0, 500.0)
    bandwidth: float = 100e3
    duration: float = 1.0
    payload: float = 500.0
    cell_radius: float = 2000.0
    pathloss_exponent: float = 3.7
    pathloss_intercept: float = 38.5
    noise_psd: float = -169.0
    tx_power_cap: float = 24.0
    outage: float = 0.1
    n_codebooks: int = 65536
    max_attempts: int = 1024
    blocklength: bool = False
    paired: bool = True
    scheduler_knows_fade: bool = False
    n_trials: int = 5000
    seed: int = 1
    workers: int = 1
    control_payload: float = 80.0
    grant_bits: float = 80.0
    dl_bandwidth: float | None = None
    dl_spectral_efficiency: float = 2.07
    stage_split: tuple = (0.4, 0.2, 0.4)
    lambda_lo: float = 1e-2
    lambda_hi: float = 1e5
    search_iterations: int = 20
    min_trials: int = 200
    max_devices: int = 4_000_000

    # -- conversions -----------------------------------------------------

    def env(self) -> LinkEnv:
        return LinkEnv(
            noise_psd=float(dbm_to_watt(self.noise_psd)),
            cell_radius=self.cell_radius,
            pathloss_exponent=self.pathloss_exponent,
            pathloss_intercept_db=self.pathloss_intercept,
            fade_outage=self.outage,
            tx_power_cap=float(dbm_to_watt(self.tx_power_cap)),
        )

    def slice(self) -> ResourceSlice:
        return ResourceSlice(self.bandwidth, self.duration, self.payload)

    def rach(self) -> ra.RachConfig:
        return ra.RachConfig(n_codebooks=self.n_codebooks, max_attempts=self.max_attempts, target_outage=self.outage)

    def strategy_specs(self) -> tuple:
        return tuple(parse_strategy(s, self.scheduler_knows_fade) for s in self.strategies)

    def sweep_spec(self) -> se.SweepSpec:
        return se.SweepSpec(
            strategies=self.strategy_specs(),
            lambda_grid=tuple(self.lambda_grid),
            slice=self.slice(),
            env=self.env(),
            n_trials=self.n_trials,
            seed=self.seed,
            rach=self.rach(),
            blocklength=self.blocklength,
            paired=self.paired,
        )

    def overhead(self) -> pr.OverheadModel:
        return pr.OverheadModel(
            control_payload_bits=self.control_payload,
            grant_bits=self.grant_bits,
            dl_bandwidth=self.bandwidth if self.dl_bandwidth is None else self.dl_bandwidth,
            dl_spectral_efficiency=self.dl_spectral_efficiency,
            stage_split=tuple(self.stage_split),
        )

    def search(self) -> pr.SearchConfig:
        return pr.SearchConfig(
            lam_lo=self.lambda_lo,
            lam_hi=self.lambda_hi,
            iterations=self.search_iterations,
            n_trials=self.n_trials,
            min_trials=self.min_trials,
            max_devices=self.max_devices,
            seed=self.seed,
            total_outage=self.outage,
            blocklength=self.blocklength,
        )

    def validate(self):
        """Build every derived object once so bad combinations fail early."""
        if self.mode not in _MODES:
            raise ConfigError(f"key 'mode': expected one of {', '.join(_MODES)}, got {self.mode!r}")
        if self.workers < 1:
            raise ConfigError("key 'workers': must be >= 1")
        try:
            self.env()
            self.rach()
            self.overhead()
            if self.mode == "power_sweep":
                self.sweep_spec()
            else:
                if not self.payload_grid or any(not p > 0 for p in self.payload_grid):
                    raise ValueError("payload_grid must be nonempty and positive")
                if not 0 < self.lambda_lo < self.lambda_hi:
                    raise ValueError("need 0 < lambda_lo < lambda_hi")
                self.slice()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self


# ---------------------------------------------------------------------------
# per-key value kinds

_KINDS = {
    "mode": "word",
    "strategies": "strategies",
    "lambda_grid": "rate_list",
    "payload_grid": "bits_list",
    "bandwidth": "freq",
    "duration": "time",
    "payload": "bits",
    "cell_radius": "length",
    "pathloss_exponent": "float",
    "pathloss_intercept": "db",
    "noise_psd": "psd",
    "tx_power_cap": "power",
    "outage": "float",
    "n_codebooks": "int",
    "max_attempts": "int",
    "blocklength": "bool",
    "paired": "bool",
    "scheduler_knows_fade": "bool",
    "n_trials": "int",
    "seed": "int",
    "workers": "int",
    "control_payload": "bits",
    "grant_bits": "bits",
    "dl_bandwidth": "freq_or_uplink",
    "dl_spectral_efficiency": "se",
    "stage_split": "float_list",
    "lambda_lo": "rate",
    "lambda_hi": "rate",
    "search_iterations": "int",
    "min_trials": "int",
    "max_devices": "int",
}
KEYS = tuple(f.name for f in fields(RunConfig))
assert set(KEYS) == set(_KINDS)


def _number(text: str) -> float:
    x = float(text)
    if not math.isfinite(x):
        raise ValueError(f"not a finite number: {text!r}")
    return x


def _split_unit(text: str, units: dict):
    for u in sorted(units, key=len, reverse=True):
        if text.endswith(u):
            return text[: -len(u)].strip(), u
    raise ValueError(f"missing or unknown unit in {text!r}; use one of {', '.join(units)}")


def _quantity(text: str, kind: str) -> float:
    if kind == "power":
        body, u = _split_unit(text, {"dBm": 0, "mW": 0, "W": 0})
        x = _number(body)
        if u == "dBm":
            return x
        w = x * (1e-3 if u == "mW" else 1.0)
        if not w > 0:
            raise ValueError("power must be positive")
        return float(watt_to_dbm(w))
    if kind == "psd":
        body, u = _split_unit(text, {"dBm/Hz": 0, "W/Hz": 0})
        x = _number(body)
        if u == "dBm/Hz":
            return x
        if not x > 0:
            raise ValueError("noise density must be positive")
        return float(watt_to_dbm(x))
    units = _UNITS[kind]
    body, u = _split_unit(text, units)
    return _number(body) * units[u]


def parse_strategy(text: str, knows_fade: bool = False) -> se.StrategySpec:
    """``kind`` or ``kind:<width><unit>``; the width is the bin width of
    ftdma/aloha or the channel width of cdma."""
    kind, _, arg = text.strip().partition(":")
    kind = kind.strip()
    kw = {}
    if arg:
        width = _quantity(arg.strip(), "freq")
        if kind in ("ftdma", "aloha"):
            kw["bin_width"] = width
        elif kind == "cdma":
            kw["channel_bw"] = width
        else:
            raise ValueError(f"strategy {kind!r} takes no argument")
    if kind in se.SCHEDULED_KINDS:
        kw["fade_in_gains"] = knows_fade
    return se.StrategySpec(kind, **kw)


def _canonical_strategy(text: str) -> str:
    s = parse_strategy(text)
    width = s.bin_width if s.bin_width is not None else s.channel_bw
    return s.kind if width is None else f"{s.kind}:{width!r}Hz"


def parse_value(key: str, text: str):
    kind = _KINDS[key]
    text = text.strip()
    if not text:
        raise ValueError("empty value")
    if kind == "word":
        return text
    if kind == "int":
        x = _number(text)
        if x != int(x):
            raise ValueError(f"expected an integer, got {text!r}")
        return int(x)
    if kind == "float":
        return _number(text)
    if kind == "bool":
        low = text.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"expected true or false, got {text!r}")
    if kind == "freq_or_uplink":
        return None if text == "uplink" else _quantity(text, "freq")
    if kind == "strategies":
        items = [t for t in (p.strip() for p in text.split(",")) if t]
        return tuple(_canonical_strategy(t) for t in items)
    if kind == "float_list":
        return tuple(_number(t) for t in text.split(",") if t.strip())
    if kind in ("rate_list", "bits_list"):
        base = kind.split("_")[0]
        body, u = _split_unit(text, _UNITS[base])
        return tuple(_number(t) * _UNITS[base][u] for t in body.split(",") if t.strip())
    return _quantity(text, kind)


def format_value(key: str, value) -> str:
    kind = _KINDS[key]
    if kind == "word":
        return value
    if kind == "bool":
        return "true" if value else "false"
    if kind == "int":
        return str(int(value))
    if kind == "float":
        return repr(float(value))
    if kind == "freq_or_uplink":
        return "uplink" if value is None else f"{float(value)!r} Hz"
    if kind == "strategies":
        return ", ".join(value)
    if kind == "float_list":
        return ", ".join(repr(float(v)) for v in value)
    if kind in ("rate_list", "bits_list"):
        unit = _CANONICAL[kind.split("_")[0]]
        return ", ".join(repr(float(v)) for v in value) + f" {unit}"
    return f"{float(value)!r} {_CANONICAL[kind]}"


def _parse_line(raw: str, where: str):
    line = raw.split("#", 1)[0].strip()
    if not line:
        return None
    key, sep, value = line.partition("=")
    key = key.strip()
    if not sep:
        raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
    if key not in _KINDS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        return key, parse_value(key, value)
    except ValueError as exc:
        raise ConfigError(f"{where}: key {key!r}: {exc}") from None


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Apply the settings in ``text`` on top of ``base`` (defaults if None)."""
    seen: dict = {}
    values = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        item = _parse_line(raw, f"line {n}")
        if item is None:
            continue
        key, val = item
        if key in seen:
            raise ConfigError(f"line {n}: key {key!r} already set on line {seen[key]}")
        seen[key] = n
        values[key] = val
    return replace(base or RunConfig(), **values).validate()


def apply_overrides(cfg: RunConfig, pairs) -> RunConfig:
    """``--set key=value`` overrides, in order."""
    values = {}
    for p in pairs:
        key, val = _parse_line(p, "--set " + p.split("=", 1)[0].strip())
        values[key] = val
    return replace(cfg, **values).validate()


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def echo(cfg: RunConfig) -> str:
    """Canonical text of every setting, one per line in field order."""
    width = max(len(k) for k in KEYS)
    return "".join(f"{k.ljust(width)} = {format_value(k, getattr(cfg, k))}\n" for k in KEYS)


# ---------------------------------------------------------------------------
# figure presets

FIG1 = RunConfig(
    strategies=("optimal", "cdma", "fdma", "ftdma:1000.0Hz", "ftdma:10000.0Hz"),
    lambda_grid=(1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0),
)
FIG2 = RunConfig(
    strategies=("sic", "fdma_opt", "fdma_equal"),
    lambda_grid=(1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0),
)
# The 38.5 dB reference loss leaves no headroom at 24 dBm over 10 kHz, so the
# payload curve uses the intercept that reproduces 128.1 + 37.6 log10(2 km).
FIG4 = RunConfig(
    mode="protocol_curve",
    strategies=("optimal", "fdma"),
    payload_grid=(10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0),
    bandwidth=10e3,
    pathloss_intercept=17.28,
    blocklength=True,
    n_trials=2000,
)
PRESETS = {"fig1": FIG1, "fig2": FIG2, "fig4": FIG4}
