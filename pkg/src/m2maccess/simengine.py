"""Monte-Carlo engine: Poisson arrivals per slice, device drops, strategy
dispatch, percentile statistics and parameter sweeps.

Every trial draws from its own Philox stream keyed by (seed, namespace, lambda
key, trial), so results do not depend on how trials are split over workers.
Namespace 0 holds the device drops, shared by all strategies (paired
comparison); namespace 1 + i holds strategy i's private randomness.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import poisson

from . import random_access as ra
from . import scheduled as sch
from .linkmodel import LinkEnv, ResourceSlice, pathloss_gain, watt_to_dbm

RACH_KINDS = ("optimal", "cdma", "fdma", "ftdma", "aloha")
SCHEDULED_KINDS = ("sic", "fdma_equal", "fdma_opt")


@dataclass(frozen=True)
class StrategySpec:
    """Which access strategy to run and its knobs.

    kind: one of optimal, cdma, fdma (free bin width), ftdma (fixed
    ``bin_width``), aloha (fixed ``bin_width``, single slot), sic,
    fdma_equal, fdma_opt.
    """

    kind: str
    bin_width: float | None = None
    channel_bw: float | None = None
    max_slots: int | None = None
    fade_in_gains: bool = False
    label: str = ""

    def __post_init__(self):
        if self.kind not in RACH_KINDS + SCHEDULED_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.kind in ("ftdma", "aloha") and self.bin_width is None:
            raise ValueError(f"{self.kind} needs a bin_width")
        if not self.label:
            object.__setattr__(self, "label", default_label(self))

    @property
    def is_rach(self) -> bool:
        return self.kind in RACH_KINDS


def default_label(s: StrategySpec) -> str:
    if s.kind in ("ftdma", "aloha"):
        bw = s.bin_width
        tag = f"{bw / 1e3:g}khz" if bw >= 1e3 else f"{bw:g}hz"
        return f"{s.kind}_{tag}"
    if s.kind == "cdma" and s.channel_bw:
        return f"cdma_ch{s.channel_bw / 1e3:g}khz"
    return s.kind


@dataclass(frozen=True)
class SweepSpec:
    strategies: tuple
    lambda_grid: tuple
    slice: ResourceSlice = ResourceSlice(100e3, 1.0, 500.0)
    env: LinkEnv = LinkEnv()
    n_trials: int = 5000
    seed: int = 1
    rach: ra.RachConfig = ra.RachConfig()
    blocklength: bool = False
    paired: bool = True

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if len(self.lambda_grid) == 0:
            raise ValueError("lambda_grid must not be empty")
        if any(not lam > 0 for lam in self.lambda_grid):
            raise ValueError("arrival rates must be positive")
        if len(self.strategies) == 0:
            raise ValueError("need at least one strategy")
        if len({s.label for s in self.strategies}) != len(self.strategies):
            raise ValueError("strategy labels must be unique")


@dataclass
class SweepPoint:
    strategy: str
    lam: float
    p95_tx_power: float
    mean_tx_power: float
    outage: float
    n_samples: int
    n_delivered: int
    stderr_db: float
    status: str = "ok"
    design: dict = field(default_factory=dict)

    @property
    def p95_dbm(self) -> float:
        return float(watt_to_dbm(self.p95_tx_power)) if self.p95_tx_power > 0 else float("nan")


@dataclass
class SweepResult:
    points: list
    config_echo: dict

    def get(self, strategy: str, lam: float) -> SweepPoint:
        for p in self.points:
            if p.strategy == strategy and p.lam == lam:
                return p
        raise KeyError((strategy, lam))

    def series(self, strategy: str) -> list:
        return [p for p in self.points if p.strategy == strategy]


# ---------------------------------------------------------------------------
# statistics

def arrivals_per_slice(lam: float, slice_: ResourceSlice, rng: np.random.Generator) -> int:
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    return int(rng.poisson(lam * slice_.duration_t))


def percentile(samples, q: float) -> float:
    """Nearest-rank percentile: the ceil(q n)-th smallest sample."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("percentile of an empty sample")
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    r = max(math.ceil(q * x.size - 1e-9), 1)
    return float(np.partition(x, r - 1)[r - 1])


def bootstrap_percentile_db(samples, q: float, rng: np.random.Generator, n_boot: int = 200) -> float:
    """Bootstrap standard error, in dB, of the nearest-rank percentile.

    The r-th order statistic of a with-replacement resample of n sorted values
    is sorted[floor(n U)] with U ~ Beta(r, n - r + 1) (the r-th of n uniforms),
    so no resample is materialised.
    """
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n < 2:
        return float("nan")
    r = max(math.ceil(q * n - 1e-9), 1)
    idx = np.minimum((rng.beta(r, n - r + 1, size=n_boot) * n).astype(np.int64), n - 1)
    uniq = np.unique(idx)
    part = np.partition(x, uniq)
    vals = part[idx]
    return float(np.std(10.0 * np.log10(vals), ddof=1))


# ---------------------------------------------------------------------------
# populations

def _stream(seed: int, namespace: int, lam_key: int = 0, trial: int = 0) -> np.random.Generator:
    """Philox stream under the 128-bit key (seed, namespace | lambda key | trial)."""
    if not (0 <= namespace < 1 << 16 and 0 <= lam_key < 1 << 16 and 0 <= trial < 1 << 32):
        raise ValueError("stream key component out of range")
    k1 = (namespace << 48) | (lam_key << 32) | trial
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, k1], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class Population:
    k: np.ndarray
    distance: np.ndarray
    fade: np.ndarray
    inv_gain: np.ndarray

    @property
    def size(self) -> int:
        return int(self.distance.size)


def draw_population(lam: float, slice_: ResourceSlice, env: LinkEnv, n_trials: int, seed: int, key: int = 0,
                    namespace: int = 0) -> Population:
    """Device drops for ``n_trials`` slices.

    Arrival counts come from the Poisson inverse CDF of one uniform per trial
    and device j of a trial always uses row j of that trial's stream, so with
    a fixed ``key`` a larger lambda only adds devices to each slice.
    """
    mean = lam * slice_.duration_t
    kmax = int(poisson.ppf(1 - 1e-15, mean)) + 2 if mean > 0 else 1
    cdf = poisson.cdf(np.arange(kmax + 1), mean)
    ks = np.empty(n_trials, dtype=np.int64)
    rows = []
    for t in range(n_trials):
        rng = _stream(seed, namespace, key, t)
        kk = int(np.searchsorted(cdf, rng.random(), side="right"))
        ks[t] = kk
        rows.append(rng.random((kk, 2)))
    u = np.concatenate(rows) if rows else np.empty((0, 2))
    d = env.cell_radius * np.sqrt(1.0 - u[:, 0])
    fade = -np.log1p(-u[:, 1])
    # 1 - u lies in (0, 1]; guard d == 0 and h == 0 anyway
    d = np.maximum(d, 1e-9)
    fade = np.maximum(fade, 1e-300)
    inv_gain = 1.0 / pathloss_gain(d, env) if d.size else np.empty(0)
    return Population(ks, d, fade, inv_gain)


def strategy_uniforms(pop: Population, seed: int, stream_id: int, key: int = 0, width: int = 2) -> np.ndarray:
    out = []
    for t, kk in enumerate(pop.k):
        out.append(_stream(seed, 1 + stream_id, key, t).random((int(kk), width)))
    return np.concatenate(out) if out else np.empty((0, width))


# ---------------------------------------------------------------------------
# strategy dispatch

@dataclass(frozen=True)
class Budget:
    """Per-mechanism shares of the total failure budget."""

    collision: float
    fade: float
    code: float | None

    @classmethod
    def split(cls, total: float, rach: bool, blocklength: bool):
        parts = 1 + int(rach) + int(blocklength)
        e = ra.split_outage(total, parts)
        return cls(e if rach else 0.0, e, e if blocklength else None)


def make_gap_fn(code_eps):
    if code_eps is None:
        return None
    from .protocol import blocklength_gap

    return lambda n, r: blocklength_gap(n, code_eps, r)


def evaluate_strategy(strat: StrategySpec, pop: Population, u: np.ndarray, lam: float, slice_: ResourceSlice,
                      env: LinkEnv, rach: ra.RachConfig, budget: Budget):
    """Run one strategy on a population; returns (tx_power, delivered, info).

    Raises :class:`random_access.Infeasible` when no design meets the
    collision budget.
    """
    gap_fn = make_gap_fn(budget.code)
    n_sym = slice_.bandwidth_w * slice_.duration_t
    full_gap = 1.0 if gap_fn is None else float(gap_fn(n_sym, slice_.payload_l / n_sym))
    k, inv_g, fade = pop.k, pop.inv_gain, pop.fade
    max_slots = strat.max_slots or rach.max_attempts
    if strat.kind == "optimal":
        return ra.simulate_optimal(k, inv_g, fade, u, slice_, env, rach, budget.collision, budget.fade, full_gap)
    if strat.kind == "cdma":
        return ra.simulate_cdma(k, inv_g, fade, u, slice_, env, budget.fade, strat.channel_bw, full_gap)
    if strat.kind in ("fdma", "ftdma", "aloha"):
        bw = None if strat.kind == "fdma" else strat.bin_width
        slots = 1 if strat.kind == "aloha" else max_slots
        return ra.simulate_aloha(k, inv_g, fade, u, lam, slice_, env, budget.collision, budget.fade, bw, slots, gap_fn)
    kw = {"gap_fn": gap_fn} if strat.kind == "fdma_equal" else {"gap": full_gap}
    return sch.simulate_scheduled(strat.kind, k, inv_g, fade, slice_, env, budget.fade, strat.fade_in_gains, **kw)


def summarize(label: str, lam: float, tx, delivered, info, n_present: int, rng: np.random.Generator) -> SweepPoint:
    ok_tx = np.asarray(tx)[delivered]
    outage = 1.0 - ok_tx.size / n_present if n_present else 0.0
    if ok_tx.size == 0:
        return SweepPoint(label, lam, float("nan"), float("nan"), outage, n_present, 0, float("nan"), "no_delivery", info)
    p95 = percentile(ok_tx, 0.95)
    se = bootstrap_percentile_db(ok_tx, 0.95, rng)
    return SweepPoint(label, lam, p95, float(ok_tx.mean()), outage, n_present, int(ok_tx.size), se, "ok", info)


def _infeasible_point(label, lam, n_present, best_outage, fade_eps):
    out = 1.0 - (1.0 - best_outage) * (1.0 - fade_eps)
    return SweepPoint(label, lam, float("nan"), float("nan"), out, n_present, 0, float("nan"), "infeasible", {})


def _run_lambda(spec: SweepSpec, li: int):
    lam = spec.lambda_grid[li]
    pop = draw_population(lam, spec.slice, spec.env, spec.n_trials, spec.seed, 1 + li)
    n_present = pop.size
    out = []
    for si, strat in enumerate(spec.strategies):
        total = spec.rach.target_outage if strat.is_rach else spec.env.fade_outage
        budget = Budget.split(total, strat.is_rach, spec.blocklength)
        if spec.paired:
            p = pop
        else:
            p = draw_population(lam, spec.slice, spec.env, spec.n_trials, spec.seed, 1 + li, namespace=20_000 + si)
        if p.size == 0:
            out.append(SweepPoint(strat.label, lam, float("nan"), float("nan"), 0.0, 0, 0, float("nan"), "empty"))
            continue
        u = strategy_uniforms(p, spec.seed, si, 1 + li)
        boot = _stream(spec.seed, 10_000 + si, 1 + li)
        try:
            tx, delivered, info = evaluate_strategy(strat, p, u, lam, spec.slice, spec.env, spec.rach, budget)
        except ra.Infeasible as exc:
            out.append(_infeasible_point(strat.label, lam, p.size, exc.best_outage, budget.fade))
            continue
        out.append(summarize(strat.label, lam, tx, delivered, info, p.size, boot))
    return out


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Evaluate every (strategy, lambda) point of ``spec``.

    Output is identical for any ``workers``: each lambda is an independent
    task and every trial owns its random stream.
    """
    idx = range(len(spec.lambda_grid))
    if workers <= 1:
        per_lam = [_run_lambda(spec, i) for i in idx]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_lam = list(pool.map(_run_lambda, [spec] * len(idx), idx))
    order = {s.label: i for i, s in enumerate(spec.strategies)}
    points = [p for chunk in per_lam for p in chunk]
    points.sort(key=lambda p: (order[p.strategy], p.lam))
    return SweepResult(points, spec_echo(spec))


def spec_echo(spec: SweepSpec) -> dict:
    d = asdict(spec)
    d["strategies"] = [asdict(s) for s in spec.strategies]
    d["lambda_grid"] = list(spec.lambda_grid)
    d["rach"]["theta_grid"] = [float(t) for t in spec.rach.theta_grid]
    return d
