"""One-stage versus two-stage access: the largest arrival rate each design
supports under a device power cap, with control/grant overhead and a
finite-blocklength SNR gap.

A frame of length T is either all random access (one-stage), or split into
a request window (Aloha FDMA, control bits only), a downlink grant window and
a scheduled window where granted devices share W by equal FDMA (two-stage).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import random_access as ra
from . import scheduled as sch
from . import simengine as se
from .linkmodel import LinkEnv, ResourceSlice

BINDING = ("power", "outage", "dl_overhead", "pole")


def _capacity(g):
    return np.log2(1.0 + g)


def _dispersion(g):
    return -np.expm1(-2.0 * np.log1p(g)) * (math.log2(math.e)) ** 2


def blocklength_gap(n_symbols, epsilon: float, rate):
    """SNR gap of a length-n code at block error ``epsilon`` and ``rate`` bits/symbol.

    The finite-length SNR solves the normal approximation
    rate = log2(1 + g) - sqrt(V(g) / n) * Qinv(epsilon) with
    V(g) = (1 - (1 + g)^-2) (log2 e)^2, by bisection to 1e-8 relative; the
    gap is that SNR over 2^rate - 1. Broadcasts over n and rate. For
    epsilon >= 1/2 the approximation asks for no back-off and the gap is 1.
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    n = np.asarray(n_symbols, dtype=float)
    r = np.asarray(rate, dtype=float)
    if np.any(~(n > 0)) or np.any(~(r > 0)):
        raise ValueError("n_symbols and rate must be positive")
    n, r = np.broadcast_arrays(n, r)
    qinv = norm.isf(epsilon)
    g_inf = np.expm1(r * math.log(2.0))
    if qinv <= 0:
        out = np.ones(n.shape)
        return float(out) if out.ndim == 0 else out
    finite = np.isfinite(n)
    nn = np.where(finite, n, 1.0)

    def f(g):
        return _capacity(g) - np.sqrt(_dispersion(g) / nn) * qinv - r

    lo = g_inf.copy()
    hi = g_inf * 2.0 + 1e-12
    for _ in range(200):
        bad = f(hi) <= 0
        if not np.any(bad & finite):
            break
        hi = np.where(bad, hi * 2.0, hi)
    for _ in range(200):
        mid = np.sqrt(lo * hi)
        up = f(mid) > 0
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
        if np.all(hi / lo - 1.0 < 1e-8):
            break
    out = np.where(finite, np.maximum(hi / g_inf, 1.0), 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class OverheadModel:
    """Control-plane cost of the two-stage design.

    ``stage_split`` is the frame split (request, grant, data). Grants are sent
    at ``dl_spectral_efficiency`` over ``dl_bandwidth``.
    """

    control_payload_bits: float = 80.0
    grant_bits: float = 80.0
    dl_bandwidth: float = 10e3
    dl_spectral_efficiency: float = 2.07
    stage_split: tuple = (0.4, 0.2, 0.4)

    def __post_init__(self):
        if self.control_payload_bits < 0 or self.grant_bits < 0:
            raise ValueError("bit counts must be nonnegative")
        if not (self.dl_bandwidth > 0 and self.dl_spectral_efficiency > 0):
            raise ValueError("downlink bandwidth and efficiency must be positive")
        if len(self.stage_split) != 3 or any(not f > 0 for f in self.stage_split):
            raise ValueError("stage_split needs three positive fractions")
        if abs(sum(self.stage_split) - 1.0) > 1e-9:
            raise ValueError("stage_split must sum to 1")

    @property
    def dl_cap(self) -> float:
        """Arrival rate at which grants saturate the downlink (per second)."""
        if self.grant_bits == 0:
            return math.inf
        return self.dl_bandwidth * self.dl_spectral_efficiency / self.grant_bits


@dataclass(frozen=True)
class ProtocolCurvePoint:
    payload_bits: float
    max_arrival_rate: float
    binding_constraint: str

    def __post_init__(self):
        if self.max_arrival_rate < 0:
            raise ValueError("max_arrival_rate must be nonnegative")
        if self.binding_constraint not in BINDING:
            raise ValueError(f"unknown binding constraint {self.binding_constraint!r}")


@dataclass(frozen=True)
class SearchConfig:
    """Bisection and Monte-Carlo settings for the arrival-rate search.

    The trial count shrinks at very high loads so one evaluation never holds
    more than ``max_devices`` devices; it never drops below ``min_trials``.
    """

    lam_lo: float = 1e-2
    lam_hi: float = 1e5
    iterations: int = 20
    n_trials: int = 2000
    min_trials: int = 200
    max_devices: int = 4_000_000
    seed: int = 1
    total_outage: float = 0.1
    blocklength: bool = True

    def trials_for(self, lam, T):
        per = max(lam * T, 1.0)
        return int(max(self.min_trials, min(self.n_trials, self.max_devices // per)))


def max_arrival(feasible, lo: float, hi: float, iterations: int):
    """Largest lambda in [lo, hi] with ``feasible(lambda)`` true, by bisection
    in log lambda. ``feasible`` returns None when feasible, else the name of
    the violated constraint. Returns (lambda, binding).

    ``hi`` itself is never evaluated (it can mean billions of devices); if
    every probe passes the search ends just below ``hi`` with binding
    "outage".
    """
    why = feasible(lo)
    if why is not None:
        return 0.0, why
    why_hi = "outage"
    a, b = math.log(lo), math.log(hi)
    for _ in range(iterations):
        m = 0.5 * (a + b)
        why = feasible(math.exp(m))
        if why is None:
            a = m
        else:
            b, why_hi = m, why
    return math.exp(a), why_hi


def _p95_ok(tx, delivered, cap):
    ok = np.asarray(tx)[delivered]
    if ok.size == 0:
        return False
    return se.percentile(ok, 0.95) <= cap


def one_stage_feasibility(payload, strategy: se.StrategySpec, env: LinkEnv, slice_: ResourceSlice,
                          ovh: OverheadModel, search: SearchConfig, rach: ra.RachConfig = ra.RachConfig()):
    msg = ResourceSlice(slice_.bandwidth_w, slice_.duration_t, payload + ovh.control_payload_bits)
    budget = se.Budget.split(search.total_outage, True, search.blocklength)

    def feasible(lam):
        n_trials = search.trials_for(lam, msg.duration_t)
        pop = se.draw_population(lam, msg, env, n_trials, search.seed)
        if pop.size == 0:
            return None
        u = se.strategy_uniforms(pop, search.seed, 0, width=2)
        try:
            tx, delivered, _ = se.evaluate_strategy(strategy, pop, u, lam, msg, env, rach, budget)
        except ra.Infeasible:
            return "outage"
        if strategy.kind == "cdma" and 1.0 - delivered.mean() > search.total_outage:
            return "pole"
        return None if _p95_ok(tx, delivered, env.tx_power_cap) else "power"

    return feasible


def one_stage_max_arrival(payload, strategy: se.StrategySpec, env: LinkEnv, slice_: ResourceSlice,
                          ovh: OverheadModel = OverheadModel(), search: SearchConfig = SearchConfig(),
                          rach: ra.RachConfig = ra.RachConfig()) -> ProtocolCurvePoint:
    """Largest arrival rate when payload and control bits ride the RACH together."""
    if not payload > 0:
        raise ValueError("payload must be positive")
    feasible = one_stage_feasibility(payload, strategy, env, slice_, ovh, search, rach)
    lam, why = max_arrival(feasible, search.lam_lo, search.lam_hi, search.iterations)
    return ProtocolCurvePoint(float(payload), lam, why)


def two_stage_feasibility(payload, ovh: OverheadModel, env: LinkEnv, slice_: ResourceSlice,
                          search: SearchConfig, rach: ra.RachConfig = ra.RachConfig(), dl_limit: bool = True):
    W, T = slice_.bandwidth_w, slice_.duration_t
    t1, _, t2 = ovh.stage_split
    has_req = ovh.control_payload_bits > 0
    stage_eps = ra.split_outage(search.total_outage, 2 if has_req else 1)
    b1 = se.Budget.split(stage_eps, True, search.blocklength)
    b2 = se.Budget.split(stage_eps, False, search.blocklength)
    frame = ResourceSlice(W, T, payload)
    data = ResourceSlice(W, t2 * T, payload)
    req = ResourceSlice(W, t1 * T, ovh.control_payload_bits) if has_req else None
    gap_fn = se.make_gap_fn(b2.code)
    fdma = se.StrategySpec("fdma")

    def feasible(lam):
        if dl_limit and lam > ovh.dl_cap:
            return "dl_overhead"
        n_trials = search.trials_for(lam, T)
        pop = se.draw_population(lam, frame, env, n_trials, search.seed)
        if pop.size == 0:
            return None
        u = se.strategy_uniforms(pop, search.seed, 1, width=3)
        if has_req:
            # every request of the frame contends inside the request window
            try:
                tx1, ok1, _ = se.evaluate_strategy(fdma, pop, u, lam / t1, req, env, rach, b1)
            except ra.Infeasible:
                return "outage"
        else:
            tx1, ok1 = np.zeros(pop.size), np.ones(pop.size, dtype=bool)
        sid = np.repeat(np.arange(pop.k.size), pop.k)
        k2 = np.bincount(sid[ok1], minlength=pop.k.size)
        # a granted device sees a fresh fade in the data window
        fade2 = -np.log1p(-u[ok1, 2]) if has_req else pop.fade
        tx2, ok2, _ = sch.simulate_scheduled("fdma_equal", k2, pop.inv_gain[ok1], fade2, data, env, b2.fade,
                                             gap_fn=gap_fn)
        peak = np.maximum(tx1[ok1], tx2)
        return None if _p95_ok(peak, ok2, env.tx_power_cap) else "power"

    return feasible


def two_stage_max_arrival(payload, ovh: OverheadModel, env: LinkEnv, slice_: ResourceSlice,
                          search: SearchConfig = SearchConfig(), rach: ra.RachConfig = ra.RachConfig(),
                          dl_limit: bool = True) -> ProtocolCurvePoint:
    """Largest arrival rate for request (Aloha FDMA) + grant + scheduled FDMA."""
    if not payload > 0:
        raise ValueError("payload must be positive")
    feasible = two_stage_feasibility(payload, ovh, env, slice_, search, rach, dl_limit)
    lam, why = max_arrival(feasible, search.lam_lo, search.lam_hi, search.iterations)
    return ProtocolCurvePoint(float(payload), lam, why)


def scheduled_max_arrival(payload, env: LinkEnv, slice_: ResourceSlice, search: SearchConfig = SearchConfig(),
                          window: float = 1.0) -> ProtocolCurvePoint:
    """Largest arrival rate for equal FDMA alone, no request stage.

    Arrivals accumulate over ``slice_`` but the data must fit in the first
    ``window`` fraction of it.
    """
    if not 0 < window <= 1:
        raise ValueError("window must lie in (0, 1]")
    frame = ResourceSlice(slice_.bandwidth_w, slice_.duration_t, payload)
    data = ResourceSlice(slice_.bandwidth_w, window * slice_.duration_t, payload)
    budget = se.Budget.split(search.total_outage, False, search.blocklength)
    gap_fn = se.make_gap_fn(budget.code)

    def feasible(lam):
        pop = se.draw_population(lam, frame, env, search.trials_for(lam, frame.duration_t), search.seed)
        if pop.size == 0:
            return None
        tx, ok, _ = sch.simulate_scheduled("fdma_equal", pop.k, pop.inv_gain, pop.fade, data, env, budget.fade,
                                           gap_fn=gap_fn)
        return None if _p95_ok(tx, ok, env.tx_power_cap) else "power"

    lam, why = max_arrival(feasible, search.lam_lo, search.lam_hi, search.iterations)
    return ProtocolCurvePoint(float(payload), lam, why)


def protocol_curves(payloads, strategies, env: LinkEnv, slice_: ResourceSlice, ovh: OverheadModel,
                    search: SearchConfig, rach: ra.RachConfig = ra.RachConfig()) -> dict:
    """lambda*(payload) for each one-stage strategy and for the two-stage design.

    Keys are ``one_stage_<label>`` and ``two_stage``.
    """
    out = {}
    for strat in strategies:
        out[f"one_stage_{strat.label}"] = [
            one_stage_max_arrival(p, strat, env, slice_, ovh, search, rach) for p in payloads
        ]
    out["two_stage"] = [two_stage_max_arrival(p, ovh, env, slice_, search, rach) for p in payloads]
    return out
