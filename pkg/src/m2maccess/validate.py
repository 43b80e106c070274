"""Oracle checks behind ``m2maccess validate``.

Each check returns ``(ok, detail)``. The fast level runs closed-form
identities, brute-force oracles and monotonicity laws; the full level adds
reduced-size figure preset checks.
"""

from __future__ import annotations

import math
import time
from dataclasses import replace

import numpy as np

from . import protocol as pr
from . import random_access as ra
from . import scheduled as sch
from . import simengine as se
from .config import FIG1, FIG2, FIG4
from .linkmodel import LinkEnv, ResourceSlice, fade_margin, lin_to_db, required_power

FIG1_SLICE = ResourceSlice(100e3, 1.0, 500.0)


def check_sic_region(sic_fn=sch.sic_rx_powers, n_instances=200, seed=7):
    """SIC targets must sit exactly on the MAC region boundary: feasible, and
    infeasible once scaled down by 1e-6."""
    rng = np.random.default_rng(seed)
    env = LinkEnv()
    noise = env.noise_psd * FIG1_SLICE.bandwidth_w
    rate = FIG1_SLICE.payload_l / FIG1_SLICE.duration_t
    for _ in range(n_instances):
        k = int(rng.integers(1, 7))
        g = rng.lognormal(0, 2, k)
        q = sic_fn(g, FIG1_SLICE, env.noise_psd)
        rates = np.full(k, rate)
        if not ra.mac_feasible(rates, q, FIG1_SLICE.bandwidth_w, noise):
            return False, f"K={k}: SIC targets outside the capacity region"
        if ra.mac_feasible(rates, q * (1 - 1e-6), FIG1_SLICE.bandwidth_w, noise):
            return False, f"K={k}: SIC targets strictly inside the region"
    return True, f"{n_instances} instances on the boundary"


def check_sic_sum_identity():
    env = LinkEnv()
    W, T, L = FIG1_SLICE.bandwidth_w, FIG1_SLICE.duration_t, FIG1_SLICE.payload_l
    worst = 0.0
    for k in (1, 2, 5, 10, 50, 100, 288):
        sic = sch.sic_rx_powers(np.ones(k), FIG1_SLICE, env.noise_psd).sum()
        closed = env.noise_psd * W * math.expm1(k * L / (W * T) * math.log(2))
        fdma = k * required_power(W / k, T, L, 1.0, noise_psd=env.noise_psd)
        worst = max(worst, abs(sic / closed - 1), abs(fdma / closed - 1))
    return worst < 1e-12, f"max relative error {worst:.2e}"


def check_cdma_pole():
    k = ra.cdma_pole_capacity(FIG1_SLICE)
    closed = math.floor(1 + 1 / (2 ** 0.005 - 1))
    return k == 289 == closed, f"pole capacity {k}"


def check_joint_decode(n_instances=200, seed=11):
    rng = np.random.default_rng(seed)
    for _ in range(n_instances):
        k = int(rng.integers(0, 9))
        arr = [(float(p), int(c)) for p, c in zip(rng.lognormal(0, 1.5, k) * 1e-3, rng.integers(0, 6, k))]
        rate = float(rng.uniform(0.2, 2.0))
        fast = ra.joint_decode_max_subset(arr, rate, 1.0, 1e-3).decoded_set
        slow = ra.joint_decode_bruteforce(arr, rate, 1.0, 1e-3)
        if fast != slow:
            return False, f"decoded {sorted(fast)}, exhaustive {sorted(slow)} on {arr}"
    return True, f"{n_instances} instances"


def check_mac_feasible(n_instances=300, seed=13):
    rng = np.random.default_rng(seed)
    for _ in range(n_instances):
        n = int(rng.integers(1, 7))
        rates = rng.uniform(0, 2, n)
        powers = rng.exponential(1, n)
        if ra.mac_feasible(rates, powers, 1.0, 1.0) != ra._mac_feasible_bruteforce(rates, powers, 1.0, 1.0):
            return False, f"mismatch at rates={rates}, powers={powers}"
    return True, f"{n_instances} instances"


def check_fade_margin(n=1_000_000, seed=17):
    m = fade_margin(0.1)
    db = float(lin_to_db(m))
    h = np.random.default_rng(seed).exponential(1.0, n)
    out = float(np.mean(h * m < 1.0))
    return abs(db - 9.77) < 0.005 and 0.09 <= out <= 0.11, f"margin {db:.3f} dB, outage {out:.4f}"


def check_aloha_fixed_point():
    loads = np.linspace(1e-4, 1 / math.e, 200)
    p = ra.aloha_collision_prob(loads)
    resid = np.abs(p - (1 - np.exp(-loads / (1 - p))))
    return float(resid.max()) < 1e-9, f"max residual {resid.max():.1e}"


def check_fdma_opt(n_instances=50, seed=19):
    rng = np.random.default_rng(seed)
    env = LinkEnv()
    worst = 0.0
    for _ in range(n_instances):
        g = tuple(rng.lognormal(-25, 1.5, int(rng.integers(1, 9))))
        inst = sch.ScheduledInstance(g, FIG1_SLICE)
        b, p = sch.fdma_optimal_alloc(inst, env)
        eq = sch.fdma_equal_powers(inst, env)
        if p.sum() > eq.sum() * (1 + 1e-9):
            return False, "optimal split uses more power than the equal split"
        worst = max(worst, sch.kkt_residual(b, inst, env))
    return worst < 1e-6, f"max KKT residual {worst:.1e}"


def check_monotone_laws():
    env = LinkEnv()
    ls = np.array([10, 100, 500, 1000.0])
    p_l = required_power(1e3, 1.0, ls, 1e-12, env=env)
    bs = np.array([1e2, 1e3, 1e4, 1e5])
    p_b = required_power(bs, 1.0, 500, 1e-12, env=env)
    gaps = pr.blocklength_gap(np.array([50, 200, 1e3, 1e4]), 1e-3, 0.5)
    ok = np.all(np.diff(p_l) > 0) and np.all(np.diff(p_b) < 0) and np.all(np.diff(gaps) < 0) and np.all(gaps >= 1)
    return bool(ok), "power up in payload, down in bandwidth; gap down in blocklength"


def _fig1_check():
    spec = replace(FIG1, lambda_grid=(10.0, 100.0), n_trials=1000).sweep_spec()
    res = se.run_sweep(spec)
    d = res.get("ftdma_1khz", 100.0).p95_dbm - res.get("fdma", 100.0).p95_dbm
    order = res.get("ftdma_10khz", 100.0).p95_dbm > res.get("ftdma_1khz", 100.0).p95_dbm
    cdma = all(res.get("cdma", lam).p95_dbm < res.get(f, lam).p95_dbm
               for lam in (10.0, 100.0) for f in ("ftdma_1khz", "ftdma_10khz"))
    return 1 <= d <= 6 and order and cdma, f"F-TDMA 1 kHz - FDMA = {d:.2f} dB; CDMA lowest: {cdma}"


def _fig2_check():
    spec = replace(FIG2, lambda_grid=(10.0, 50.0, 200.0), n_trials=1000).sweep_spec()
    res = se.run_sweep(spec)
    ok = all(res.get("sic", l).p95_dbm <= res.get("fdma_opt", l).p95_dbm <= res.get("fdma_equal", l).p95_dbm
             for l in spec.lambda_grid)
    gap50 = res.get("fdma_equal", 50.0).p95_dbm - res.get("fdma_opt", 50.0).p95_dbm
    return ok and gap50 <= 0.5, f"dominance {ok}; equal - optimal at 50/s = {gap50:.3f} dB"


def _fig4_check():
    cfg = replace(FIG4, n_trials=500, search_iterations=12)
    env, sl, ovh, search = cfg.env(), replace(cfg.slice(), payload_l=100.0), cfg.overhead(), cfg.search()
    one = pr.one_stage_max_arrival(100.0, se.StrategySpec("optimal"), env, sl, ovh, search)
    two = pr.two_stage_max_arrival(100.0, ovh, env, sl, search)
    ratio = one.max_arrival_rate / two.max_arrival_rate if two.max_arrival_rate > 0 else math.inf
    return 3 <= ratio <= 30, f"one-stage optimal / two-stage at 100 bits = {ratio:.2f}"


FAST = {
    "sic_capacity_region": check_sic_region,
    "sic_sum_identity": check_sic_sum_identity,
    "cdma_pole_capacity": check_cdma_pole,
    "joint_decode_oracle": check_joint_decode,
    "mac_region_oracle": check_mac_feasible,
    "fade_margin": check_fade_margin,
    "aloha_fixed_point": check_aloha_fixed_point,
    "fdma_optimal_kkt": check_fdma_opt,
    "monotone_laws": check_monotone_laws,
}
FULL = {**FAST, "fig1_preset": _fig1_check, "fig2_preset": _fig2_check, "fig4_preset": _fig4_check}


def run_checks(level: str = "fast", out=print) -> bool:
    checks = {"fast": FAST, "full": FULL}[level]
    all_ok = True
    for name, fn in checks.items():
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= bool(ok)
        out(f"{'PASS' if ok else 'FAIL'} {name} ({time.perf_counter() - t0:.1f}s): {detail}")
    return all_ok
