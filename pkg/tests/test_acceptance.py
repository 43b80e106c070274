"""Acceptance gate. Each test carries a ``criterion`` mark and the terminal
summary prints one PASS/FAIL line per criterion."""

import math

import numpy as np
import pytest

from m2maccess import protocol as pr
from m2maccess import random_access as ra
from m2maccess import scheduled as sch
from m2maccess import simengine as se
from m2maccess.config import FIG1, FIG4
from m2maccess.linkmodel import LinkEnv, ResourceSlice, fade_margin, required_power
from m2maccess.report import sweep_csv

ENV = LinkEnv()
SLICE = ResourceSlice(100e3, 1.0, 500.0)
N0W = ENV.noise_psd * SLICE.bandwidth_w


def note(request, text):
    request.node.user_properties.append(("detail", text))


# -- 1: SIC / equal-FDMA closed form ---------------------------------------

@pytest.mark.criterion(1)
def test_c1_sic_sum_closed_form(request):
    worst = 0.0
    for k in range(1, 301):
        closed = N0W * math.expm1(k * SLICE.payload_l / (SLICE.bandwidth_w * SLICE.duration_t) * math.log(2))
        sic = sch.sic_rx_powers(np.ones(k), SLICE, ENV.noise_psd).sum()
        fdma = sch.fdma_equal_powers(sch.ScheduledInstance((1.0,) * k, SLICE), ENV).sum()
        worst = max(worst, abs(sic / closed - 1), abs(fdma / closed - 1))
    note(request, f"max rel err {worst:.1e} over K=1..300")
    assert worst < 1e-12


# -- 2: CDMA pole ------------------------------------------------------------

@pytest.mark.criterion(2)
def test_c2_cdma_pole_capacity(request):
    k = ra.cdma_pole_capacity(SLICE)
    assert k == 289 == math.floor(1 + 1 / (2 ** 0.005 - 1))
    note(request, f"pole {k}")


@pytest.mark.criterion(2)
def test_c2_cdma_outage_approaches_one(request):
    grid = (100.0, 200.0, 250.0, 270.0, 289.0, 320.0)
    res = se.run_sweep(se.SweepSpec((se.StrategySpec("cdma"),), grid, n_trials=2000, seed=1))
    out = [res.get("cdma", l).outage for l in grid]
    note(request, "outage " + ", ".join(f"{l:g}:{o:.2f}" for l, o in zip(grid, out)))
    assert all(b >= a - 0.01 for a, b in zip(out, out[1:]))
    assert out[0] <= 0.1 and out[-2] >= 0.5 and out[-1] >= 0.95


# -- 3 and 4: RACH power ordering -------------------------------------------

@pytest.fixture(scope="module")
def rach_sweep():
    spec = FIG1.sweep_spec()
    strategies = tuple(s for s in spec.strategies if s.kind != "optimal")
    spec = se.SweepSpec(strategies, (10.0, 20.0, 50.0, 100.0, 150.0, 200.0), n_trials=5000, seed=1,
                        rach=spec.rach, env=spec.env, slice=spec.slice)
    return se.run_sweep(spec)


@pytest.mark.criterion(3)
def test_c3_ftdma_costs_a_few_db(request, rach_sweep):
    f = rach_sweep.get("fdma", 100.0)
    q1 = rach_sweep.get("ftdma_1khz", 100.0)
    q10 = rach_sweep.get("ftdma_10khz", 100.0)
    gap = q1.p95_dbm - f.p95_dbm
    note(request, f"FTDMA-1k - FDMA = {gap:.2f} dB, FTDMA-10k - FTDMA-1k = {q10.p95_dbm - q1.p95_dbm:.2f} dB")
    assert max(f.stderr_db, q1.stderr_db, q10.stderr_db) < 0.3
    assert 1.0 <= gap <= 6.0
    assert q10.p95_dbm > q1.p95_dbm


@pytest.mark.criterion(4)
def test_c4_cdma_below_every_ftdma(request, rach_sweep):
    margins = []
    for lam in (10.0, 20.0, 50.0, 100.0, 150.0, 200.0):
        c = rach_sweep.get("cdma", lam).p95_dbm
        margins.append(min(rach_sweep.get(s, lam).p95_dbm for s in ("ftdma_1khz", "ftdma_10khz")) - c)
    note(request, f"smallest FTDMA - CDMA margin {min(margins):.2f} dB")
    assert min(margins) > 0


# -- 5 and 6: scheduled strategies ------------------------------------------

@pytest.fixture(scope="module")
def sched_sweep():
    kinds = ("sic", "fdma_opt", "fdma_equal")
    grid = (1.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0)
    return se.run_sweep(se.SweepSpec(tuple(se.StrategySpec(k) for k in kinds), grid, n_trials=2000, seed=1)), grid


@pytest.mark.criterion(5)
def test_c5_equal_fdma_gap(request, sched_sweep):
    res, grid = sched_sweep
    gap = {l: res.get("fdma_equal", l).p95_dbm - res.get("fdma_opt", l).p95_dbm for l in grid}
    note(request, "gap " + ", ".join(f"{l:g}:{g:.2f}" for l, g in gap.items()) + " dB")
    assert all(gap[l] <= 0.5 for l in grid if l * SLICE.duration_t <= 50)
    above = [gap[l] for l in grid if l * SLICE.duration_t >= 50]
    assert all(b > a for a, b in zip(above, above[1:]))


def grid_oracle(g, s, n=2001):
    """Pairwise exchange search: re-split the band of each device pair on a
    refined grid until the total stops improving."""
    k = len(g)
    b = np.full(k, s.bandwidth_w / k)
    cost = lambda bb, gg: required_power(bb, s.duration_t, s.payload_l, gg, env=ENV)
    prev = math.inf
    for _ in range(200):
        for i in range(k):
            for j in range(i + 1, k):
                pool = b[i] + b[j]
                lo, hi = 0.0, pool
                for _ in range(4):
                    x = np.linspace(lo, hi, n)[1:-1]
                    m = int(np.argmin(cost(x, g[i]) + cost(pool - x, g[j])))
                    step = (hi - lo) / (n - 1)
                    lo, hi = max(x[m] - step, 1e-12 * pool), min(x[m] + step, pool * (1 - 1e-12))
                b[i], b[j] = x[m], pool - x[m]
        tot = cost(b, np.asarray(g)).sum()
        if tot > prev * (1 - 1e-13):
            return tot
        prev = tot
    return tot


@pytest.mark.criterion(5)
def test_c5_optimal_fdma_matches_grid_oracle(request):
    rng = np.random.default_rng(2024)
    worst = 0.0
    with np.errstate(over="ignore"):
        for _ in range(100):
            k = int(rng.integers(1, 9))
            g = rng.lognormal(-25, 1.5, k)
            s = ResourceSlice(100e3, 1.0, float(rng.choice([500.0, 5000.0, 50000.0])))
            _, p = sch.fdma_optimal_alloc(sch.ScheduledInstance(tuple(g), s), ENV)
            worst = max(worst, abs(p.sum() / grid_oracle(g, s) - 1))
    note(request, f"oracle rel diff {worst:.1e} on 100 instances")
    assert worst < 1e-4


@pytest.mark.criterion(6)
def test_c6_dominance_at_p95(request, sched_sweep):
    res, grid = sched_sweep
    bad = [l for l in grid if not (res.get("sic", l).p95_tx_power <= res.get("fdma_opt", l).p95_tx_power
                                   <= res.get("fdma_equal", l).p95_tx_power)]
    note(request, f"{len(bad)} p95 violations over {len(grid)} rates")
    assert not bad


@pytest.mark.criterion(6)
def test_c6_dominance_per_instance(request):
    """Per slice: SIC needs the least total received power and optimal FDMA
    the least total transmit power among FDMA splits."""
    n = 0
    for lam in (5.0, 50.0, 500.0):
        pop = se.draw_population(lam, SLICE, ENV, 200, seed=3)
        _, rx_opt = sch.fdma_optimal_rx_batch(pop.k, 1 / pop.inv_gain, SLICE, ENV.noise_psd)
        start = 0
        for k in pop.k:
            if k:
                g = 1 / pop.inv_gain[start:start + k]
                sic = sch.sic_rx_powers(g, SLICE, ENV.noise_psd).sum()
                opt_rx = rx_opt[start:start + k]
                eq_tx = sch.fdma_equal_powers(sch.ScheduledInstance(tuple(g), SLICE), ENV)
                assert sic <= opt_rx.sum() * (1 + 1e-9)
                assert (opt_rx / g).sum() <= eq_tx.sum() * (1 + 1e-9)
                n += 1
            start += k
    note(request, f"0 violations on {n} slices")


# -- 7: one-stage vs two-stage ----------------------------------------------

@pytest.mark.criterion(7)
def test_c7_one_stage_optimal_beats_two_stage_by_an_order(request):
    env, sl, ovh, search, rach = FIG4.env(), FIG4.slice(), FIG4.overhead(), FIG4.search(), FIG4.rach()
    one = pr.one_stage_max_arrival(100.0, se.StrategySpec("optimal"), env, sl, ovh, search, rach)
    two = pr.two_stage_max_arrival(100.0, ovh, env, sl, search)
    ratio = one.max_arrival_rate / two.max_arrival_rate
    note(request, f"lambda* ratio at 100 bits {ratio:.2f} ({one.max_arrival_rate:.1f} / {two.max_arrival_rate:.1f})")
    assert 3 <= ratio <= 30


@pytest.mark.criterion(7)
def test_c7_two_stage_overtakes_aloha(request):
    env, sl, ovh, search = FIG4.env(), FIG4.slice(), FIG4.overhead(), FIG4.search()
    aloha = se.StrategySpec("fdma")
    diff = {}
    for payload in (10.0, 1000.0):
        one = pr.one_stage_max_arrival(payload, aloha, env, sl, ovh, search).max_arrival_rate
        two = pr.two_stage_max_arrival(payload, ovh, env, sl, search).max_arrival_rate
        diff[payload] = (one, two)
    note(request, "aloha vs two-stage: " + ", ".join(f"{p:g} b {a:.1f}/{b:.1f}" for p, (a, b) in diff.items()))
    assert diff[10.0][0] > diff[10.0][1]
    assert diff[1000.0][1] > diff[1000.0][0]


# -- 8: decoder and region oracles ------------------------------------------

@pytest.mark.criterion(8)
def test_c8_joint_decode_matches_exhaustive(request):
    rng = np.random.default_rng(8)
    for _ in range(500):
        k = int(rng.integers(1, 11))
        rx = rng.lognormal(0, 1.5, k) * N0W * 1e-2
        books = rng.integers(0, 12, k)
        arrivals = list(zip(rx.tolist(), books.tolist()))
        rate = float(rng.uniform(100, 2000))
        got = ra.joint_decode_max_subset(arrivals, rate, SLICE.bandwidth_w, N0W)
        want = ra.joint_decode_bruteforce(arrivals, rate, SLICE.bandwidth_w, N0W)
        assert got.decoded_set == want
    note(request, "500 instances agree")


def region_by_definition(rates, rx, w, noise):
    n = len(rates)
    for mask in range(1, 1 << n):
        idx = [i for i in range(n) if mask >> i & 1]
        if sum(rates[i] for i in idx) > w * math.log2(1 + sum(rx[i] for i in idx) / noise) * (1 + 1e-12):
            return False
    return True


@pytest.mark.criterion(8)
def test_c8_mac_feasible_matches_definition(request):
    rng = np.random.default_rng(9)
    agree = 0
    for _ in range(2000):
        n = int(rng.integers(1, 7))
        rates = rng.uniform(100, 3000, n)
        rx = rng.lognormal(-3, 2, n) * N0W
        assert ra.mac_feasible(rates, rx, SLICE.bandwidth_w, N0W) == region_by_definition(rates, rx, SLICE.bandwidth_w, N0W)
        agree += 1
    note(request, f"{agree} instances agree")


# -- 9: determinism ----------------------------------------------------------

@pytest.mark.criterion(9)
def test_c9_worker_count_is_invisible(request):
    spec = FIG1.sweep_spec()
    spec = se.SweepSpec(spec.strategies, (5.0, 50.0, 200.0), n_trials=150, seed=11,
                        rach=spec.rach, env=spec.env, slice=spec.slice)
    outs = {w: sweep_csv(se.run_sweep(spec, workers=w)).encode() for w in (1, 2, 8)}
    reprs = {w: repr(se.run_sweep(spec, workers=w).points) for w in (1, 8)}
    note(request, f"{len(outs[1])} CSV bytes identical for 1, 2 and 8 workers")
    assert outs[1] == outs[2] == outs[8]
    assert reprs[1] == reprs[8]


# -- 10: statistical sanity --------------------------------------------------

@pytest.mark.criterion(10)
def test_c10_fade_margin_and_poisson(request):
    m = fade_margin(0.1)
    assert 10 * math.log10(m) == pytest.approx(9.77, abs=0.005)
    h = np.random.default_rng(10).exponential(1.0, 1_000_000)
    p = float(np.mean(h * m < 1))
    assert 0.09 <= p <= 0.11
    rng = np.random.default_rng(11)
    n, lam = 200_000, 12.0
    x = np.array([se.arrivals_per_slice(lam, SLICE, rng) for _ in range(n)])
    assert abs(x.mean() - lam) < 3 * math.sqrt(lam / n)
    assert abs(x.var(ddof=1) - lam) < 3 * math.sqrt((lam + 2 * lam ** 2) / n)
    note(request, f"margin {10 * math.log10(m):.3f} dB, outage {p:.4f}, mean {x.mean():.3f}, var {x.var(ddof=1):.3f}")
