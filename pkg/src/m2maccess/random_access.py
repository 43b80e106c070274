"""Uncoordinated (RACH) uplink strategies.

* throughput-optimal joint decoding over random codebooks,
* slotted CDMA with equal received power,
* Aloha over frequency bins and time slots (FDMA / F-TDMA).

Population-level simulators (``simulate_*``) work on flattened device arrays
grouped into slices; see :mod:`m2maccess.simengine` for how those are drawn.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import lambertw

from .linkmodel import LinkEnv, ResourceSlice, fade_margin, required_power, sample_distances, pathloss_gain

LN2 = math.log(2.0)
REL_TOL = 1e-12


class PoleExceeded(ValueError):
    """CDMA load at or beyond the pole capacity."""


class Infeasible(RuntimeError):
    def __init__(self, msg, best_outage=1.0):
        super().__init__(msg)
        self.best_outage = best_outage


def split_outage(total: float, parts: int) -> float:
    """Per-part budget e with (1 - e)^parts = 1 - total."""
    if parts < 1:
        raise ValueError("parts must be >= 1")
    return -math.expm1(math.log1p(-total) / parts)


@dataclass(frozen=True)
class RachConfig:
    """Tuning for the RACH strategies.

    ``max_attempts`` bounds the slot grid: a slice of length T is cut into
    m <= max_attempts slots and a message may retry in every slot.
    """

    n_codebooks: int = 65536
    theta_grid: tuple = tuple(np.linspace(0.02, 1.0, 50).round(12))
    bin_width_q: float | None = None
    max_attempts: int = 1024
    target_outage: float = 0.1

    def __post_init__(self):
        if self.n_codebooks < 1:
            raise ValueError("n_codebooks must be positive")
        if not all(0 < t <= 1 for t in self.theta_grid):
            raise ValueError("theta values must lie in (0, 1]")
        if self.bin_width_q is not None and not self.bin_width_q > 0:
            raise ValueError("bin_width_q must be positive")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be positive")
        if not 0 < self.target_outage < 1:
            raise ValueError("target_outage must lie in (0, 1)")


@dataclass
class DecodeOutcome:
    decoded_set: frozenset
    attempted_set: frozenset
    per_device_tx_power: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# multiple-access capacity region

def _mac_feasible_bruteforce(rates, powers, w, noise):
    n = len(rates)
    # every nonempty subset as a row of a 0/1 matrix
    masks = ((np.arange(1, 2 ** n)[:, None] >> np.arange(n)) & 1).astype(float)
    lhs = masks @ rates
    rhs = w * np.log2(1.0 + (masks @ powers) / noise)
    return bool(np.all(lhs <= rhs * (1 + REL_TOL)))


def mac_feasible(rates, rx_powers, w, noise_total, residual_interference=0.0) -> bool:
    """True iff the rate vector lies in the Gaussian MAC capacity region.

    Other users (``residual_interference``) are treated as noise. With equal
    rates only the a-weakest subsets can bind, so those are checked directly;
    unequal rates fall back to enumerating all 2^n - 1 subsets.
    """
    rates = np.asarray(rates, dtype=float)
    powers = np.asarray(rx_powers, dtype=float)
    if rates.shape != powers.shape or rates.ndim != 1:
        raise ValueError("rates and rx_powers must be 1-D and the same length")
    n = rates.size
    if n == 0:
        return True
    if np.any(rates < 0) or np.any(powers < 0):
        raise ValueError("rates and powers must be nonnegative")
    noise = noise_total + residual_interference
    if np.all(rates == rates[0]):
        a = np.arange(1, n + 1)
        weakest = np.cumsum(np.sort(powers))
        return bool(np.all(a * rates[0] <= w * np.log2(1.0 + weakest / noise) * (1 + REL_TOL)))
    if n > 22:
        raise ValueError("unequal-rate feasibility is exhaustive; n > 22 is too large")
    return _mac_feasible_bruteforce(rates, powers, w, noise)


def joint_decode_max_subset(arrivals, rate_per_device, w, noise_total, gains=None) -> DecodeOutcome:
    """Largest jointly decodable set of devices.

    ``arrivals`` is a sequence of ``(rx_power, codebook_id)``. Devices whose
    codebook is shared are undecodable but still interfere. Among the rest, if
    any size-s set is decodable so is the set of the s strongest (swapping in
    a stronger device raises every weakest-subset sum and lowers interference),
    so only the top-s sets are examined, from the largest s down. Ties in
    power go to the lower index.
    """
    n = len(arrivals)
    attempted = frozenset(range(n))
    if n == 0:
        return DecodeOutcome(frozenset(), attempted, [])
    powers = np.array([a[0] for a in arrivals], dtype=float)
    books = [a[1] for a in arrivals]
    counts: dict = {}
    for c in books:
        counts[c] = counts.get(c, 0) + 1
    cand = [i for i in range(n) if counts[books[i]] == 1]
    cand.sort(key=lambda i: (-powers[i], i))
    total = powers.sum()
    best: list = []
    for s in range(len(cand), 0, -1):
        top = cand[:s]
        p_top = powers[top]
        interference = max(total - p_top.sum(), 0.0)
        weakest = np.cumsum(np.sort(p_top))
        a = np.arange(1, s + 1)
        cap = w * np.log2(1.0 + weakest / (noise_total + interference))
        if np.all(a * rate_per_device <= cap * (1 + REL_TOL)):
            best = top
            break
    tx = []
    if gains is not None:
        tx = [float(powers[i] / gains[i]) for i in range(n)]
    return DecodeOutcome(frozenset(best), attempted, tx)


def joint_decode_bruteforce(arrivals, rate_per_device, w, noise_total) -> frozenset:
    """Exhaustive reference for :func:`joint_decode_max_subset`."""
    n = len(arrivals)
    powers = [a[0] for a in arrivals]
    books = [a[1] for a in arrivals]
    shared = {c for c in books if books.count(c) > 1}
    total = sum(powers)
    best, best_key = frozenset(), None
    for r in range(n, 0, -1):
        for subset in itertools.combinations(range(n), r):
            if any(books[i] in shared for i in subset):
                continue
            p_in = sum(powers[i] for i in subset)
            resid = max(total - p_in, 0.0)
            ok = _mac_feasible_bruteforce(
                np.full(r, float(rate_per_device)), np.array([powers[i] for i in subset]), w, noise_total + resid
            )
            if ok:
                key = (-p_in, subset)
                if best_key is None or key < best_key:
                    best, best_key = frozenset(subset), key
        if best_key is not None:
            return best
    return best


# ---------------------------------------------------------------------------
# optimal RACH

def equal_power_thresholds(k_tx: int, n_candidates: int, rho: float, gap: float = 1.0) -> np.ndarray:
    """Normalised SNR x = q / (N0 W) needed to decode at least s devices.

    All ``k_tx`` transmitters arrive at the same power q and ``n_candidates``
    of them have a unique codebook. Entry s-1 is the smallest x at which the
    joint decoder recovers >= s devices (inf if never).
    """
    if n_candidates == 0:
        return np.empty(0)
    s = np.arange(1, n_candidates + 1, dtype=float)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        need = gap * np.expm1(s * rho * LN2)
        denom = s - (k_tx - s) * need
        x = np.where(denom > 0, need / denom, np.inf)
    # decoded(x) = max{s : x_s <= x}; the suffix minimum makes it a count
    return np.minimum.accumulate(x[::-1])[::-1]


def _default_rx_power(k, slice_: ResourceSlice, env: LinkEnv):
    k = max(k, 1)
    rho = slice_.spectral_efficiency
    return env.noise_psd * slice_.bandwidth_w * math.expm1(k * rho * LN2) / k * (1 + 1e-9)


def optimal_rach_expected_throughput(
    k_present: int,
    theta: float,
    cfg: RachConfig,
    slice_: ResourceSlice,
    env: LinkEnv,
    rng: np.random.Generator,
    rx_power: float | None = None,
    n_trials: int = 2000,
) -> float:
    """Mean number of devices decoded per slice.

    Each of ``k_present`` devices transmits with probability ``theta`` on a
    uniformly drawn codebook at received power ``rx_power`` (by default the
    power that lets all ``k_present`` be jointly decoded).
    """
    if k_present == 0 or theta == 0:
        return 0.0
    q = _default_rx_power(k_present, slice_, env) if rx_power is None else rx_power
    rate = slice_.payload_l / slice_.duration_t
    noise = env.noise_psd * slice_.bandwidth_w
    total = 0
    for _ in range(n_trials):
        tx = rng.random(k_present) < theta
        books = rng.integers(0, cfg.n_codebooks, size=k_present)
        arrivals = [(q, int(b)) for b, t in zip(books, tx) if t]
        total += len(joint_decode_max_subset(arrivals, rate, slice_.bandwidth_w, noise).decoded_set)
    return total / n_trials


def optimal_theta(k_present, cfg: RachConfig, slice_, env, rng, rx_power=None, n_trials=500):
    """Throughput over ``cfg.theta_grid`` and the maximising theta."""
    thr = np.array(
        [optimal_rach_expected_throughput(k_present, t, cfg, slice_, env, rng, rx_power, n_trials) for t in cfg.theta_grid]
    )
    return float(cfg.theta_grid[int(np.argmax(thr))]), thr


# ---------------------------------------------------------------------------
# CDMA

def cdma_rx_power(k_simultaneous: int, slice_: ResourceSlice, env: LinkEnv, gap: float = 1.0) -> float:
    """Common received power for k devices that each treat the rest as noise."""
    if k_simultaneous < 1:
        raise ValueError("k_simultaneous must be >= 1")
    g = gap * slice_.snr_threshold
    load = (k_simultaneous - 1) * g
    if load >= 1:
        raise PoleExceeded(f"{k_simultaneous} devices exceed the pole capacity {cdma_pole_capacity(slice_, gap)}")
    return g * env.noise_psd * slice_.bandwidth_w / (1.0 - load)


def cdma_rx_powers(k, slice_: ResourceSlice, env: LinkEnv, gap: float = 1.0):
    """Vectorised :func:`cdma_rx_power`; inf where the pole is exceeded."""
    k = np.asarray(k, dtype=float)
    g = gap * slice_.snr_threshold
    load = (k - 1) * g
    with np.errstate(divide="ignore"):
        return np.where(load < 1, g * env.noise_psd * slice_.bandwidth_w / (1.0 - load), np.inf)


def cdma_pole_capacity(slice_: ResourceSlice, gap: float = 1.0) -> int:
    """Largest k with (k - 1) * gamma < 1."""
    g = gap * slice_.snr_threshold
    k = math.ceil(1.0 / g)
    while (k - 1) * g >= 1:
        k -= 1
    while k * g < 1:
        k += 1
    return max(k, 1)


# ---------------------------------------------------------------------------
# Aloha over bins and slots

def _attempt_sum(p, m):
    # 1 + p + ... + p^(m-1); 1 / (1 - p) for m = inf
    with np.errstate(divide="ignore"):
        return -np.expm1(m * np.log(p)) / (1.0 - p)


def _fixed_point_load(p, m):
    """New-arrival load per resource for which p is a collision fixed point."""
    return -np.log1p(-p) / _attempt_sum(p, m)


# collision probabilities 1 - e^-t for t uniform on [0, 14]: dense near p = 1
_P_GRID = -np.expm1(-np.linspace(0.0, 14.0, 1401))
_CHUNK = 256


@functools.lru_cache(maxsize=4096)
def _running_max_row(m: float):
    g = np.concatenate([[0.0], _fixed_point_load(_P_GRID[1:], m)])
    row = np.maximum.accumulate(g)
    row.flags.writeable = False
    return row


def _running_max_loads(m):
    return np.stack([_running_max_row(float(x)) for x in m])


def _lambert_collision_prob(load):
    ok = load <= 1.0 / math.e
    w0 = lambertw(-np.where(ok, load, 0.0), 0).real
    # W0 is -1 at the branch point, where scipy can return nan
    w0 = np.where(np.isnan(w0) & ok, -1.0, w0)
    return np.where(ok, -np.expm1(w0), 1.0)


def aloha_collision_prob(load, attempts=math.inf):
    """Per-attempt collision probability p with up to ``attempts`` tries.

    ``load`` is new arrivals per resource (lambda * slot / bins). A message
    collided j times retries with probability p^j, so the attempt load is
    load * (1 + p + ... + p^(attempts-1)) and p is the smallest fixed point
    of p = 1 - exp(-attempt load). With unlimited retries that is
    1 - exp(W0(-load)), which exists only for load <= 1/e; beyond it p = 1.
    A finite attempt count always has a fixed point.
    """
    load = np.asarray(load, dtype=float)
    m = np.asarray(attempts, dtype=float)
    if np.any(m < 1):
        raise ValueError("attempts must be >= 1")
    load, m = np.broadcast_arrays(load, m)
    shape = load.shape
    load, m = load.ravel(), m.ravel()
    p = np.ones(load.size)
    inf = np.isinf(m)
    p[inf] = _lambert_collision_prob(load[inf])
    idx = np.flatnonzero(~inf)
    for c in range(0, idx.size, _CHUNK):
        sel = idx[c:c + _CHUNK]
        run = _running_max_loads(m[sel])
        # first grid point whose running-max load reaches the target
        j = (run < load[sel, None]).sum(axis=1)
        hit = j < _P_GRID.size
        j_hit = np.maximum(j[hit], 1)
        lo, hi = _P_GRID[j_hit - 1], _P_GRID[j_hit]
        tgt, mm = load[sel][hit], m[sel][hit]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            up = _fixed_point_load(mid, mm) >= tgt
            hi = np.where(up, mid, hi)
            lo = np.where(up, lo, mid)
        ph = np.where(tgt <= 0, 0.0, hi)
        sub = np.ones(sel.size)
        sub[hit] = ph
        p[sel] = sub
    p = p.reshape(shape)
    return float(p) if p.ndim == 0 else p


def aloha_outage(lam, n_bins, slot_tau, max_attempts):
    """Probability a message is lost after ``max_attempts`` collided tries."""
    if np.any(np.asarray(n_bins) < 1):
        raise ValueError("n_bins must be >= 1")
    load = np.asarray(lam, dtype=float) * slot_tau / n_bins
    m = np.asarray(max_attempts, dtype=float)
    p = np.asarray(aloha_collision_prob(load, m))
    out = np.where(p < 1.0, p ** m, 1.0)
    return float(out) if out.ndim == 0 else out


def max_aloha_load(epsilon, attempts):
    """Largest per-resource load whose outage with ``attempts`` tries is <= epsilon.

    That is the largest fixed-point load over collision probabilities up to
    epsilon^(1/attempts).
    """
    eps, m = np.broadcast_arrays(np.asarray(epsilon, dtype=float), np.asarray(attempts, dtype=float))
    shape = eps.shape
    eps, m = eps.ravel(), m.ravel()
    p_star = eps ** (1.0 / m)
    out = np.empty(eps.size)
    for c in range(0, eps.size, _CHUNK):
        sl = slice(c, c + _CHUNK)
        run = _running_max_loads(m[sl])
        j = np.searchsorted(_P_GRID, p_star[sl], side="right") - 1
        at_grid = run[np.arange(run.shape[0]), j]
        out[sl] = np.maximum(at_grid, _fixed_point_load(p_star[sl], m[sl]))
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class AlohaDesign:
    n_bins: int
    bin_width: float
    slot_tau: float
    attempts: int
    collision_outage: float
    rx_power: float  # required received power per transmission, no fade margin


GapFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def aloha_designs(
    lam: float,
    slice_: ResourceSlice,
    env: LinkEnv,
    epsilon: float,
    bin_width: float | None = None,
    max_slots: int = 1024,
    gap_fn: GapFn | None = None,
):
    """Candidate (bins, slot) designs meeting the collision budget.

    One design per slot count m = 1..max_slots with slot T/m. A fixed
    ``bin_width`` fixes the bin count; otherwise the fewest bins (widest bins,
    hence least power) that meet ``epsilon`` are used. Returns a list of
    :class:`AlohaDesign` (possibly empty) and the best outage seen.
    """
    W, T, L = slice_.bandwidth_w, slice_.duration_t, slice_.payload_l
    m = np.arange(1, max_slots + 1)
    tau = T / m
    if bin_width is None:
        gmax = max_aloha_load(epsilon, m)
        need = lam * tau / gmax
        n = np.maximum(1, np.ceil(need * (1 - 1e-12))).astype(np.int64)
        # bins narrower than one symbol per slot are meaningless
        n = np.where(W / n * tau >= 1.0, n, 0)
    else:
        if bin_width > W * (1 + 1e-12):
            raise ValueError("bin_width exceeds the slice bandwidth")
        n = np.full(m.shape, max(int(round(W / bin_width)), 1), dtype=np.int64)
    valid = n >= 1
    n_safe = np.where(valid, n, 1)
    out = aloha_outage(lam, n_safe, tau, m)
    out = np.where(valid, out, 1.0)
    best_outage = float(out.min())
    ok = valid & (out <= epsilon * (1 + 1e-12))
    if not np.any(ok):
        return [], best_outage
    b = W / n_safe[ok]
    t = tau[ok]
    gap = 1.0 if gap_fn is None else gap_fn(b * t, L / (b * t))
    q = required_power(b, t, L, 1.0, gap, noise_psd=env.noise_psd)
    designs = [
        AlohaDesign(int(nn), float(bb), float(tt), int(mm), float(oo), float(qq))
        for nn, bb, tt, mm, oo, qq in zip(n_safe[ok], b, t, m[ok], out[ok], np.atleast_1d(q))
    ]
    return designs, best_outage


def best_aloha_design(lam, slice_, env, epsilon, bin_width=None, max_slots=1024, gap_fn=None) -> AlohaDesign:
    """Least-power design; every device shares the same received target so
    the minimum-rx design also minimises any percentile of transmit power."""
    designs, best_out = aloha_designs(lam, slice_, env, epsilon, bin_width, max_slots, gap_fn)
    if not designs:
        raise Infeasible(f"no slot size meets outage {epsilon:.4g} at lambda={lam:g}", best_out)
    return min(designs, key=lambda d: (d.rx_power, -d.slot_tau))


def ftdma_optimize(
    lam: float,
    bin_width: float | None,
    slice_: ResourceSlice,
    env: LinkEnv,
    rng: np.random.Generator,
    cfg: RachConfig = RachConfig(),
    n_samples: int = 20000,
    gap_fn: GapFn | None = None,
):
    """Slot size minimising the 95th-percentile transmit power.

    Collision and fading share ``cfg.target_outage`` multiplicatively. Power
    per device is the design's received target times the fade margin over
    its pathloss; the percentile is taken over ``n_samples`` disk drops.
    Returns ``(slot_tau, p95_power_watts)``.
    """
    from .simengine import percentile

    eps = split_outage(cfg.target_outage, 2)
    margin = fade_margin(eps)
    designs, best_out = aloha_designs(lam, slice_, env, eps, bin_width, cfg.max_attempts, gap_fn)
    if not designs:
        raise Infeasible(f"no slot size meets outage {eps:.4g} at lambda={lam:g}", best_out)
    inv_g = 1.0 / pathloss_gain(sample_distances(rng, env, n_samples), env)
    best = None
    for d in designs:
        p95 = percentile(d.rx_power * margin * inv_g, 0.95)
        if best is None or p95 < best[1] or (p95 == best[1] and d.slot_tau > best[0]):
            best = (d.slot_tau, p95)
    return best


# ---------------------------------------------------------------------------
# population simulators. Each takes per-slice device counts ``k`` and flat
# per-device arrays, and returns (tx_power, delivered_mask, info).

def _slice_ids(k):
    return np.repeat(np.arange(len(k)), k)


def simulate_aloha(k, inv_gain, fade, u, lam, slice_, env, eps_collision, eps_fade,
                   bin_width=None, max_slots=1024, gap_fn=None):
    margin = fade_margin(eps_fade)
    design = best_aloha_design(lam, slice_, env, eps_collision, bin_width, max_slots, gap_fn)
    tx = design.rx_power * margin * inv_gain
    delivered = (u[:, 0] >= design.collision_outage) & (fade * margin >= 1.0)
    info = {
        "n_bins": design.n_bins,
        "bin_width_hz": design.bin_width,
        "slot_s": design.slot_tau,
        "attempts": design.attempts,
        "collision_outage": design.collision_outage,
    }
    return tx, delivered, info


def simulate_cdma(k, inv_gain, fade, u, slice_, env, eps_fade, channel_bw=None, gap=1.0):
    """Equal received power per channel; slices past the pole fail entirely."""
    margin = fade_margin(eps_fade)
    W = slice_.bandwidth_w
    n_ch = 1 if channel_bw is None else max(int(W // channel_bw), 1)
    ch_slice = ResourceSlice(W / n_ch, slice_.duration_t, slice_.payload_l)
    sid = _slice_ids(k)
    ch = np.minimum((u[:, 1] * n_ch).astype(np.int64), n_ch - 1)
    cell = sid * n_ch + ch
    occupancy = np.bincount(cell, minlength=len(k) * n_ch)[cell]
    q = cdma_rx_powers(occupancy, ch_slice, env, gap)
    ok = np.isfinite(q)
    tx = np.where(ok, q, np.nan) * margin * inv_gain
    delivered = ok & (fade * margin >= 1.0)
    info = {"channels": n_ch, "pole_capacity": cdma_pole_capacity(ch_slice, gap)}
    return tx, delivered, info


def simulate_optimal(k, inv_gain, fade, u, slice_, env, cfg: RachConfig, eps_collision, eps_fade, gap=1.0):
    """Optimal RACH with a common received-power target.

    The target is the smallest power (over the theta grid) at which the
    fraction of present devices left undecoded, including those that stay
    silent, is within ``eps_collision`` across the simulated population.
    Slices sharing the same (transmitters, unique-codebook devices) pair share
    one threshold table.
    """
    margin = fade_margin(eps_fade)
    rho = slice_.spectral_efficiency
    k = np.asarray(k, dtype=np.int64)
    n_sl = k.size
    n_total = int(k.sum())
    need = math.ceil((1.0 - eps_collision) * n_total - 1e-9)
    sid = _slice_ids(k)
    books = np.minimum((u[:, 1] * cfg.n_codebooks).astype(np.int64), cfg.n_codebooks - 1)
    best = None
    best_frac = 0.0
    for theta in cfg.theta_grid:
        if 1.0 - theta > eps_collision:
            continue
        tx = u[:, 0] < theta
        tx_idx = np.flatnonzero(tx)
        _, inv, cnt = np.unique(sid[tx_idx] * cfg.n_codebooks + books[tx_idx], return_inverse=True,
                                return_counts=True)
        cand = np.zeros(n_total, dtype=bool)
        cand[tx_idx[cnt[inv] == 1]] = True
        n_tx = np.bincount(sid[tx_idx], minlength=n_sl)
        n_c = np.bincount(sid[cand], minlength=n_sl)
        pairs, pair_of_slice, mult = np.unique(n_tx * (n_c.max() + 1) + n_c, return_inverse=True,
                                               return_counts=True)
        tables = [equal_power_thresholds(int(pp // (n_c.max() + 1)), int(pp % (n_c.max() + 1)), rho, gap)
                  for pp in pairs]
        th = np.concatenate(tables)
        w = np.repeat(mult, [t.size for t in tables])
        finite = np.isfinite(th)
        n_ok = int(w[finite].sum())
        best_frac = max(best_frac, n_ok / max(n_total, 1))
        if need == 0:
            x = 0.0
        elif n_ok >= need:
            order = np.argsort(th[finite], kind="stable")
            cum = np.cumsum(w[finite][order])
            x = float(th[finite][order][np.searchsorted(cum, need)])
        else:
            continue
        if best is None or x < best[0]:
            s_pair = np.array([np.searchsorted(t, x * (1 + 1e-12), side="right") for t in tables], dtype=np.int64)
            best = (x, theta, cand, s_pair[pair_of_slice])
    if best is None:
        raise Infeasible("joint decoding cannot meet the collision budget", 1.0 - best_frac)
    x, theta, cand, s_slice = best
    # lowest-index candidates of each slice are the ones decoded
    starts = np.concatenate([[0], np.cumsum(np.bincount(sid[cand], minlength=n_sl))])[:-1]
    rank = np.cumsum(cand) - 1 - starts[sid]
    decoded = cand & (rank < s_slice[sid])
    q = x * env.noise_psd * slice_.bandwidth_w
    tx_power = q * margin * inv_gain
    delivered = decoded & (fade * margin >= 1.0)
    return tx_power, delivered, {"theta": float(theta), "rx_snr": x}
