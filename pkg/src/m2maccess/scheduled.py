"""Contention-free uplink: weakest-last SIC and FDMA with equal or
sum-power-optimal bandwidth split.

All three allocate received-power targets that do not depend on the gains
(apart from the SIC decode order and the FDMA split), so transmit power is
target / gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import lambertw

from .linkmodel import LinkEnv, ResourceSlice, fade_margin, required_power

LN2 = math.log(2.0)


class NumericalFailure(RuntimeError):
    def __init__(self, msg, residual):
        super().__init__(f"{msg} (residual {residual:.3g})")
        self.residual = residual


@dataclass(frozen=True)
class ScheduledInstance:
    gains: tuple
    slice: ResourceSlice

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=float)
        if g.ndim != 1 or g.size < 1:
            raise ValueError("need at least one gain")
        if np.any(~(g > 0)):
            raise ValueError("gains must be positive")

    @property
    def k(self) -> int:
        return len(self.gains)


def sic_rx_powers(gains, slice_: ResourceSlice, noise_psd: float, gap: float = 1.0):
    """Received-power targets in input order.

    The i-th decoded device (strongest first) sees the K - i weaker ones as
    noise, so it needs Gamma * N0 W * (1 + Gamma)^(K - i). Equal gains keep
    index order.
    """
    g = np.asarray(gains, dtype=float)
    K = g.size
    snr = gap * slice_.snr_threshold
    order = np.lexsort((np.arange(K), -g))
    pos = np.empty(K, dtype=np.int64)
    pos[order] = np.arange(1, K + 1)
    return snr * noise_psd * slice_.bandwidth_w * np.exp((K - pos) * math.log1p(snr))


def sic_tx_powers(inst: ScheduledInstance, env: LinkEnv, gap: float = 1.0):
    g = np.asarray(inst.gains, dtype=float)
    return sic_rx_powers(g, inst.slice, env.noise_psd, gap) / g


def fdma_equal_powers(inst: ScheduledInstance, env: LinkEnv, gap: float = 1.0):
    s = inst.slice
    g = np.asarray(inst.gains, dtype=float)
    return np.atleast_1d(required_power(s.bandwidth_w / inst.k, s.duration_t, s.payload_l, g, gap, env))


# ---------------------------------------------------------------------------
# optimal FDMA split

def _psi(v):
    # (v - 1) e^v + 1, written to stay accurate for small v
    return (v - 1.0) * np.expm1(v) + v


def _v_of_y(y):
    """Solve (v - 1) e^v + 1 = y for v >= 0 (y >= 0)."""
    y = np.asarray(y, dtype=float)
    v = 1.0 + lambertw((y - 1.0) / math.e, 0).real
    v = np.where(y < 1e-6, np.sqrt(2.0 * y), np.maximum(v, 0.0))
    for _ in range(3):
        step = (_psi(v) - y) / np.maximum(v * np.exp(v), 1e-300)
        v = np.maximum(v - step, 0.5 * v)
    return v


def _bandwidths_for_mu(mu, gains, noise_psd, bits_per_s):
    # stationarity: (N0/g) psi(L ln2 / (b T)) = mu
    v = _v_of_y(mu * gains / noise_psd)
    with np.errstate(divide="ignore"):
        return bits_per_s * LN2 / v


def _mu_bracket(gains, noise_psd, bits_per_s, W, K):
    v_eq = bits_per_s * LN2 * K / W
    mu_eq = noise_psd / gains * _psi(v_eq)
    return mu_eq.min(), mu_eq.max()


def fdma_optimal_alloc(inst: ScheduledInstance, env: LinkEnv, tol: float = 1e-10, max_iter: int = 400, gap: float = 1.0):
    """Sum-power-minimising bandwidth split.

    Outer bisection (in log mu) on the Lagrange multiplier of sum(b) = W.
    For a given mu each device's stationarity condition is solved in closed
    form via Lambert W, then polished with Newton steps.

    Returns ``(bandwidths, tx_powers)``.
    """
    s = inst.slice
    g = np.asarray(inst.gains, dtype=float)
    K, W = inst.k, s.bandwidth_w
    n0 = env.noise_psd * gap
    bits_per_s = s.payload_l / s.duration_t
    lo, hi = _mu_bracket(g, n0, bits_per_s, W, K)
    if lo == hi:
        b = np.full(K, W / K)
    else:
        llo, lhi = math.log(lo), math.log(hi)
        for _ in range(max_iter):
            mid = 0.5 * (llo + lhi)
            total = _bandwidths_for_mu(math.exp(mid), g, n0, bits_per_s).sum()
            if total > W:
                llo = mid
            else:
                lhi = mid
            if lhi - llo < tol * 1e-2:
                break
        else:
            b = _bandwidths_for_mu(math.exp(0.5 * (llo + lhi)), g, n0, bits_per_s)
            raise NumericalFailure("mu bisection did not converge", abs(b.sum() - W) / W)
        b = _bandwidths_for_mu(math.exp(0.5 * (llo + lhi)), g, n0, bits_per_s)
        b *= W / b.sum()
    p = np.atleast_1d(required_power(b, s.duration_t, s.payload_l, g, gap, env))
    return b, p


def kkt_residual(bandwidths, inst: ScheduledInstance, env: LinkEnv, gap: float = 1.0) -> float:
    """Relative spread of the marginal sum-power cost dP_i/db_i across devices
    plus the relative violation of sum(b) = W."""
    s = inst.slice
    b = np.asarray(bandwidths, dtype=float)
    g = np.asarray(inst.gains, dtype=float)
    v = s.payload_l * LN2 / (b * s.duration_t)
    mu = env.noise_psd * gap / g * _psi(v)
    spread = (mu.max() - mu.min()) / mu.mean()
    return float(spread + abs(b.sum() - s.bandwidth_w) / s.bandwidth_w)


def fdma_optimal_rx_batch(k, gains, slice_: ResourceSlice, noise_psd: float, gap: float = 1.0, tol: float = 1e-10,
                          max_iter: int = 200):
    """Optimal split for many slices at once; returns (bandwidths, rx_powers).

    ``k`` holds per-slice device counts and ``gains`` the flat gains in slice
    order. Every slice runs its own safeguarded Newton search on log mu,
    vectorised together.
    """
    k = np.asarray(k, dtype=np.int64)
    g = np.asarray(gains, dtype=float)
    n_sl = k.size
    if g.size == 0:
        return np.empty(0), np.empty(0)
    sid = np.repeat(np.arange(n_sl), k)
    W = slice_.bandwidth_w
    n0 = noise_psd * gap
    bits_per_s = slice_.payload_l / slice_.duration_t
    ksafe = np.maximum(k, 1)
    v_eq = bits_per_s * LN2 * ksafe[sid] / W
    mu_eq = n0 / g * _psi(v_eq)
    lo = np.full(n_sl, np.inf)
    hi = np.full(n_sl, -np.inf)
    np.minimum.at(lo, sid, mu_eq)
    np.maximum.at(hi, sid, mu_eq)
    active = k > 0
    llo = np.log(np.where(active, lo, 1.0))
    lhi = np.log(np.where(active, hi, 1.0))
    x = 0.5 * (llo + lhi)
    # Newton in log mu, falling back to bisection when a step leaves the bracket
    for _ in range(max_iter):
        mu = np.exp(x)[sid]
        v = _v_of_y(mu * g / n0)
        b = bits_per_s * LN2 / v
        total = np.bincount(sid, weights=b, minlength=n_sl)
        # db/dlog(mu) = -(b / v) * y / (v e^v)
        slope = np.bincount(sid, weights=-(b / v) * (mu * g / n0) / (v * np.exp(v)), minlength=n_sl)
        err = total - W
        if np.all(np.abs(err[active]) <= tol * W):
            break
        big = err > 0
        llo = np.where(big, x, llo)
        lhi = np.where(big, lhi, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = x - err / slope
        inside = np.isfinite(step) & (step > llo) & (step < lhi)
        x = np.where(active, np.where(inside, step, 0.5 * (llo + lhi)), x)
    else:
        raise NumericalFailure("batched mu search did not converge", float(np.max(np.abs(err[active])) / W))
    b *= (W / np.where(total > 0, total, W))[sid]
    rx = np.atleast_1d(required_power(b, slice_.duration_t, slice_.payload_l, 1.0, gap, noise_psd=noise_psd))
    return b, rx


# ---------------------------------------------------------------------------
# population simulator

def simulate_scheduled(kind, k, inv_gain, fade, slice_, env, eps_fade, fade_in_gains=False, gap=1.0, gap_fn=None):
    """Transmit powers for every device under ``kind`` in {sic, fdma_equal, fdma_opt}.

    Gains default to pathloss only (perfect estimates of the mean channel);
    ``fade_in_gains`` folds the fade draw into the scheduler's gains instead.
    A fade margin still covers fading, and deep fades are the only losses.
    ``gap_fn(n_symbols, bits_per_symbol)`` only applies to equal FDMA.
    """
    margin = 1.0 if fade_in_gains else fade_margin(eps_fade)
    k = np.asarray(k, dtype=np.int64)
    g = 1.0 / inv_gain
    if fade_in_gains:
        g = g * fade
    sid = np.repeat(np.arange(k.size), k)
    W, T, L = slice_.bandwidth_w, slice_.duration_t, slice_.payload_l
    if kind == "sic":
        snr = gap * slice_.snr_threshold
        order = np.lexsort((np.arange(g.size), -g, sid))
        starts = np.concatenate([[0], np.cumsum(k)])[:-1]
        pos = np.empty(g.size, dtype=np.int64)
        pos[order] = np.arange(g.size) - np.repeat(starts, k) + 1
        rx = snr * env.noise_psd * W * np.exp((k[sid] - pos) * math.log1p(snr))
        info = {}
    elif kind == "fdma_equal":
        b = W / np.maximum(k[sid], 1)
        gp = gap if gap_fn is None else gap_fn(b * T, L / (b * T))
        rx = required_power(b, T, L, 1.0, gp, noise_psd=env.noise_psd) if g.size else np.empty(0)
        info = {}
    elif kind == "fdma_opt":
        _, rx = fdma_optimal_rx_batch(k, g, slice_, env.noise_psd, gap)
        info = {}
    else:
        raise ValueError(f"unknown scheduled strategy {kind!r}")
    tx = np.atleast_1d(rx) / g * margin
    if fade_in_gains:
        delivered = np.ones(g.size, dtype=bool)
    else:
        delivered = fade * margin >= 1.0
    return tx, delivered, info
