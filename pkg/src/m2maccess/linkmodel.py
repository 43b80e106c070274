"""Physical-layer primitives: pathloss, Rayleigh fading, fade margin and the
inverse-Shannon power requirement every access strategy builds on.

Shadowing is assumed fully compensated by open-loop power control, so the
only random channel term left is the unit-mean exponential fading power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def db_to_lin(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def lin_to_db(x):
    return 10.0 * np.log10(x)


def dbm_to_watt(x_dbm):
    return 10.0 ** ((np.asarray(x_dbm, dtype=float) - 30.0) / 10.0)


def watt_to_dbm(p):
    return 10.0 * np.log10(p) + 30.0


THERMAL_NOISE_DBM_HZ = -174.0


@dataclass(frozen=True)
class LinkEnv:
    """Cell geometry, receiver noise and fading policy.

    Defaults: thermal noise -174 dBm/Hz plus a 5 dB receiver noise figure,
    38.5 dB loss at the 1 m reference, exponent 3.7 over a 2 km cell and a
    24 dBm device power class.
    """

    noise_psd: float = float(dbm_to_watt(THERMAL_NOISE_DBM_HZ + 5.0))
    cell_radius: float = 2000.0
    pathloss_exponent: float = 3.7
    pathloss_intercept_db: float = 38.5
    fade_outage: float = 0.1
    tx_power_cap: float = float(dbm_to_watt(24.0))

    def __post_init__(self):
        if not self.pathloss_exponent > 2:
            raise ValueError(f"pathloss_exponent must exceed 2, got {self.pathloss_exponent}")
        if not self.cell_radius > 0:
            raise ValueError(f"cell_radius must be positive, got {self.cell_radius}")
        if not 0 < self.fade_outage < 1:
            raise ValueError(f"fade_outage must lie in (0, 1), got {self.fade_outage}")
        if not self.noise_psd > 0:
            raise ValueError(f"noise_psd must be positive, got {self.noise_psd}")
        if not self.tx_power_cap > 0:
            raise ValueError(f"tx_power_cap must be positive, got {self.tx_power_cap}")


@dataclass(frozen=True)
class DeviceDrop:
    distance: float
    fade_gain: float

    def __post_init__(self):
        if not self.distance > 0:
            raise ValueError(f"distance must be positive, got {self.distance}")
        if not self.fade_gain > 0:
            raise ValueError(f"fade_gain must be positive, got {self.fade_gain}")


@dataclass(frozen=True)
class ResourceSlice:
    """Time-bandwidth block (W Hz for T s) carrying an L-bit payload."""

    bandwidth_w: float
    duration_t: float
    payload_l: float

    def __post_init__(self):
        for name in ("bandwidth_w", "duration_t", "payload_l"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def spectral_efficiency(self) -> float:
        """Bits per second per hertz one device needs over the whole slice."""
        return self.payload_l / (self.bandwidth_w * self.duration_t)

    @property
    def snr_threshold(self) -> float:
        return 2.0 ** self.spectral_efficiency - 1.0


def pathloss_gain(d, env: LinkEnv):
    """Power gain 10^(-intercept/10) * d^(-alpha) with d in metres."""
    d = np.asarray(d, dtype=float)
    if np.any(~(d > 0)):
        raise ValueError("distance must be positive")
    g = 10.0 ** (-env.pathloss_intercept_db / 10.0) * d ** (-env.pathloss_exponent)
    return float(g) if g.ndim == 0 else g


def pathloss_db(d, env: LinkEnv):
    return -lin_to_db(pathloss_gain(d, env))


def sample_distances(rng: np.random.Generator, env: LinkEnv, size=None):
    # R*sqrt(u) is uniform over the disk; 1-u keeps u in (0, 1] so d > 0
    u = 1.0 - rng.random(size)
    return env.cell_radius * np.sqrt(u)


def sample_fades(rng: np.random.Generator, size=None):
    return rng.exponential(1.0, size)


def sample_drop(rng: np.random.Generator, env: LinkEnv) -> DeviceDrop:
    """One device placed uniformly in the disk with Rayleigh power fading."""
    d = sample_distances(rng, env)
    h = sample_fades(rng)
    return DeviceDrop(float(d), float(h))


def fade_margin(epsilon: float) -> float:
    """Smallest power factor M with Pr[h < 1/M] <= epsilon for h ~ Exp(1)."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return 1.0 / -math.log1p(-epsilon)


def required_power(b, tau, l, g, gap=1.0, env: LinkEnv | None = None, noise_psd=None):
    """Transmit power for a Shannon link to carry ``l`` bits in ``tau`` seconds.

    P = gap * (N0 * b / g) * (2^(l / (b * tau)) - 1). Broadcasts over numpy
    arrays. Either ``env`` or ``noise_psd`` supplies N0.
    """
    if noise_psd is None:
        if env is None:
            raise TypeError("required_power needs env or noise_psd")
        noise_psd = env.noise_psd
    b = np.asarray(b, dtype=float)
    tau = np.asarray(tau, dtype=float)
    l = np.asarray(l, dtype=float)
    g = np.asarray(g, dtype=float)
    gap = np.asarray(gap, dtype=float)
    if np.any(~(b > 0)) or np.any(~(tau > 0)) or np.any(~(l > 0)) or np.any(~(g > 0)):
        raise ValueError("b, tau, l and g must be positive")
    if np.any(gap < 1):
        raise ValueError("gap must be >= 1")
    p = gap * (noise_psd * b / g) * np.expm1(l / (b * tau) * math.log(2.0))
    return float(p) if p.ndim == 0 else p


def shannon_bits(b, tau, p_rx, noise_psd):
    """Bits a link of bandwidth b carries in tau at received power p_rx."""
    return b * tau * np.log2(1.0 + p_rx / (noise_psd * b))
