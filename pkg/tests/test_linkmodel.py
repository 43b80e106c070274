import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from m2maccess.linkmodel import (
    DeviceDrop,
    LinkEnv,
    ResourceSlice,
    dbm_to_watt,
    fade_margin,
    pathloss_db,
    pathloss_gain,
    required_power,
    sample_distances,
    sample_drop,
    shannon_bits,
    watt_to_dbm,
)

ENV = LinkEnv()
pos = st.floats(1e-3, 1e6, allow_nan=False)


def test_default_noise_is_thermal_plus_figure():
    assert watt_to_dbm(ENV.noise_psd) == pytest.approx(-169.0, abs=1e-12)
    assert ENV.tx_power_cap == pytest.approx(10 ** (24 / 10) * 1e-3)


@pytest.mark.parametrize(
    "kw", [dict(pathloss_exponent=2.0), dict(cell_radius=0), dict(fade_outage=1.0), dict(noise_psd=-1.0)]
)
def test_env_rejects_bad_fields(kw):
    with pytest.raises(ValueError):
        LinkEnv(**kw)


def test_slice_and_drop_validation():
    with pytest.raises(ValueError):
        ResourceSlice(0, 1, 1)
    with pytest.raises(ValueError):
        DeviceDrop(0.0, 1.0)
    assert ResourceSlice(100e3, 1, 500).snr_threshold == pytest.approx(2 ** 0.005 - 1, rel=1e-14)


def test_pathloss_reference_and_cell_edge():
    assert pathloss_gain(1.0, ENV) == pytest.approx(10 ** (-3.85), rel=1e-14)
    # 38.5 + 37 log10(2000)
    assert pathloss_db(2000.0, ENV) == pytest.approx(38.5 + 37 * math.log10(2000), abs=1e-9)
    assert pathloss_db(2000.0, ENV) == pytest.approx(160.6, abs=0.05)


@given(st.floats(0.1, 1e5))
def test_pathloss_power_law(d):
    assert pathloss_gain(2 * d, ENV) / pathloss_gain(d, ENV) == pytest.approx(2 ** -3.7, rel=1e-12)


def test_pathloss_rejects_nonpositive():
    with pytest.raises(ValueError):
        pathloss_gain(0.0, ENV)
    with pytest.raises(ValueError):
        pathloss_gain(np.array([1.0, -2.0]), ENV)


def test_drop_statistics():
    rng = np.random.default_rng(3)
    d = sample_distances(rng, ENV, 200_000)
    assert d.max() <= ENV.cell_radius and d.min() > 0
    # disk-uniform radius: E[d] = 2R/3, sd = R/sqrt(18)
    se = ENV.cell_radius / math.sqrt(18) / math.sqrt(d.size)
    assert abs(d.mean() - 2 * ENV.cell_radius / 3) < 4 * se
    h = np.array([sample_drop(rng, ENV).fade_gain for _ in range(20_000)])
    assert abs(h.mean() - 1.0) < 4 / math.sqrt(h.size)


def test_drop_is_reproducible():
    a = sample_drop(np.random.default_rng(5), ENV)
    b = sample_drop(np.random.default_rng(5), ENV)
    assert a == b


def test_fade_margin_values():
    assert fade_margin(-math.expm1(-1.0)) == pytest.approx(1.0, rel=1e-12)
    assert fade_margin(0.1) == pytest.approx(9.4912, abs=1e-4)
    assert 10 * math.log10(fade_margin(0.1)) == pytest.approx(9.77, abs=0.005)
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            fade_margin(bad)


@given(st.floats(1e-6, 0.99), st.floats(1e-6, 0.99))
def test_fade_margin_monotone(a, b):
    if a < b:
        assert fade_margin(a) > fade_margin(b)


def test_fade_margin_empirical_outage():
    m = fade_margin(0.1)
    h = np.random.default_rng(9).exponential(1.0, 200_000)
    p = np.mean(h < 1 / m)
    assert abs(p - 0.1) < 3 * math.sqrt(0.1 * 0.9 / h.size)


def test_required_power_closed_forms():
    assert required_power(1e3, 1.0, 1e3, 0.5, env=ENV) == pytest.approx(ENV.noise_psd * 1e3 / 0.5, rel=1e-14)
    p = required_power(100e3, 1.0, 500, 1.0, env=ENV)
    assert p / (ENV.noise_psd * 100e3) == pytest.approx(2 ** 0.005 - 1, rel=1e-13)
    assert p / (ENV.noise_psd * 100e3) == pytest.approx(3.4722e-3, rel=2e-4)
    with pytest.raises(ValueError):
        required_power(1e3, 1.0, 100, 1.0, gap=0.9, env=ENV)
    with pytest.raises(TypeError):
        required_power(1e3, 1.0, 100, 1.0)


@given(b=pos, tau=st.floats(1e-3, 10), l=st.floats(1, 1e4), g=st.floats(1e-15, 1), gap=st.floats(1, 10))
def test_required_power_inverts_shannon(b, tau, l, g, gap):
    if l / (b * tau) > 200:
        return
    p = required_power(b, tau, l, g, gap, env=ENV)
    assert shannon_bits(b, tau, p / gap * g, ENV.noise_psd) == pytest.approx(l, rel=1e-9)


@given(b=pos, l=st.floats(1, 1e4), g=st.floats(1e-15, 1), c=st.floats(1.01, 10))
def test_required_power_monotonicity(b, l, g, c):
    if l / b > 100:
        return
    p = required_power(b, 1.0, l, g, env=ENV)
    assert required_power(b * c, 1.0, l, g, env=ENV) < p
    assert required_power(b, c, l, g, env=ENV) < p
    assert required_power(b, 1.0, l * c, g, env=ENV) > p
    assert required_power(b, 1.0, l, g, c, env=ENV) == pytest.approx(c * p, rel=1e-12)
    assert required_power(b, 1.0, l, g / c, env=ENV) == pytest.approx(c * p, rel=1e-12)


def test_composite_gain_matches_pathloss_inversion():
    d = np.array([10.0, 500.0, 1999.0])
    rx = required_power(1e3, 1.0, 100, 1.0, env=ENV)
    tx = required_power(1e3, 1.0, 100, pathloss_gain(d, ENV), env=ENV)
    np.testing.assert_allclose(tx, rx / pathloss_gain(d, ENV), rtol=1e-13)


def test_dbm_roundtrip():
    assert watt_to_dbm(dbm_to_watt(17.3)) == pytest.approx(17.3, abs=1e-12)
