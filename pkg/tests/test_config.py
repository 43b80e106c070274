import pytest
from hypothesis import given, strategies as st

from m2maccess import config as cf
from m2maccess.config import ConfigError, apply_overrides, echo, parse_config


@pytest.mark.parametrize("name", sorted(cf.PRESETS))
def test_echo_round_trips_byte_exact(name):
    text = echo(cf.PRESETS[name])
    again = parse_config(text)
    assert again == cf.PRESETS[name]
    assert echo(again) == text


@given(st.floats(1e-3, 1e9), st.floats(1e-3, 1e3), st.integers(1, 10**6))
def test_numeric_values_round_trip(bw, dur, seed):
    cfg = cf.RunConfig(bandwidth=bw, duration=dur, seed=seed)
    assert parse_config(echo(cfg)) == cfg


def test_units_are_converted():
    cfg = parse_config(
        "bandwidth = 10 kHz\nduration = 250 ms\ncell_radius = 1.5 km\n"
        "tx_power_cap = 100 mW\nlambda_grid = 1, 2, 3 /s\nstrategies = ftdma: 1 kHz, sic  # comment\n"
    )
    assert cfg.bandwidth == 10e3 and cfg.duration == 0.25 and cfg.cell_radius == 1500
    assert cfg.tx_power_cap == pytest.approx(20.0)
    assert cfg.lambda_grid == (1.0, 2.0, 3.0)
    assert cfg.strategies == ("ftdma:1000.0Hz", "sic")


def test_comments_and_blank_lines_ignored():
    assert parse_config("\n# only a comment\n   \n") == cf.RunConfig()


@pytest.mark.parametrize("text, needle", [
    ("seed = 3\nbogus = 1\n", "line 2: unknown key 'bogus'"),
    ("bandwidth = 100\n", "line 1: key 'bandwidth'"),
    ("bandwidth = 100 furlongs\n", "line 1: key 'bandwidth'"),
    ("seed = 1.5\n", "line 1: key 'seed'"),
    ("blocklength = maybe\n", "line 1: key 'blocklength'"),
    ("just words\n", "line 1: expected 'key = value'"),
    ("seed = 1\n\nseed = 2\n", "line 3: key 'seed' already set on line 1"),
    ("strategies = sic:1 kHz\n", "line 1: key 'strategies'"),
    ("duration = nan s\n", "line 1: key 'duration'"),
])
def test_errors_name_line_and_key(text, needle):
    with pytest.raises(ConfigError, match=needle.replace("(", r"\(")):
        parse_config(text)


@pytest.mark.parametrize("text", [
    "lambda_grid = /s\n",
    "n_trials = 0\n",
    "outage = 1.5\n",
    "strategies = sic, sic\n",
    "mode = histogram\n",
])
def test_semantic_validation(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_overrides():
    cfg = apply_overrides(cf.FIG1, ["seed=9", "bandwidth = 50 kHz"])
    assert cfg.seed == 9 and cfg.bandwidth == 50e3
    assert cfg.strategies == cf.FIG1.strategies
    with pytest.raises(ConfigError, match="--set nope"):
        apply_overrides(cf.FIG1, ["nope=1"])
    with pytest.raises(ConfigError, match="--set bandwidth"):
        apply_overrides(cf.FIG1, ["bandwidth=1"])


def test_derived_objects():
    cfg = cf.FIG4
    assert cfg.env().pathloss_intercept_db == 17.28
    assert cfg.slice().bandwidth_w == 10e3
    assert [s.label for s in cf.FIG1.strategy_specs()] == ["optimal", "cdma", "fdma", "ftdma_1khz", "ftdma_10khz"]
    assert cfg.overhead().dl_cap == pytest.approx(258.75)
