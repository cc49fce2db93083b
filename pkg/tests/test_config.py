import pytest

from eprcollapse.config import (
    ConfigError,
    build_pgrid,
    build_spectrum,
    dumps,
    parse_config,
    to_internal,
    with_value,
    x2_grid_at,
)


def test_minimal_spin_config():
    cfg = parse_config('subcommand = "spin"\n[spin]\na = 0.8\nb = 0.6\n')
    assert cfg.subcommand == "spin" and cfg.spin.a == 0.8 and cfg.spin.axis == "z"


def test_subcommand_from_command_line():
    assert parse_config("", "timing").subcommand == "timing"
    with pytest.raises(ConfigError, match="subcommand"):
        parse_config('subcommand = "spin"', "timing")


def test_negative_width_names_field():
    with pytest.raises(ConfigError) as err:
        parse_config("[spectral]\nwidth = -1.0\n")
    assert err.value.path == "spectral.width"
    assert "spectral.width" in str(err.value)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="spectral.colour"):
        parse_config("[spectral]\ncolour = 1\n")
    with pytest.raises(ConfigError):
        parse_config("bogus = 1\n")


def test_wrong_type_rejected():
    with pytest.raises(ConfigError, match="spin.n"):
        parse_config("[spin]\nn = 'many'\n")
    # integers are accepted where floats are expected
    assert parse_config("[spectral]\nwidth = 2\n").spectral.width == 2.0


def test_malformed_toml_reports_position():
    with pytest.raises(ConfigError, match=r"line 2"):
        parse_config("[spin]\na = = 0.8\n")


def test_unnormalised_spin_rejected_unless_requested():
    with pytest.raises(ConfigError, match="spin.a"):
        parse_config("[spin]\na = 4.0\nb = 3.0\n")
    assert parse_config("[spin]\na = 4.0\nb = 3.0\nnormalize = true\n").spin.normalize


def test_massless_with_mass_rejected():
    with pytest.raises(ConfigError, match="dispersion.mass"):
        parse_config('[dispersion]\nkind = "massless"\nmass = 1.0\n')
    with pytest.raises(ConfigError, match="dispersion.mass"):
        parse_config('[dispersion]\nkind = "quadratic"\n')


def test_round_trip_is_stable():
    text = """
subcommand = "timing"
seed = 11
[spectral]
family = "lorentzian"
p0 = 5.0
width = 0.2
causal = true
[geometry]
detector_x = -40.0
[mc]
n = 500
"""
    cfg = parse_config(text)
    again = parse_config(dumps(cfg))
    assert again == cfg
    assert dumps(again) == dumps(cfg)


def test_auto_grids_resolved_and_refreshed():
    cfg = parse_config("[spectral]\nwidth = 0.5\n")
    assert cfg.grids.p.auto and cfg.grids.p.max > cfg.grids.p.min
    narrow = with_value(cfg, "spectral.width", 0.05)
    span = lambda c: c.grids.p.max - c.grids.p.min  # noqa: E731
    assert span(narrow) == pytest.approx(span(cfg) / 10)
    assert build_spectrum(narrow).width == 0.05


def test_manual_grid_kept():
    cfg = parse_config("[grids.p]\nauto = false\nmin = 8.0\nmax = 12.0\nn = 101\n")
    g = build_pgrid(cfg)
    assert (g.min, g.max, g.n) == (8.0, 12.0, 101)


def test_x2_grid_follows_packet():
    cfg = parse_config("[geometry]\nx1 = 0.0\n")
    g0, g5 = x2_grid_at(cfg, 0.0), x2_grid_at(cfg, 5.0)
    assert g5.center == pytest.approx(g0.center - 10.0)
    assert g5.n == g0.n


def test_si_units_convert():
    cfg = parse_config('units = "si"\n[geometry]\ndetector_x = -0.299792458\n')
    assert to_internal(cfg, cfg.geometry.detector_x, "length") == pytest.approx(-1.0)
    assert to_internal(cfg, 1.0, "time") == 1.0
    # 1 keV/c in units of hbar / (c ps)
    assert to_internal(cfg, 1.0, "momentum") == pytest.approx(1e3 / 6.582119569e-4, rel=1e-12)
