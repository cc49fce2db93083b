"""Scenario configuration: a TOML document with one table per concern.

Every key has a default and every default is written back out by ``dumps``,
so a resolved config echoes the complete set of physics inputs. Unknown keys
are errors.

Units: with ``units = "natural"`` everything is in internal units (hbar = c = 1,
time in ps). With ``units = "si"`` momenta are keV/c, masses keV/c^2, lengths
mm and times ps.

Grids flagged ``auto = true`` get their bounds from the spectrum and geometry;
the resolved bounds are stored alongside the flag and recomputed whenever a
sweep changes a parameter. The x2 grid bounds are offsets from the expected
packet centre at each time.
"""
from __future__ import annotations

import copy
import dataclasses
import math
import typing
from dataclasses import dataclass, field

import tomli_w

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import dispersion as disp
from . import spectral as spec
from .conditional import expected_center
from .timing import default_tgrid
from .units import UNITS, Grid1D, make_grid

SUBCOMMANDS = ("collapse", "timing", "lifetime", "spin", "sweep")
UNIT_MODES = ("natural", "si")

SI_UNITS = {"momentum": "keV/c", "mass": "keV", "length": "mm", "time": "ps"}


class ConfigError(ValueError):
    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass
class SpectralConfig:
    family: str = "gaussian"
    p0: float = 10.0
    # for the flat family this is the half-width of the momentum window
    width: float = 0.5
    causal: bool = False


@dataclass
class DispersionConfig:
    kind: str = "massless"
    mass: float = 0.0


@dataclass
class GeometryConfig:
    x1: float = 0.0
    detector_x: float = -20.0
    times: list[float] = field(default_factory=lambda: [0.0, 1.0])


@dataclass
class GridConfig:
    auto: bool = True
    min: float = 0.0
    max: float = 0.0
    n: int = 1025


@dataclass
class GridsConfig:
    x2: GridConfig = field(default_factory=GridConfig)
    t: GridConfig = field(default_factory=lambda: GridConfig(n=2049))
    p: GridConfig = field(default_factory=GridConfig)


@dataclass
class MCConfig:
    n: int = 0
    jitter: float = 0.0
    bins: int = 200


@dataclass
class SpinConfig:
    a: float = 0.8
    b: float = 0.6
    axis: str = "z"
    n: int = 100000
    normalize: bool = False


@dataclass
class LifetimeConfig:
    tau: float = 119.0
    n_t: int = 4097
    n_p: int = 16385
    p_span: float = 400.0


@dataclass
class SweepConfig:
    scenario: str = "timing"
    parameter: str = "spectral.width"
    values: list[float] = field(default_factory=list)


@dataclass
class OutputConfig:
    dir: str = "out"
    formats: list[str] = field(default_factory=lambda: ["csv"])


@dataclass
class ScenarioConfig:
    subcommand: str = "collapse"
    seed: int = 0
    units: str = "natural"
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    dispersion: DispersionConfig = field(default_factory=DispersionConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    grids: GridsConfig = field(default_factory=GridsConfig)
    mc: MCConfig = field(default_factory=MCConfig)
    spin: SpinConfig = field(default_factory=SpinConfig)
    lifetime: LifetimeConfig = field(default_factory=LifetimeConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


# --- structural parsing ---------------------------------------------------

def _build(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError("expected a table", path)
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in names:
            raise ConfigError(f"unknown key {key!r}", f"{path}.{key}" if path else key)
    kwargs = {}
    for name in names:
        if name in data:
            sub = f"{path}.{name}" if path else name
            kwargs[name] = _coerce(data[name], hints[name], sub)
    return cls(**kwargs)


def _coerce(value, typ, path):
    if dataclasses.is_dataclass(typ):
        return _build(typ, value, path)
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {value!r}", path)
        return value
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", path)
        return value
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", path)
        if not math.isfinite(value):
            raise ConfigError("must be finite", path)
        return float(value)
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", path)
        return value
    if typing.get_origin(typ) is list:
        if not isinstance(value, list):
            raise ConfigError(f"expected a list, got {value!r}", path)
        (item,) = typing.get_args(typ)
        return [_coerce(v, item, f"{path}[{i}]") for i, v in enumerate(value)]
    raise TypeError(f"unsupported config type {typ}")


def _validate(cfg: ScenarioConfig):
    def need(ok, msg, path):
        if not ok:
            raise ConfigError(msg, path)

    need(cfg.subcommand in SUBCOMMANDS, f"must be one of {SUBCOMMANDS}", "subcommand")
    need(cfg.units in UNIT_MODES, f"must be one of {UNIT_MODES}", "units")
    need(cfg.seed >= 0, "must be non-negative", "seed")
    s = cfg.spectral
    need(s.family in spec.FAMILIES, f"must be one of {spec.FAMILIES}", "spectral.family")
    need(s.width > 0, "must be positive", "spectral.width")
    need(not s.causal or s.family == "lorentzian", "only a lorentzian can be causal", "spectral.causal")
    d = cfg.dispersion
    need(d.kind in disp.KINDS, f"must be one of {disp.KINDS}", "dispersion.kind")
    if d.kind == "massless":
        need(d.mass == 0, "must be 0 for massless dispersion", "dispersion.mass")
    else:
        need(d.mass > 0, "must be positive", "dispersion.mass")
    need(len(cfg.geometry.times) > 0, "needs at least one time", "geometry.times")
    for name in ("x2", "t", "p"):
        g = getattr(cfg.grids, name)
        need(g.n >= 2, "must be at least 2", f"grids.{name}.n")
        if not g.auto:
            need(g.max > g.min, "max must exceed min", f"grids.{name}.max")
    need(cfg.mc.n >= 0, "must be non-negative", "mc.n")
    need(cfg.mc.jitter >= 0, "must be non-negative", "mc.jitter")
    need(cfg.mc.bins >= 1, "must be at least 1", "mc.bins")
    sp = cfg.spin
    need(sp.axis in ("x", "z"), "must be 'x' or 'z'", "spin.axis")
    need(sp.n >= 1, "must be at least 1", "spin.n")
    if sp.normalize:
        need(sp.a != 0 or sp.b != 0, "a and b cannot both be zero", "spin.a")
    else:
        need(abs(sp.a ** 2 + sp.b ** 2 - 1) <= 1e-9, "a^2 + b^2 must be 1 (or set normalize = true)", "spin.a")
    lt = cfg.lifetime
    need(lt.tau > 0, "must be positive", "lifetime.tau")
    need(lt.n_t >= 2, "must be at least 2", "lifetime.n_t")
    need(lt.n_p >= 2, "must be at least 2", "lifetime.n_p")
    need(lt.p_span > 0, "must be positive", "lifetime.p_span")
    sw = cfg.sweep
    need(sw.scenario in SUBCOMMANDS[:-1], f"must be one of {SUBCOMMANDS[:-1]}", "sweep.scenario")
    if cfg.subcommand == "sweep":
        need(len(sw.values) > 0, "a sweep needs at least one value", "sweep.values")
        try:
            current = get_path(cfg, sw.parameter)
        except (AttributeError, ConfigError):
            raise ConfigError(f"no such parameter {sw.parameter!r}", "sweep.parameter") from None
        need(isinstance(current, (int, float)) and not isinstance(current, bool),
             "must name a numeric parameter", "sweep.parameter")
        need(not sw.parameter.startswith(("sweep.", "output.")), "cannot sweep this section",
             "sweep.parameter")
    need(set(cfg.output.formats) <= {"csv"}, "only 'csv' is supported", "output.formats")


def get_path(cfg, dotted: str):
    obj = cfg
    for part in dotted.split("."):
        if not dataclasses.is_dataclass(obj):
            raise ConfigError(f"{dotted!r} does not name a value")
        obj = getattr(obj, part)
    return obj


def with_value(cfg: ScenarioConfig, dotted: str, value) -> ScenarioConfig:
    """Copy of ``cfg`` with one dotted parameter replaced and auto grids re-resolved."""
    out = copy.deepcopy(cfg)
    *head, last = dotted.split(".")
    obj = out
    for part in head:
        obj = getattr(obj, part)
    current = getattr(obj, last)
    setattr(obj, last, type(current)(value))
    _validate(out)
    return resolve(out)


# --- unit handling and physics objects ------------------------------------

def to_internal(cfg: ScenarioConfig, value, quantity: str):
    if cfg.units == "natural":
        return value
    return UNITS.to_internal(value, SI_UNITS[quantity])


def from_internal(cfg: ScenarioConfig, value, quantity: str):
    if cfg.units == "natural":
        return value
    return UNITS.from_internal(value, SI_UNITS[quantity])


def build_spectrum(cfg: ScenarioConfig) -> spec.SpectralAmplitude:
    s = cfg.spectral
    p0 = to_internal(cfg, s.p0, "momentum")
    if s.family == "flat":
        return spec.flat()
    return spec.SpectralAmplitude(s.family, p0, to_internal(cfg, s.width, "momentum"), s.causal)


def build_dispersion(cfg: ScenarioConfig) -> disp.DispersionRelation:
    d = cfg.dispersion
    mass = to_internal(cfg, d.mass, "mass") if d.kind != "massless" else 0.0
    return disp.DispersionRelation(d.kind, mass)


def _grid(cfg, g: GridConfig, quantity: str) -> Grid1D:
    return make_grid(to_internal(cfg, g.min, quantity), to_internal(cfg, g.max, quantity), g.n)


def build_pgrid(cfg: ScenarioConfig) -> Grid1D:
    return _grid(cfg, cfg.grids.p, "momentum")


def build_tgrid(cfg: ScenarioConfig) -> Grid1D:
    return _grid(cfg, cfg.grids.t, "time")


def build_x2_offsets(cfg: ScenarioConfig) -> Grid1D:
    return _grid(cfg, cfg.grids.x2, "length")


def _auto_pgrid(cfg, f, n) -> Grid1D:
    if f.family == "flat":
        p0 = to_internal(cfg, cfg.spectral.p0, "momentum")
        w = to_internal(cfg, cfg.spectral.width, "momentum")
        return make_grid(p0 - w, p0 + w, n)
    return spec.default_pgrid(f, n)


def _position_scale(f, pgrid) -> float:
    # position-space width scale of the t = 0 packet, times a tail allowance
    if f.family == "gaussian":
        return 8.0 * 0.5 / f.width
    if f.family == "lorentzian":
        return 25.0 * 0.5 / f.width
    half = f.width if f.family == "rectangular" else 0.5 * (pgrid.max - pgrid.min)
    return 40.0 / half


def _auto_x2_half_width(f, d, pgrid, times) -> float:
    half = _position_scale(f, pgrid)
    if d.kind != "massless":
        # velocity spread of the pair coordinate, 2 dv, bounded by 2c
        lo, hi = (pgrid.min, pgrid.max) if f.family in ("flat", "rectangular") else \
            (f.p0 - 3 * f.width, f.p0 + 3 * f.width)
        spread = abs(d.group_velocity(hi) - d.group_velocity(lo))
        half += 2.0 * spread * max(abs(t) for t in times)
    return half


def resolve(cfg: ScenarioConfig) -> ScenarioConfig:
    """Fill bounds of ``auto`` grids from the spectrum and geometry (in place)."""
    f = build_spectrum(cfg)
    d = build_dispersion(cfg)
    g = cfg.grids
    if g.p.auto:
        pgrid = _auto_pgrid(cfg, f, g.p.n)
        g.p.min = from_internal(cfg, pgrid.min, "momentum")
        g.p.max = from_internal(cfg, pgrid.max, "momentum")
    pgrid = build_pgrid(cfg)
    if g.x2.auto:
        times = [to_internal(cfg, t, "time") for t in cfg.geometry.times]
        half = from_internal(cfg, _auto_x2_half_width(f, d, pgrid, times), "length")
        g.x2.min, g.x2.max = -half, half
    if g.t.auto:
        x1 = to_internal(cfg, cfg.geometry.x1, "length")
        det = to_internal(cfg, cfg.geometry.detector_x, "length")
        tgrid = default_tgrid(f, x1, det, g.t.n, pgrid)
        g.t.min = from_internal(cfg, tgrid.min, "time")
        g.t.max = from_internal(cfg, tgrid.max, "time")
    return cfg


def x2_grid_at(cfg: ScenarioConfig, t: float) -> Grid1D:
    """Absolute x2 grid (internal units) for internal time ``t``."""
    f = build_spectrum(cfg)
    d = build_dispersion(cfg)
    pgrid = build_pgrid(cfg)
    x1 = to_internal(cfg, cfg.geometry.x1, "length")
    center = expected_center(f, d, x1, t, pgrid)
    off = build_x2_offsets(cfg)
    return make_grid(center + off.min, center + off.max, off.n)


# --- text round trip -------------------------------------------------------

def parse_config(text: str, subcommand: str | None = None) -> ScenarioConfig:
    """Parse, validate and resolve a TOML scenario document.

    ``subcommand`` (from the command line) fills in a missing ``subcommand``
    key and must agree with it when both are given.
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if subcommand is not None:
        given = data.setdefault("subcommand", subcommand)
        if given != subcommand:
            raise ConfigError(f"config is for {given!r} but {subcommand!r} was requested", "subcommand")
    cfg = _build(ScenarioConfig, data, "")
    _validate(cfg)
    return resolve(cfg)


def to_dict(cfg: ScenarioConfig) -> dict:
    return dataclasses.asdict(cfg)


def dumps(cfg: ScenarioConfig) -> str:
    return tomli_w.dumps(to_dict(cfg))


def flatten(d: dict, prefix: str = "") -> list[tuple[str, object]]:
    out = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.extend(flatten(v, key + "."))
        else:
            out.append((key, v))
    return out
