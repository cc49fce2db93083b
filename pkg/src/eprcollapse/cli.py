"""Command line front end.

    eprcollapse {collapse,timing,lifetime,spin,sweep} CONFIG [--out DIR] [--strict]

Each run writes CSV tables plus ``report.txt`` (``key: value`` lines holding
the full config echo, summary numbers, warnings and a SHA-256 manifest of
every CSV). Exit status is 0 on success, 1 for config errors and 2 when
``--strict`` is set and a numerical-quality warning was raised.

Random streams: element ``i`` of a run (0 for single scenarios, the value
index for sweeps) draws from ``numpy.random.SeedSequence(seed, spawn_key=(i,))``.
"""
from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
import tempfile
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import spin as spinmod
from . import timing as tmod
from .conditional import density, evaluate_conditional, width_report
from .config import ConfigError, ScenarioConfig, from_internal, to_internal
from .spectral import SpectralTruncationWarning

NUMERIC_WARNINGS = (SpectralTruncationWarning, tmod.TruncationWarning, tmod.MultiPeakWarning)


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    sha256: str
    rows: int


@dataclass
class RunReport:
    config: ScenarioConfig
    summary: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    manifest: list[ManifestEntry] = field(default_factory=list)
    duration: float = 0.0

    def to_text(self) -> str:
        lines = [f"config.{k}: {_fmt_value(v)}" for k, v in cfgmod.flatten(cfgmod.to_dict(self.config))]
        lines += [f"summary.{k}: {_fmt_value(v)}" for k, v in self.summary.items()]
        lines += [f"warning: {w}" for w in self.warnings]
        for m in self.manifest:
            lines.append(f"artifact.{m.path}: sha256={m.sha256} rows={m.rows}")
        lines.append(f"duration_s: {self.duration:.3f}")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def _fmt_value(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return _fmt(v)


def _atomic_write(path: Path, data: bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_csv(table: dict, path, root=None) -> ManifestEntry:
    """Write named columns as CSV: 12 significant digits, LF line endings."""
    path = Path(path)
    cols = {k: np.atleast_1d(np.asarray(v)) for k, v in table.items()}
    lengths = {len(v) for v in cols.values()}
    if len(lengths) > 1:
        raise ValueError(f"columns have different lengths: {sorted(lengths)}")
    nrows = lengths.pop() if lengths else 0
    lines = [",".join(cols)]
    for i in range(nrows):
        lines.append(",".join(_fmt(c[i]) for c in cols.values()))
    data = ("\n".join(lines) + "\n").encode()
    _atomic_write(path, data)
    name = str(path.relative_to(root)) if root is not None else path.name
    return ManifestEntry(name, hashlib.sha256(data).hexdigest(), nrows)


def substream(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(index,))


# --- scenarios --------------------------------------------------------------

class _Run:
    def __init__(self, cfg: ScenarioConfig, out: Path, root: Path, index: int = 0):
        self.cfg, self.out, self.root, self.index = cfg, out, root, index
        self.summary: dict = {}
        self.flags: list[str] = []
        self.manifest: list[ManifestEntry] = []

    def csv(self, name: str, table: dict):
        self.manifest.append(emit_csv(table, self.out / name, self.root))

    def seed(self):
        return substream(self.cfg.seed, self.index)


def _collapse(r: _Run):
    cfg = r.cfg
    f, d = cfgmod.build_spectrum(cfg), cfgmod.build_dispersion(cfg)
    pgrid = cfgmod.build_pgrid(cfg)
    x1 = to_internal(cfg, cfg.geometry.x1, "length")
    L = lambda v: from_internal(cfg, v, "length")  # noqa: E731
    rows = {k: [] for k in ("t", "center", "rms", "fwhm", "peak_x2", "peak_density",
                            "norm_total", "norm_captured", "truncated", "multi_peak")}
    for i, t_cfg in enumerate(cfg.geometry.times):
        t = to_internal(cfg, t_cfg, "time")
        grid = cfgmod.x2_grid_at(cfg, t)
        cw = evaluate_conditional(f, d, x1, t, grid, pgrid)
        rep = width_report(cw)
        r.csv(f"field_{i:03d}.csv", {
            "x2": L(cw.x2), "re": cw.amplitudes.real, "im": cw.amplitudes.imag,
            "density": density(cw) / cw.grid_norm / from_internal(cfg, 1.0, "length"),
        })
        for k, v in (("t", t_cfg), ("center", L(grid.center)), ("rms", L(rep.rms)),
                     ("fwhm", L(rep.fwhm)), ("peak_x2", L(rep.peak_x2)),
                     ("peak_density", rep.peak_density / from_internal(cfg, 1.0, "length")),
                     ("norm_total", cw.grid_norm), ("norm_captured", rep.norm_captured),
                     ("truncated", rep.truncated), ("multi_peak", rep.multi_peak)):
            rows[k].append(v)
        if rep.truncated:
            r.flags.append(f"truncation: t={t_cfg:g} captures {rep.norm_captured:.6f} of the packet")
        if rep.multi_peak:
            r.flags.append(f"multi-peak density at t={t_cfg:g}")
    r.csv("widths.csv", rows)
    rms = np.array(rows["rms"])
    r.summary.update({
        "rms_first": rms[0],
        "rms_last": rms[-1],
        "rms_ratio_last_to_first": rms[-1] / rms[0],
        "max_peak_offset": float(np.max(np.abs(np.array(rows["peak_x2"]) - np.array(rows["center"])))),
        "norm_spread_rel": float(np.ptp(rows["norm_total"]) / np.mean(rows["norm_total"])),
    })


def _timing(r: _Run):
    cfg = r.cfg
    f, d = cfgmod.build_spectrum(cfg), cfgmod.build_dispersion(cfg)
    pgrid, tgrid = cfgmod.build_pgrid(cfg), cfgmod.build_tgrid(cfg)
    x1 = to_internal(cfg, cfg.geometry.x1, "length")
    det = to_internal(cfg, cfg.geometry.detector_x, "length")
    T = lambda v: from_internal(cfg, v, "time")  # noqa: E731
    prof = tmod.temporal_profile(f, d, x1, det, tgrid, pgrid)
    r.csv("profile.csv", {"t": T(prof.t), "density": prof.density / from_internal(cfg, 1.0, "time")})
    if prof.truncated:
        r.flags.append(f"truncation: time grid captures {prof.captured:.6f} of the profile")
    r.summary.update({
        "estimators": "rms,fwhm",
        "delta_t_rms": T(tmod.delta_t(prof, "rms")),
        "delta_t_fwhm": T(tmod.delta_t(prof, "fwhm")),
        "t_peak_expected": T(tmod.peak_time(x1, det)),
        "time_captured": prof.captured,
    })
    if f.causal:
        r.summary["model"] = tmod.MODEL_TAG
    if cfg.mc.n > 0:
        jitter = to_internal(cfg, cfg.mc.jitter, "time") or None
        events = tmod.sample_arrivals(prof, cfg.mc.n, r.seed(), jitter)
        bw = (tgrid.max - tgrid.min) / cfg.mc.bins
        hist = tmod.histogram(events, bw, jitter)
        r.csv("histogram.csv", {"bin_left": T(hist.bin_edges[:-1]), "bin_right": T(hist.bin_edges[1:]),
                                "count": hist.counts})
        r.summary.update({
            "mc_n": cfg.mc.n,
            "mc_mean": T(float(np.mean(events))),
            "mc_std": T(float(np.std(events))),
        })


def _lifetime(r: _Run):
    cfg, lt = r.cfg, r.cfg.lifetime
    x1 = to_internal(cfg, cfg.geometry.x1, "length")
    det = to_internal(cfg, cfg.geometry.detector_x, "length")
    rep = tmod.lifetime_consistency(lt.tau, (x1, det), n_t=lt.n_t, n_p=lt.n_p, p_span=lt.p_span)
    prof = rep.profile
    r.csv("profile.csv", {"t": prof.t, "density": prof.density})
    if not rep.fit_ok:
        r.flags.append(f"fit quality: tail R^2 = {rep.fit_r2:.5f} < 0.99")
    r.summary.update({
        "model": rep.model,
        "tau_ps": rep.tau,
        "gamma_used": from_internal(cfg, rep.gamma_used, "momentum"),
        "pair_energy_fwhm_ev": rep.pair_energy_fwhm_ev,
        "fitted_decay_ps": rep.fitted_decay,
        "ratio_to_tau": rep.ratio_to_tau,
        "delta_t_rms_ps": rep.delta_t_rms,
        "delta_t_fwhm_ps": rep.delta_t_fwhm,
        "fit_r2": rep.fit_r2,
    })


def _spin(r: _Run):
    sp = r.cfg.spin
    state = spinmod.make_partial_entangled(sp.a, sp.b, normalize=sp.normalize)
    if sp.axis == "z":
        state = spinmod.rotate_x_to_z(state)
    probs = spinmod.joint_probabilities(state)
    r.csv("joint.csv", {
        "outcome": list(spinmod.OUTCOMES), "re": state.amplitudes.real,
        "im": state.amplitudes.imag, "probability": probs,
    })
    cond = {"given_particle": [], "given_outcome": [], "other_up": [], "other_down": []}
    for particle in (1, 2):
        for outcome in (spinmod.UP, spinmod.DOWN):
            try:
                dist = spinmod.conditional_distribution(state, particle, outcome)
            except ValueError:
                dist = (math.nan, math.nan)
            for k, v in zip(cond, (particle, outcome, *dist)):
                cond[k].append(v)
    r.csv("conditional.csv", cond)
    p_cond = spinmod.conditional_distribution(state, 1, spinmod.UP)
    rec = spinmod.sample_measurements(state, sp.n, r.seed())
    r.csv("measurements.csv", {"outcome": list(rec.counts), "count": list(rec.counts.values())})
    n_up1 = rec.counts["uu"] + rec.counts["ud"]
    freq = rec.counts["ud"] / n_up1 if n_up1 else math.nan
    r.summary.update({
        "axis": state.basis,
        "p_down2_given_up1": p_cond[1],
        "concurrence": spinmod.concurrence(state),
        "mc_n": sp.n,
        "mc_p_down2_given_up1": freq,
        "mc_standard_error": math.sqrt(p_cond[1] * p_cond[0] / n_up1) if n_up1 else math.nan,
    })


SCENARIOS = {"collapse": _collapse, "timing": _timing, "lifetime": _lifetime, "spin": _spin}


def _run_element(cfg: ScenarioConfig, scenario: str, out: Path, root: Path, index: int) -> _Run:
    r = _Run(cfg, out, root, index)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        SCENARIOS[scenario](r)
    for w in caught:
        if issubclass(w.category, NUMERIC_WARNINGS):
            r.flags.append(f"{w.category.__name__}: {w.message}")
        else:
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    return r


def run(cfg: ScenarioConfig, out_dir=None) -> RunReport:
    """Run the configured scenario, writing artifacts under ``out_dir``."""
    start = time.perf_counter()
    root = Path(out_dir if out_dir is not None else cfg.output.dir)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {root}: {exc}") from exc
    if not os.access(root, os.W_OK):
        raise OSError(f"output directory {root} is not writable")
    report = RunReport(cfg)
    if cfg.subcommand != "sweep":
        r = _run_element(cfg, cfg.subcommand, root, root, 0)
        report.summary, report.warnings, report.manifest = r.summary, r.flags, r.manifest
    else:
        sw = cfg.sweep
        rows: dict[str, list] = {sw.parameter: []}
        for i, value in enumerate(sw.values):
            elem = cfgmod.with_value(cfg, sw.parameter, value)
            r = _run_element(elem, sw.scenario, root / f"element_{i:03d}", root, i)
            report.manifest += r.manifest
            report.warnings += [f"element {i}: {w}" for w in r.flags]
            rows[sw.parameter].append(value)
            for k, v in r.summary.items():
                if isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool):
                    rows.setdefault(k, []).append(v)
        report.manifest.append(emit_csv(rows, root / "sweep.csv", root))
        report.summary = {"elements": len(sw.values), "scenario": sw.scenario, "parameter": sw.parameter}
    report.duration = time.perf_counter() - start
    _atomic_write(root / "report.txt", report.to_text().encode())
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="eprcollapse", description=__doc__.split("\n")[0])
    parser.add_argument("subcommand", choices=cfgmod.SUBCOMMANDS)
    parser.add_argument("config", help="TOML scenario file")
    parser.add_argument("--out", help="output directory (overrides output.dir)")
    parser.add_argument("--strict", action="store_true",
                        help="exit with status 2 on truncation, multi-peak or fit-quality warnings")
    args = parser.parse_args(argv)
    try:
        text = Path(args.config).read_text()
        cfg = cfgmod.parse_config(text, args.subcommand)
    except (OSError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    report = run(cfg, args.out)
    for key, value in report.summary.items():
        print(f"{key}: {_fmt(value)}")
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.strict and report.warnings:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
