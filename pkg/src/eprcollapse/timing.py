"""Detection-time statistics at a fixed detector.

The temporal profile is |phi_x1(detector_x, t)|^2 as a function of t,
normalised over the time grid. Its width is the model's detection-time
uncertainty between the two photons. Monte Carlo arrival streams and
coincidence histograms are drawn from it.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import curve_fit

from .conditional import (
    Provenance,
    _sum_czt,
    _sum_direct,
    parseval_norm,
    profile_widths,
    spectral_weights,
)
from .dispersion import DispersionRelation, massless
from .spectral import MASS_THRESHOLD, SpectralAmplitude, lorentzian
from .units import C, HBAR, UNITS, Grid1D, centered_grid, integrate, make_grid

MODEL_TAG = "lifetime-lorentzian"

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))

# electron rest energy, 510.99895 keV, as a momentum m_e c in internal units
ELECTRON_MC = UNITS.to_internal(510.99895, "keV/c")


class MultiPeakWarning(UserWarning):
    """A width was measured on a density with more than one separated peak."""


class TruncationWarning(UserWarning):
    """The time grid misses a noticeable part of the temporal density."""


@dataclass(frozen=True)
class TemporalProfile:
    detector_x: float
    tgrid: Grid1D
    density: np.ndarray
    provenance: Provenance | None = None
    captured: float = 1.0

    def __post_init__(self):
        if self.density.shape != (self.tgrid.n,):
            raise ValueError("density does not match the time grid")
        if np.any(self.density < 0):
            raise ValueError("negative density")

    @classmethod
    def from_density(cls, tgrid: Grid1D, values, detector_x: float = 0.0, **kw) -> "TemporalProfile":
        values = np.asarray(values, dtype=float)
        mass = integrate(values, tgrid)
        if not mass > 0:
            raise ValueError("density integrates to zero")
        return cls(detector_x, tgrid, values / mass, **kw)

    @property
    def t(self) -> np.ndarray:
        return self.tgrid.samples

    @property
    def truncated(self) -> bool:
        return self.captured < MASS_THRESHOLD

    def cdf_nodes(self) -> np.ndarray:
        h = self.tgrid.spacing
        seg = 0.5 * h * (self.density[1:] + self.density[:-1])
        return np.concatenate(([0.0], np.cumsum(seg)))

    def cdf(self, t):
        """Exact CDF of the piecewise-linear density (zero before, one after the grid)."""
        t = np.asarray(t, dtype=float)
        nodes = self.cdf_nodes()
        h = self.tgrid.spacing
        s = np.clip((t - self.tgrid.min) / h, 0.0, self.tgrid.n - 1)
        i = np.minimum(s.astype(int), self.tgrid.n - 2)
        u = (s - i) * h
        r0 = self.density[i]
        slope = (self.density[i + 1] - r0) / h
        out = nodes[i] + r0 * u + 0.5 * slope * u * u
        return out / nodes[-1]


def peak_time(x1: float, detector_x: float, c: float = C) -> float:
    """Time at which a massless conditional packet passes the detector."""
    return (x1 - detector_x) / (2.0 * c)


def temporal_profile(f: SpectralAmplitude, d: DispersionRelation, x1: float, detector_x: float,
                     tgrid: Grid1D, pgrid: Grid1D, method: str = "direct",
                     hbar: float = HBAR, c: float = C) -> TemporalProfile:
    """|phi_x1(detector_x, t)|^2 over ``tgrid``, normalised to unit area.

    ``method="czt"`` is available for massless dispersion, where the time
    phase is linear in momentum.
    """
    p_ref = float(pgrid.samples[pgrid.n // 2])
    g = spectral_weights(f, d, x1 - detector_x, 0.0, pgrid, p_ref, hbar, c)
    omega = 2.0 * d.energy_offset(pgrid.samples, p_ref, c)
    if method == "direct":
        amp = _sum_direct(g, omega, tgrid.samples, hbar)
    elif method == "czt":
        if d.kind != "massless":
            raise ValueError("the chirp-z path needs a time phase linear in momentum (massless)")
        amp = _sum_czt(g, omega, tgrid, make_grid(omega[0], omega[-1], omega.size), hbar)
    else:
        raise ValueError(f"unknown method {method!r}")
    dens = np.abs(amp) ** 2
    mass = integrate(dens, tgrid)
    if d.kind == "massless":
        # the packet keeps its shape, so the full temporal mass is its spatial norm / 2c
        captured = min(1.0, mass * 2.0 * c / parseval_norm(f, pgrid, hbar))
    else:
        edge = max(dens[0], dens[-1]) / dens.max()
        captured = 1.0 if edge < 1e-4 else 1.0 - edge
    if captured < MASS_THRESHOLD:
        warnings.warn(f"time grid captures only {captured:.5f} of the temporal density",
                      TruncationWarning, stacklevel=2)
    return TemporalProfile(
        detector_x=float(detector_x),
        tgrid=tgrid,
        density=dens / mass,
        provenance=Provenance(f.label, d.label, pgrid),
        captured=captured,
    )


def time_scale(f: SpectralAmplitude, pgrid: Grid1D | None = None, c: float = C,
               hbar: float = HBAR) -> float:
    """Characteristic temporal width for a massless packet with spectrum ``f``."""
    if f.family in ("gaussian", "lorentzian"):
        return hbar / (4.0 * c * f.width)
    if f.family == "rectangular":
        return hbar / (2.0 * c * f.width)
    if pgrid is None:
        raise ValueError("a flat spectrum needs its momentum grid to set a time scale")
    return hbar / (c * (pgrid.max - pgrid.min))


def default_tgrid(f: SpectralAmplitude, x1: float, detector_x: float, n: int = 2049,
                  pgrid: Grid1D | None = None, c: float = C) -> Grid1D:
    """Time window around the massless transit time sized to the spectrum."""
    t0 = peak_time(x1, detector_x, c)
    s = time_scale(f, pgrid, c)
    if f.causal:
        return make_grid(t0 - 5.0 * s, t0 + 25.0 * s, n)
    span = {"gaussian": 8.0, "lorentzian": 25.0}.get(f.family, 40.0)
    return centered_grid(t0, span * s, n)


def delta_t(profile: TemporalProfile, estimator: str = "rms") -> float:
    """Width of the temporal density: ``"rms"`` (standard deviation) or ``"fwhm"``."""
    if estimator not in ("rms", "fwhm"):
        raise ValueError(f"unknown estimator {estimator!r}; use 'rms' or 'fwhm'")
    _, rms, fwhm, _, _, multi = profile_widths(profile.t, profile.density, profile.tgrid)
    if multi:
        warnings.warn("temporal density has several separated peaks; width is for the highest",
                      MultiPeakWarning, stacklevel=2)
    return rms if estimator == "rms" else fwhm


class ExpFit(NamedTuple):
    decay: float
    r2: float
    t_start: float
    t_stop: float


def fit_trailing_exponential(profile: TemporalProfile, upper: float = 0.3,
                             lower: float = 1e-3) -> ExpFit:
    """Least-squares line through log(density) on the falling edge.

    Uses samples after the peak whose density lies between ``lower`` and
    ``upper`` times the peak value. ``r2`` is computed on the log scale.
    """
    y = profile.density
    i0 = int(np.argmax(y))
    tail = np.arange(i0, y.size)
    sel = tail[(y[tail] <= upper * y[i0]) & (y[tail] >= lower * y[i0])]
    if sel.size < 3:
        raise ValueError("not enough tail samples for an exponential fit")
    t, ly = profile.t[sel], np.log(y[sel])
    slope, intercept = np.polyfit(t, ly, 1)
    resid = ly - (slope * t + intercept)
    r2 = 1.0 - np.sum(resid ** 2) / np.sum((ly - ly.mean()) ** 2)
    return ExpFit(float(-1.0 / slope), float(r2), float(t[0]), float(t[-1]))


@dataclass(frozen=True)
class LifetimeReport:
    tau: float
    gamma_used: float
    pair_energy_fwhm_ev: float
    fitted_decay: float
    ratio_to_tau: float
    delta_t_rms: float
    delta_t_fwhm: float
    fit_r2: float
    fit_ok: bool
    model: str = MODEL_TAG
    profile: TemporalProfile | None = field(default=None, repr=False, compare=False)


def lifetime_spectrum(tau: float, p0: float = ELECTRON_MC, hbar: float = HBAR,
                      c: float = C) -> SpectralAmplitude:
    """Causal Lorentzian whose temporal density decays as exp(-t / tau).

    The pair phase runs at 2E = 2pc, so a momentum HWHM gamma of |f|^2 gives
    a density decay rate 4 c gamma / hbar; hence gamma = hbar / (4 c tau).
    In the pair-energy variable 2E the |f|^2 FWHM is hbar / tau.
    """
    if not tau > 0:
        raise ValueError("lifetime must be positive")
    return lorentzian(p0, hbar / (4.0 * c * tau), causal=True)


def lifetime_consistency(tau: float, geometry: tuple[float, float] = (0.0, -300.0),
                         n_t: int = 4097, n_p: int = 16385, p_span: float = 400.0,
                         time_unit: str = "ps", p0: float = ELECTRON_MC) -> LifetimeReport:
    """Closure check of the lifetime -> Lorentzian -> temporal decay mapping.

    ``tau`` is given in ``time_unit``; times in the report use the same unit.
    ``geometry`` is (x1, detector_x) in internal length units.
    """
    tau_i = UNITS.to_internal(tau, time_unit)
    x1, det = geometry
    f = lifetime_spectrum(tau_i, p0)
    pgrid = make_grid(f.p0 - p_span * f.width, f.p0 + p_span * f.width, n_p)
    tgrid = default_tgrid(f, x1, det, n_t)
    profile = temporal_profile(f, massless(), x1, det, tgrid, pgrid, method="czt")
    fit = fit_trailing_exponential(profile)
    rms = delta_t(profile, "rms")
    fwhm = delta_t(profile, "fwhm")
    back = lambda v: UNITS.from_internal(v, time_unit)  # noqa: E731
    return LifetimeReport(
        tau=tau,
        gamma_used=f.width,
        pair_energy_fwhm_ev=UNITS.from_internal(4.0 * C * f.width, "eV"),
        fitted_decay=float(back(fit.decay)),
        ratio_to_tau=float(fit.decay / tau_i),
        delta_t_rms=back(rms),
        delta_t_fwhm=back(fwhm),
        fit_r2=fit.r2,
        fit_ok=fit.r2 >= 0.99,
        profile=profile,
    )


def sample_arrivals(profile: TemporalProfile, n: int, seed: int,
                    jitter_sigma: float | None = None) -> np.ndarray:
    """Draw ``n`` arrival times by exact inversion of the piecewise-linear CDF.

    Optional Gaussian detector jitter of std ``jitter_sigma`` is added after.
    """
    if n < 1:
        raise ValueError("need at least one event")
    rng = np.random.default_rng(seed)
    nodes = profile.cdf_nodes()
    target = rng.random(n) * nodes[-1]
    i = np.clip(np.searchsorted(nodes, target, side="right") - 1, 0, profile.tgrid.n - 2)
    h = profile.tgrid.spacing
    r = target - nodes[i]
    b = profile.density[i]
    a = 0.5 * (profile.density[i + 1] - b) / h
    disc = np.sqrt(np.maximum(b * b + 4.0 * a * r, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(b + disc > 0, 2.0 * r / (b + disc), 0.0)
    events = profile.tgrid.min + i * h + np.clip(s, 0.0, h)
    if jitter_sigma:
        events = events + rng.normal(0.0, jitter_sigma, n)
    return events


@dataclass(frozen=True)
class CoincidenceHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    n_events: int
    jitter_sigma: float | None = None

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])


def histogram(events, bin_width: float, jitter_sigma: float | None = None) -> CoincidenceHistogram:
    """Bin events in whole bins of ``bin_width`` starting at the earliest event."""
    events = np.asarray(events, dtype=float)
    if events.size == 0:
        raise ValueError("empty event list")
    if not bin_width > 0:
        raise ValueError("bin width must be positive")
    lo, hi = events.min(), events.max()
    nbins = int(math.floor((hi - lo) / bin_width)) + 1
    edges = lo + bin_width * np.arange(nbins + 1)
    counts, _ = np.histogram(events, bins=edges)
    return CoincidenceHistogram(edges, counts, int(events.size), jitter_sigma)


def _gauss(t, amp, mu, sigma):
    return amp * np.exp(-0.5 * ((t - mu) / sigma) ** 2)


def histogram_fwhm(hist: CoincidenceHistogram) -> float:
    """FWHM from a Gaussian least-squares fit to the bin counts."""
    x, y = hist.centers, hist.counts.astype(float)
    mu0 = np.sum(x * y) / np.sum(y)
    sd0 = math.sqrt(np.sum((x - mu0) ** 2 * y) / np.sum(y))
    popt, _ = curve_fit(_gauss, x, y, p0=(y.max(), mu0, sd0))
    return FWHM_PER_SIGMA * abs(popt[2])


def profile_table(profile: TemporalProfile) -> dict:
    return {"t": profile.t, "density": profile.density}


def histogram_table(hist: CoincidenceHistogram) -> dict:
    return {"bin_left": hist.bin_edges[:-1], "bin_right": hist.bin_edges[1:], "count": hist.counts}
