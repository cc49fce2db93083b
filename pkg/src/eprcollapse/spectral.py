"""Momentum spectral amplitudes f(p).

|f(p)|^2 dp is the probability that the emitted pair carries momentum
between p and p + dp. Four families are provided; all are real and
non-negative and even about their centre ``p0``.

================  =============================================  ==========
family            |f(p)|^2                                       ``width``
================  =============================================  ==========
``flat``          1 everywhere (unrestricted momenta)            unused
``rectangular``   1 / (2w) on [p0 - w, p0 + w]                   w
``gaussian``      normal density, mean p0, std sigma             sigma
``lorentzian``    (gamma / pi) / ((p - p0)^2 + gamma^2)          gamma
================  =============================================  ==========

A Lorentzian may be marked ``causal``. Its modulus is unchanged but it
carries the spectral phase atan((p - p0) / gamma), i.e. the amplitude
sqrt(gamma / pi) / (gamma - i (p - p0)) of an exponentially decaying source.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import erf

from .units import Grid1D, integrate, make_grid

FAMILIES = ("flat", "rectangular", "gaussian", "lorentzian")

# Default momentum window half-widths, in units of the family width.
DEFAULT_SPAN = {"rectangular": 1.0, "gaussian": 6.0, "lorentzian": 50.0}

MASS_THRESHOLD = 0.999


class SpectralTruncationWarning(UserWarning):
    """The momentum grid misses a noticeable part of |f|^2."""


@dataclass(frozen=True)
class SpectralAmplitude:
    family: str
    p0: float = 0.0
    width: float | None = None
    causal: bool = False
    scale: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown spectral family {self.family!r}; expected one of {FAMILIES}")
        if not math.isfinite(self.p0):
            raise ValueError("p0 must be finite")
        if self.family == "flat":
            if self.width is not None:
                raise ValueError("flat spectrum takes no width")
        elif self.width is None or not (self.width > 0 and math.isfinite(self.width)):
            raise ValueError(f"{self.family} spectrum needs a finite width > 0, got {self.width}")
        if self.causal and self.family != "lorentzian":
            raise ValueError("only the lorentzian family has a causal variant")

    @property
    def label(self) -> str:
        if self.family == "flat":
            return "flat"
        tag = "causal-lorentzian" if self.causal else self.family
        return f"{tag}(p0={self.p0:.6g}, width={self.width:.6g})"

    def amplitude_at(self, p):
        """Real, non-negative f(p); accepts scalars or arrays."""
        p = np.asarray(p, dtype=float)
        q = p - self.p0
        w = self.width
        if self.family == "flat":
            f = np.ones_like(p)
        elif self.family == "rectangular":
            # endpoint slack so grids ending exactly at p0 +- w keep their end samples
            f = np.where(np.abs(q) <= w * (1 + 1e-12), 1.0 / math.sqrt(2.0 * w), 0.0)
        elif self.family == "gaussian":
            f = (2.0 * math.pi * w * w) ** -0.25 * np.exp(-q * q / (4.0 * w * w))
        else:
            f = math.sqrt(w / math.pi) / np.sqrt(q * q + w * w)
        f = self.scale * f
        return float(f) if f.ndim == 0 else f

    def phase_at(self, p):
        p = np.asarray(p, dtype=float)
        if self.causal:
            phase = np.arctan2(p - self.p0, self.width)
        else:
            phase = np.zeros_like(p)
        return float(phase) if phase.ndim == 0 else phase

    def complex_amplitude(self, p):
        return self.amplitude_at(p) * np.exp(1j * self.phase_at(p))

    def support(self) -> tuple[float, float]:
        """Momentum window holding the bulk of |f|^2 (the default grid span)."""
        if self.family == "flat":
            return (-math.inf, math.inf)
        half = DEFAULT_SPAN[self.family] * self.width
        return (self.p0 - half, self.p0 + half)

    def mass_between(self, lo: float, hi: float) -> float:
        """Exact probability of |f|^2 between ``lo`` and ``hi`` (unit scale)."""
        if self.family == "flat":
            return 1.0
        a, b = lo - self.p0, hi - self.p0
        w = self.width
        if self.family == "rectangular":
            return max(0.0, min(b, w) - max(a, -w)) / (2.0 * w)
        if self.family == "gaussian":
            s = w * math.sqrt(2.0)
            return 0.5 * (erf(b / s) - erf(a / s))
        return (math.atan(b / w) - math.atan(a / w)) / math.pi

    def normalized(self, pgrid: Grid1D) -> "SpectralAmplitude":
        """Rescale so the trapezoid integral of |f|^2 over ``pgrid`` is 1.

        The flat family keeps unit amplitude instead.
        """
        if self.family == "flat":
            return dataclasses.replace(self, scale=1.0)
        base = dataclasses.replace(self, scale=1.0)
        norm = integrate(base.amplitude_at(pgrid.samples) ** 2, pgrid)
        if norm <= 0:
            raise ValueError(f"{self.label} has no weight on the momentum grid")
        return dataclasses.replace(self, scale=1.0 / math.sqrt(norm))


def flat() -> SpectralAmplitude:
    return SpectralAmplitude("flat")


def rectangular(p0: float, half_width: float) -> SpectralAmplitude:
    return SpectralAmplitude("rectangular", p0, half_width)


def gaussian(p0: float, sigma: float) -> SpectralAmplitude:
    return SpectralAmplitude("gaussian", p0, sigma)


def lorentzian(p0: float, gamma: float, causal: bool = False) -> SpectralAmplitude:
    return SpectralAmplitude("lorentzian", p0, gamma, causal)


def amplitude_at(f: SpectralAmplitude, p):
    return f.amplitude_at(p)


def default_pgrid(f: SpectralAmplitude, n: int = 2049, span: float | None = None) -> Grid1D:
    """Momentum grid over p0 +- span * width (family default span if omitted)."""
    if f.family == "flat":
        raise ValueError("a flat spectrum has no natural momentum window; pass an explicit grid")
    span = DEFAULT_SPAN[f.family] if span is None else span
    return make_grid(f.p0 - span * f.width, f.p0 + span * f.width, n)


class Moments(NamedTuple):
    mean: float
    std: float
    captured: float
    truncated: bool


def momentum_moments(f: SpectralAmplitude, pgrid: Grid1D) -> Moments:
    """Mean and standard deviation of |f(p)|^2 over ``pgrid``.

    ``captured`` is the exact fraction of |f|^2 lying inside the grid. The
    Lorentzian has no finite variance, so its std always depends on the grid
    and is reported with ``truncated=True``.
    """
    p = pgrid.samples
    dens = f.amplitude_at(p) ** 2
    mass = integrate(dens, pgrid)
    mean = integrate(p * dens, pgrid) / mass
    var = integrate((p - mean) ** 2 * dens, pgrid) / mass
    captured = f.mass_between(pgrid.min, pgrid.max)
    truncated = f.family == "lorentzian" or captured < MASS_THRESHOLD
    if f.family in ("gaussian", "rectangular") and captured < MASS_THRESHOLD:
        warnings.warn(
            f"momentum grid captures only {captured:.5f} of |f|^2 for {f.label}",
            SpectralTruncationWarning,
            stacklevel=2,
        )
    return Moments(float(mean), float(math.sqrt(var)), captured, truncated)
