"""Unit conventions and uniform 1-D sampling grids.

Internally hbar = c = 1 with the picosecond as the unit of time. That fixes
the other internal units: length is c * 1 ps (0.2998 mm), energy is hbar / ps
(6.58e-4 eV) and momentum is energy / c.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

# CODATA values, 10 significant digits.
HBAR_EV_PS = 6.582119569e-4
C_MM_PER_PS = 0.299792458

# Internal natural units.
HBAR = 1.0
C = 1.0

NATURAL = "natural"


def _default_scales() -> dict[str, tuple[str, float]]:
    # unit name -> (dimension, size of one such unit in internal units)
    length_mm = 1.0 / C_MM_PER_PS
    energy_ev = 1.0 / HBAR_EV_PS
    return {
        "s": ("time", 1e12),
        "ns": ("time", 1e3),
        "ps": ("time", 1.0),
        "fs": ("time", 1e-3),
        "m": ("length", 1e3 * length_mm),
        "cm": ("length", 10.0 * length_mm),
        "mm": ("length", length_mm),
        "um": ("length", 1e-3 * length_mm),
        "eV": ("energy", energy_ev),
        "keV": ("energy", 1e3 * energy_ev),
        "MeV": ("energy", 1e6 * energy_ev),
        "eV/c": ("momentum", energy_ev),
        "keV/c": ("momentum", 1e3 * energy_ev),
        "MeV/c": ("momentum", 1e6 * energy_ev),
    }


@dataclass(frozen=True)
class UnitSystem:
    """Internal natural units plus the scale factors to and from SI-style units.

    The special unit name ``"natural"`` stands for the internal unit of
    whatever dimension the other side of a conversion has.
    """

    hbar: float = HBAR
    c: float = C
    si_conversions: dict[str, tuple[str, float]] = field(default_factory=_default_scales)

    def dimension(self, unit: str) -> str:
        try:
            return self.si_conversions[unit][0]
        except KeyError:
            raise ValueError(f"unknown unit {unit!r}") from None

    def scale(self, unit: str) -> float:
        if unit == NATURAL:
            return 1.0
        try:
            return self.si_conversions[unit][1]
        except KeyError:
            raise ValueError(f"unknown unit {unit!r}") from None

    def to_internal(self, value, unit: str):
        return value * self.scale(unit)

    def from_internal(self, value, unit: str):
        return value / self.scale(unit)

    def convert(self, value, from_unit: str, to_unit: str):
        """Convert ``value`` between two units of the same dimension."""
        if from_unit != NATURAL and to_unit != NATURAL:
            d_from, d_to = self.dimension(from_unit), self.dimension(to_unit)
            if d_from != d_to:
                raise ValueError(f"cannot convert {d_from} ({from_unit}) to {d_to} ({to_unit})")
        return self.from_internal(self.to_internal(value, from_unit), to_unit)

    def energy_width(self, lifetime, time_unit: str = "ps", energy_unit: str = "eV"):
        """Energy width hbar / tau of a state with the given lifetime."""
        if time_unit != NATURAL and self.dimension(time_unit) != "time":
            raise ValueError(f"{time_unit!r} is not a time unit")
        tau = self.to_internal(lifetime, time_unit)
        return self.from_internal(self.hbar / tau, energy_unit)


UNITS = UnitSystem()


def convert(value, from_unit: str, to_unit: str):
    return UNITS.convert(value, from_unit, to_unit)


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of ``n`` samples from ``min`` to ``max`` inclusive."""

    min: float
    max: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise ValueError("grid bounds must be finite")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"grid needs at least 2 samples, got n={self.n}")
        if not self.max > self.min:
            raise ValueError(f"grid max ({self.max}) must exceed min ({self.min})")
        object.__setattr__(self, "n", int(self.n))

    @property
    def spacing(self) -> float:
        return (self.max - self.min) / (self.n - 1)

    @property
    def center(self) -> float:
        return 0.5 * (self.min + self.max)

    @cached_property
    def samples(self) -> np.ndarray:
        x = self.min + np.arange(self.n) * self.spacing
        x[-1] = self.max
        x.flags.writeable = False
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid weights: spacing inside, spacing / 2 at both ends."""
        w = np.full(self.n, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        w.flags.writeable = False
        return w

    def recentered(self, center: float) -> "Grid1D":
        """Same span and sample count, shifted so the midpoint sits at ``center``."""
        half = 0.5 * (self.max - self.min)
        return Grid1D(center - half, center + half, self.n)


def make_grid(min: float, max: float, n: int) -> Grid1D:
    return Grid1D(float(min), float(max), n)


def centered_grid(center: float, half_width: float, n: int) -> Grid1D:
    return Grid1D(center - half_width, center + half_width, n)


def integrate(values, grid: Grid1D):
    """Trapezoid-rule integral of samples taken on ``grid``."""
    values = np.asarray(values)
    if values.shape != (grid.n,):
        raise ValueError(f"expected {grid.n} samples, got shape {values.shape}")
    return np.trapezoid(values, dx=grid.spacing)
