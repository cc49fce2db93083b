"""Energy-momentum relations and the two-particle phase kernel."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .units import C, HBAR

KINDS = ("massless", "massive", "quadratic")


@dataclass(frozen=True)
class DispersionRelation:
    """E(p) for one particle of the pair.

    ``massless``  E = |p| c
    ``massive``   E = sqrt((p c)^2 + (m c^2)^2)
    ``quadratic`` E = m c^2 + p^2 / (2 m), the small-momentum expansion of
                  ``massive``, kept because its wavepackets spread in closed form.
    """

    kind: str
    mass: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown dispersion kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "massless":
            if self.mass != 0:
                raise ValueError("massless dispersion takes no mass")
        elif not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValueError(f"{self.kind} dispersion needs a finite mass > 0, got {self.mass}")

    @property
    def label(self) -> str:
        return self.kind if self.kind == "massless" else f"{self.kind}(m={self.mass:.6g})"

    def energy(self, p, c: float = C):
        p = np.asarray(p, dtype=float)
        if self.kind == "massless":
            e = np.abs(p) * c
        elif self.kind == "massive":
            e = np.hypot(p * c, self.mass * c * c)
        else:
            e = self.mass * c * c + p * p / (2.0 * self.mass)
        return float(e) if e.ndim == 0 else e

    def energy_offset(self, p, p_ref: float, c: float = C):
        """E(p) - E(p_ref) without cancellation when p is close to p_ref."""
        p = np.asarray(p, dtype=float)
        q = p - p_ref
        if self.kind == "massless":
            if p_ref > 0 and np.all(p >= 0):
                return q * c
            return (np.abs(p) - abs(p_ref)) * c
        if self.kind == "massive":
            return q * (p + p_ref) * c * c / (self.energy(p, c) + self.energy(p_ref, c))
        return q * (p + p_ref) / (2.0 * self.mass)

    def group_velocity(self, p, c: float = C) -> float:
        """dE/dp of a single particle."""
        if self.kind == "massless":
            return math.copysign(c, p) if p != 0 else 0.0
        if self.kind == "massive":
            return p * c * c / math.hypot(p * c, self.mass * c * c)
        return p / self.mass


def massless() -> DispersionRelation:
    return DispersionRelation("massless")


def massive(mass: float) -> DispersionRelation:
    return DispersionRelation("massive", mass)


def quadratic(mass: float) -> DispersionRelation:
    return DispersionRelation("quadratic", mass)


def energy(d: DispersionRelation, p, c: float = C):
    return d.energy(p, c)


def phase_argument(d: DispersionRelation, p, x1, x2, t, hbar: float = HBAR, c: float = C):
    """Real exponent [p (x1 - x2) - 2 E(p) t] / hbar of the pair kernel."""
    p = np.asarray(p, dtype=float)
    return (p * (np.asarray(x1) - np.asarray(x2)) - 2.0 * d.energy(p, c) * np.asarray(t)) / hbar


def phase_kernel(d: DispersionRelation, p, x1, x2, t, hbar: float = HBAR, c: float = C):
    """exp(i [p (x1 - x2) - 2 E(p) t] / hbar).

    Both particles carry energy E(p), so the pair phase advances at 2E.
    """
    z = np.exp(1j * phase_argument(d, p, x1, x2, t, hbar, c))
    return complex(z) if np.ndim(z) == 0 else z
