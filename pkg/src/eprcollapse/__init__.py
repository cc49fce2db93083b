"""Conditional-wavefunction simulations of correlated particle pairs.

Particle two's wavefunction after particle one is found at x1, for a chosen
momentum spectrum and energy-momentum law; the detection-time spread it
implies at a fixed detector; and a two-spin model of partial entanglement.
"""
from .conditional import (
    ConditionalWavefunction,
    WidthReport,
    density,
    evaluate_conditional,
    normalize,
    width_report,
    width_vs_time,
)
from .dispersion import DispersionRelation, energy, massive, massless, phase_kernel, quadratic
from .spectral import (
    SpectralAmplitude,
    amplitude_at,
    default_pgrid,
    flat,
    gaussian,
    lorentzian,
    momentum_moments,
    rectangular,
)
from .timing import (
    CoincidenceHistogram,
    TemporalProfile,
    delta_t,
    histogram,
    lifetime_consistency,
    sample_arrivals,
    temporal_profile,
)
from .units import UNITS, Grid1D, UnitSystem, centered_grid, convert, integrate, make_grid

__version__ = "0.1.0"
