import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eprcollapse.dispersion import (
    DispersionRelation,
    energy,
    massive,
    massless,
    phase_kernel,
    quadratic,
)

finite = st.floats(-50, 50, allow_nan=False)


def test_energies():
    assert energy(massless(), 1.0) == 1.0
    assert energy(massless(), -2.0) == 2.0
    assert energy(massive(4.0), 3.0) == pytest.approx(5.0, abs=1e-15)
    assert energy(massive(2.0), 0.0) == 2.0
    assert energy(quadratic(2.0), 1.0) == pytest.approx(2.25)


def test_validation():
    with pytest.raises(ValueError):
        DispersionRelation("massive", 0.0)
    with pytest.raises(ValueError):
        DispersionRelation("massless", 1.0)
    with pytest.raises(ValueError):
        DispersionRelation("tachyon", 1.0)


def test_kernel_zero_exponent():
    for d in (massless(), massive(1.0), quadratic(1.0)):
        assert phase_kernel(d, 0.7, 1.5, 1.5, 0.0) == 1 + 0j


def test_kernel_on_light_cone():
    t = 0.8
    z = phase_kernel(massless(), 1.0, 2.0 * t + 0.3, 0.3, t)
    assert abs(z - 1.0) < 1e-15


def test_kernel_massive_half_turn():
    z = phase_kernel(massive(4.0), 3.0, 0.0, 0.0, math.pi / 10)
    assert abs(z - (-1.0)) < 1e-12


@given(finite, finite, finite, finite, st.sampled_from(["massless", "massive", "quadratic"]))
def test_unit_modulus(p, x1, x2, t, kind):
    d = DispersionRelation(kind, 0.0 if kind == "massless" else 1.3)
    assert abs(abs(phase_kernel(d, p, x1, x2, t)) - 1.0) < 1e-14


@given(st.floats(0, 20), finite, finite, finite, st.floats(-10, 10))
def test_massless_translation(p, x1, x2, t, shift):
    a = phase_kernel(massless(), p, x1, x2, t)
    b = phase_kernel(massless(), p, x1 - 2.0 * shift, x2, t - shift)
    # same exponent up to rounding of arguments of size ~1e3
    assert abs(a - b) < 1e-9


def test_massive_above_light_cone_with_asymptote():
    m = 1.0
    p = np.linspace(-30, 30, 601)
    assert np.all(energy(massive(m), p) > np.abs(p))
    gap = energy(massive(m), 100.0) - 100.0
    assert gap == pytest.approx(m * m / (2 * 100.0), rel=0.01)


@pytest.mark.parametrize("d", [massless(), massive(2.0), quadratic(2.0)])
def test_energy_offset_matches_difference(d):
    p = np.linspace(1.0, 3.0, 11)
    assert np.allclose(d.energy_offset(p, 2.0), d.energy(p) - d.energy(2.0), rtol=1e-12, atol=1e-14)


def test_energy_offset_precise_at_large_carrier():
    d = massive(1.0)
    p0 = 1e9
    off = d.energy_offset(p0 + 1.0, p0)
    assert off == pytest.approx(1.0, rel=1e-12)


def test_group_velocity():
    assert massless().group_velocity(3.0) == 1.0
    assert massive(1.0).group_velocity(0.0) == 0.0
    assert quadratic(2.0).group_velocity(1.0) == 0.5
