import math
import warnings

import numpy as np
import pytest

from eprcollapse.spectral import (
    SpectralAmplitude,
    SpectralTruncationWarning,
    default_pgrid,
    flat,
    gaussian,
    lorentzian,
    momentum_moments,
    rectangular,
)
from eprcollapse.units import integrate, make_grid


def test_flat_is_one():
    assert flat().amplitude_at(123.4) == 1.0
    assert np.all(flat().amplitude_at(np.linspace(-5, 5, 7)) == 1.0)


def test_gaussian_center_value():
    sigma = 0.3
    assert gaussian(2.0, sigma).amplitude_at(2.0) == pytest.approx((2 * math.pi * sigma ** 2) ** -0.25)


def test_rectangular_outside_support():
    assert rectangular(1.0, 0.5).amplitude_at(2.0) == 0.0
    assert rectangular(1.0, 0.5).amplitude_at(1.2) > 0


def test_lorentzian_density_form():
    g = 0.7
    f = lorentzian(1.0, g)
    p = np.array([1.0, 1.7, -3.0])
    expected = (g / math.pi) / ((p - 1.0) ** 2 + g ** 2)
    assert np.allclose(f.amplitude_at(p) ** 2, expected, rtol=1e-14)


@pytest.mark.parametrize("bad", [
    dict(family="gaussian", p0=0.0, width=-1.0),
    dict(family="rectangular", p0=0.0, width=0.0),
    dict(family="lorentzian", p0=0.0),
    dict(family="flat", width=1.0),
    dict(family="boxcar", width=1.0),
    dict(family="gaussian", width=1.0, causal=True),
])
def test_construction_validation(bad):
    with pytest.raises(ValueError):
        SpectralAmplitude(**bad)


@pytest.mark.parametrize("f", [gaussian(3.0, 0.2), rectangular(-1.0, 0.4), lorentzian(0.5, 0.1)])
def test_normalized_on_grid(f):
    pg = default_pgrid(f, 4001)
    fn = f.normalized(pg)
    assert abs(integrate(fn.amplitude_at(pg.samples) ** 2, pg) - 1.0) < 1e-9


def test_flat_normalization_keeps_unit_amplitude():
    assert flat().normalized(make_grid(-1, 1, 11)).amplitude_at(0.3) == 1.0


def test_real_and_non_negative():
    p = np.linspace(-10, 10, 1001)
    for f in (gaussian(1, 0.5), rectangular(0, 2), lorentzian(-1, 0.3), lorentzian(-1, 0.3, causal=True)):
        a = f.amplitude_at(p)
        assert a.dtype == float and np.all(a >= 0)


def test_causal_phase_gives_complex_lorentzian():
    g, p0 = 0.2, 1.0
    p = np.linspace(-2, 4, 301)
    f = lorentzian(p0, g, causal=True)
    expected = math.sqrt(g / math.pi) / (g - 1j * (p - p0))
    assert np.allclose(f.complex_amplitude(p), expected, rtol=1e-13)


def test_gaussian_moments():
    f = gaussian(3.0, 0.2)
    m = momentum_moments(f, make_grid(1.0, 5.0, 4001))
    assert abs(m.mean - 3.0) < 1e-4
    assert abs(m.std - 0.2) < 1e-4
    assert not m.truncated


def test_rectangular_moments():
    m = momentum_moments(rectangular(0.0, 1.0), make_grid(-1.0, 1.0, 2001))
    assert abs(m.std - 1.0 / math.sqrt(3.0)) < 1e-4
    assert abs(m.mean) < 1e-12


def test_flat_moments_symmetric():
    m = momentum_moments(flat(), make_grid(-3.0, 3.0, 101))
    assert abs(m.mean) < 1e-12


def test_truncation_warns_for_gaussian():
    with pytest.warns(SpectralTruncationWarning):
        m = momentum_moments(gaussian(0.0, 1.0), make_grid(-2.0, 2.0, 401))
    assert m.truncated and m.captured == pytest.approx(math.erf(2 / math.sqrt(2)), rel=1e-12)


def test_lorentzian_moments_tagged():
    f = lorentzian(0.0, 0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        m = momentum_moments(f, default_pgrid(f, 4001))
    assert m.truncated
    # wider window, larger std: the Lorentzian variance diverges
    assert momentum_moments(f, default_pgrid(f, 8001, span=200)).std > m.std


def test_width_ordering():
    stds = [momentum_moments(gaussian(0.0, w), default_pgrid(gaussian(0.0, w), 2001)).std
            for w in (1.0, 0.5, 0.25)]
    assert stds[0] > stds[1] > stds[2]
    rect = [momentum_moments(rectangular(0.0, w), default_pgrid(rectangular(0.0, w), 2001)).std
            for w in (1.0, 0.5, 0.25)]
    assert rect[0] > rect[1] > rect[2]


def test_symmetry_mean_equals_center():
    for f in (gaussian(2.5, 0.3), rectangular(2.5, 0.3), lorentzian(2.5, 0.3)):
        assert abs(momentum_moments(f, default_pgrid(f, 4001)).mean - 2.5) < 1e-9


def test_default_pgrid_spans():
    assert default_pgrid(gaussian(1.0, 0.5)).max == pytest.approx(4.0)
    assert default_pgrid(rectangular(1.0, 0.5)).min == pytest.approx(0.5)
    assert default_pgrid(lorentzian(0.0, 0.01)).max == pytest.approx(0.5)
    with pytest.raises(ValueError):
        default_pgrid(flat())
