import math

import numpy as np
import pytest
from scipy import stats

from eprcollapse.dispersion import massless
from eprcollapse.spectral import default_pgrid, gaussian, rectangular
from eprcollapse.timing import (
    FWHM_PER_SIGMA,
    TemporalProfile,
    default_tgrid,
    delta_t,
    fit_trailing_exponential,
    histogram,
    histogram_fwhm,
    lifetime_consistency,
    peak_time,
    sample_arrivals,
    temporal_profile,
)
from eprcollapse.units import centered_grid, make_grid


def _gauss_profile(sigma, n=4001, mu=0.0):
    g = centered_grid(mu, 10 * sigma, n)
    return TemporalProfile.from_density(g, np.exp(-0.5 * ((g.samples - mu) / sigma) ** 2))


def test_gaussian_temporal_profile():
    sigma_p = 0.5
    f = gaussian(20.0, sigma_p)
    x1, det = 1.0, -15.0
    pg = default_pgrid(f, 1025)
    prof = temporal_profile(f, massless(), x1, det, default_tgrid(f, x1, det, 2049), pg)
    sigma_t = 1.0 / (2 * 2 * sigma_p)
    exact = stats.norm.pdf(prof.t, loc=peak_time(x1, det), scale=sigma_t)
    assert np.max(np.abs(prof.density - exact)) < 1e-4 * exact.max()
    assert delta_t(prof, "rms") == pytest.approx(sigma_t, rel=1e-4)
    assert delta_t(prof, "fwhm") == pytest.approx(FWHM_PER_SIGMA * sigma_t, rel=1e-3)
    assert abs(prof.t[np.argmax(prof.density)] - 8.0) <= 0.5 * prof.tgrid.spacing
    assert prof.captured > 0.999 and np.all(prof.density >= 0)


def test_normalised_profile():
    f = gaussian(20.0, 0.3)
    prof = temporal_profile(f, massless(), 0, -4, default_tgrid(f, 0, -4), default_pgrid(f, 513))
    assert np.trapezoid(prof.density, prof.t) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.filterwarnings("ignore::eprcollapse.timing.TruncationWarning")
def test_wide_rectangle_temporal_fwhm_shrinks():
    fw = []
    for w in (0.5, 2.0, 8.0):
        f = rectangular(20.0, w)
        prof = temporal_profile(f, massless(), 0, -10, default_tgrid(f, 0, -10, 2049), default_pgrid(f, 1025))
        fw.append(delta_t(prof, "fwhm"))
    assert fw[0] > fw[1] > fw[2]


def test_delta_t_on_gaussian_density():
    p = _gauss_profile(0.7)
    assert delta_t(p, "rms") == pytest.approx(0.7, abs=1e-4)
    assert delta_t(p, "fwhm") == pytest.approx(FWHM_PER_SIGMA * 0.7, abs=1e-3)
    with pytest.raises(ValueError):
        delta_t(p, "mad")


def test_delta_t_on_exponential():
    tau = 3.0
    g = make_grid(0.0, 25 * tau, 20001)
    p = TemporalProfile.from_density(g, np.exp(-g.samples / tau))
    # one-sided exponential: std equals its decay constant
    assert delta_t(p, "rms") == pytest.approx(tau, rel=1e-3)
    assert fit_trailing_exponential(p).decay == pytest.approx(tau, rel=1e-6)


def test_detector_position_invariance():
    f = gaussian(30.0, 0.4)
    pg = default_pgrid(f, 1025)
    widths = []
    for det in (-5.0, -50.0, -123.4):
        prof = temporal_profile(f, massless(), 0.0, det, default_tgrid(f, 0.0, det, 2049), pg)
        widths.append(delta_t(prof, "rms"))
    assert max(widths) - min(widths) < 1e-6 * widths[0]


def test_reciprocity_and_monotonicity():
    sigmas = [0.01, 0.1, 1.0, 10.0]
    dts = []
    for s in sigmas:
        f = gaussian(100.0 * s, s)
        prof = temporal_profile(f, massless(), 0, -10, default_tgrid(f, 0, -10, 2049), default_pgrid(f, 1025))
        dt = delta_t(prof, "rms")
        assert dt * 2 * s == pytest.approx(0.5, rel=1e-3)
        dts.append(dt)
    assert all(a > b for a, b in zip(dts, dts[1:]))


def test_sampling_moments():
    sigma = 0.5
    prof = _gauss_profile(sigma, mu=3.0)
    n = 10 ** 6
    ev = sample_arrivals(prof, n, seed=11)
    assert abs(np.std(ev) / sigma - 1.0) < 4 / math.sqrt(2 * n)
    assert abs(np.mean(ev) - 3.0) < 5 * sigma / math.sqrt(n)


def test_sampling_deterministic():
    prof = _gauss_profile(1.0)
    assert np.array_equal(sample_arrivals(prof, 1000, 5), sample_arrivals(prof, 1000, 5))
    assert not np.array_equal(sample_arrivals(prof, 1000, 5), sample_arrivals(prof, 1000, 6))
    assert np.array_equal(sample_arrivals(prof, 1000, 5, 0.2), sample_arrivals(prof, 1000, 5, 0.2))


def test_jitter_on_point_like_profile():
    g = centered_grid(0.0, 1e-4, 101)
    prof = TemporalProfile.from_density(g, np.maximum(0, 1 - np.abs(g.samples) / 1e-5))
    ev = sample_arrivals(prof, 200000, seed=3, jitter_sigma=2.0)
    assert np.std(ev) == pytest.approx(2.0, rel=0.01)


def test_sampling_matches_cdf_ks():
    prof = _gauss_profile(1.3, n=2001)
    n = 200000
    ev = sample_arrivals(prof, n, seed=21)
    # analytic Gaussian CDF as the reference, one-sample KS at the 1% level
    stat = stats.kstest(ev, stats.norm(0.0, 1.3).cdf).statistic
    assert stat < stats.kstwo.ppf(0.99, n)


def test_profile_cdf_piecewise_exact():
    g = make_grid(0.0, 2.0, 3)
    prof = TemporalProfile.from_density(g, [0.0, 1.0, 0.0])
    assert prof.cdf(0.5) == pytest.approx(0.125)
    assert prof.cdf(1.0) == pytest.approx(0.5)
    assert prof.cdf(5.0) == pytest.approx(1.0)
    # inverse-CDF sampler agrees with the exact CDF
    ev = sample_arrivals(prof, 400000, seed=1)
    assert np.mean(ev < 0.5) == pytest.approx(0.125, abs=3e-3)


def test_histogram_basic():
    h = histogram([0.1, 0.2, 0.3], 1.0)
    assert list(h.counts) == [3]
    h = histogram([0.1, 1.1], 1.0)
    assert list(h.counts) == [1, 1] and np.all(np.diff(h.bin_edges) > 0)
    h = histogram(np.random.default_rng(0).normal(size=1000), 0.1)
    assert h.counts.sum() == h.n_events == 1000
    with pytest.raises(ValueError):
        histogram([], 1.0)
    with pytest.raises(ValueError):
        histogram([1.0], 0.0)


def test_histogram_fwhm_vs_profile():
    sigma = 0.8
    prof = _gauss_profile(sigma)
    ev = sample_arrivals(prof, 10 ** 6, seed=4)
    h = histogram(ev, sigma / 10)
    assert histogram_fwhm(h) == pytest.approx(delta_t(prof, "fwhm"), rel=0.02)


def test_lifetime_closure_and_scaling():
    r1 = lifetime_consistency(119.0)
    assert r1.fitted_decay == pytest.approx(119.0, rel=0.03)
    assert 108.0 <= r1.delta_t_rms <= 126.0
    assert r1.fit_ok and r1.model == "lifetime-lorentzian"
    # |f|^2 FWHM in the pair energy 2E equals hbar / tau
    assert r1.pair_energy_fwhm_ev == pytest.approx(6.582119569e-4 / 119.0, rel=1e-9)
    r10 = lifetime_consistency(1190.0)
    assert r10.fitted_decay / r1.fitted_decay == pytest.approx(10.0, rel=0.03)


def test_lifetime_rejects_bad_tau():
    with pytest.raises(ValueError):
        lifetime_consistency(0.0)
