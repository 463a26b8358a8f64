import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import chisquare, kstest

from qflicker.noise_spectra import (
    RateDistribution,
    collection_spectrum,
    fit_loglog_slope,
    rate_cdf,
    rate_pdf,
    rate_quantile,
    sample_rate,
    sample_rates,
    slope_fit_band,
    synthesized_spectrum,
)
from qflicker.rtn import rtn_psd

WIDE = dict(gamma_min=1e-4, gamma_max=1e4)


def closed_form_spectrum(dist, f):
    """Independent antiderivatives of the Lorentzian mixture.

    alpha = 1: (4 / (a ln r)) [arctan(g2/a) - arctan(g1/a)], a = 2 pi f.
    alpha = 2: (4 C / a^2) ln[(g2/g1) sqrt(a^2+g1^2)/sqrt(a^2+g2^2)],
               C = g1 g2 / (g2 - g1).
    """
    a = 2 * np.pi * f
    g1, g2 = dist.gamma_min, dist.gamma_max
    if dist.alpha == 1.0:
        return 4.0 / (a * np.log(g2 / g1)) * (np.arctan(g2 / a) - np.arctan(g1 / a))
    if dist.alpha == 2.0:
        c = g1 * g2 / (g2 - g1)
        return (4.0 * c / a**2) * np.log(
            (g2 / g1) * np.sqrt(a**2 + g1**2) / np.sqrt(a**2 + g2**2)
        )
    raise NotImplementedError


class TestRatePdf:
    def test_log_uniform_unit_value(self):
        dist = RateDistribution(alpha=1.0, gamma_min=1.0, gamma_max=np.e)
        assert np.isclose(rate_pdf(dist, 1.0), 1.0)

    def test_inverse_square_form(self):
        dist = RateDistribution(alpha=2.0, gamma_min=1.0, gamma_max=2.0)
        g = np.linspace(1.0, 2.0, 11)
        assert np.allclose(rate_pdf(dist, g), 2.0 / g**2)
        total, _ = quad(lambda x: rate_pdf(dist, x), 1.0, 2.0)
        assert np.isclose(total, 1.0, atol=1e-10)

    @pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
    def test_normalized_over_eight_decades(self, alpha):
        dist = RateDistribution(alpha=alpha, **WIDE)
        total, err = quad(
            lambda u: rate_pdf(dist, np.exp(u)) * np.exp(u),
            np.log(dist.gamma_min),
            np.log(dist.gamma_max),
            epsabs=1e-12,
            epsrel=1e-12,
            limit=200,
        )
        assert abs(total - 1.0) < 1e-8

    def test_zero_outside_support(self):
        dist = RateDistribution(alpha=1.5, **WIDE)
        assert rate_pdf(dist, 1e-5) == 0.0
        assert rate_pdf(dist, 1e5) == 0.0

    def test_alpha_limit_continuous(self):
        near = RateDistribution(alpha=1.0 + 1e-6, **WIDE)
        exact = RateDistribution(alpha=1.0, **WIDE)
        g = np.logspace(-4, 4, 33)
        rel = rate_pdf(near, g) / rate_pdf(exact, g) - 1.0
        assert np.max(np.abs(rel)) < 1e-4

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            RateDistribution(alpha=0.5, **WIDE)
        with pytest.raises(ValueError):
            RateDistribution(alpha=2.5, **WIDE)
        with pytest.raises(ValueError):
            RateDistribution(alpha=1.0, gamma_min=2.0, gamma_max=1.0)


class TestSampling:
    @pytest.mark.parametrize("alpha", [1.0, 1.3, 2.0])
    def test_quantile_endpoints(self, alpha):
        dist = RateDistribution(alpha=alpha, **WIDE)
        assert np.isclose(rate_quantile(dist, 0.0), dist.gamma_min, rtol=1e-12)
        assert np.isclose(rate_quantile(dist, 1.0), dist.gamma_max, rtol=1e-12)

    def test_quantile_inverts_cdf(self):
        dist = RateDistribution(alpha=1.7, **WIDE)
        u = np.linspace(0.001, 0.999, 41)
        assert np.allclose(rate_cdf(dist, rate_quantile(dist, u)), u, atol=1e-12)

    def test_log_uniform_median(self):
        dist = RateDistribution(alpha=1.0, **WIDE)
        rng = np.random.default_rng(21)
        samples = sample_rates(dist, rng, 100_000)
        assert abs(np.log10(np.median(samples))) < 0.05

    @pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
    def test_kolmogorov_smirnov(self, alpha):
        dist = RateDistribution(alpha=alpha, **WIDE)
        rng = np.random.default_rng(22)
        samples = sample_rates(dist, rng, 100_000)
        assert kstest(samples, lambda g: rate_cdf(dist, g)).pvalue > 0.01

    @pytest.mark.parametrize("alpha", [1.0, 2.0])
    def test_chi_square_histogram(self, alpha):
        dist = RateDistribution(alpha=alpha, **WIDE)
        rng = np.random.default_rng(23)
        n = 200_000
        samples = sample_rates(dist, rng, n)
        edges = np.logspace(-4, 4, 51)
        observed, _ = np.histogram(samples, bins=edges)
        expected = n * np.diff(rate_cdf(dist, edges))
        stat = chisquare(observed, expected, ddof=0)
        assert stat.pvalue > 0.01

    def test_scalar_sampler(self):
        dist = RateDistribution(alpha=1.0, **WIDE)
        val = sample_rate(dist, np.random.default_rng(1))
        assert dist.gamma_min <= val <= dist.gamma_max


class TestSynthesizedSpectrum:
    @pytest.mark.parametrize("alpha", [1.0, 2.0])
    def test_against_closed_form(self, alpha):
        dist = RateDistribution(alpha=alpha, **WIDE)
        f = np.logspace(-3, 3, 25)
        got = synthesized_spectrum(dist, f)
        assert np.allclose(got, closed_form_spectrum(dist, f), rtol=1e-8)

    def test_intermediate_alpha_against_mpmath(self):
        import mpmath as mp

        dist = RateDistribution(alpha=1.5, **WIDE)
        for f in (0.02, 1.0, 50.0):
            ref = mp.quad(
                lambda g: 4 * g / (4 * mp.pi**2 * f**2 + g * g)
                * rate_pdf(dist, float(g)),
                [dist.gamma_min, 2 * mp.pi * f, dist.gamma_max],
            )
            assert abs(synthesized_spectrum(dist, f) - float(ref)) < 1e-8 * float(ref)

    def test_pink_slope(self):
        dist = RateDistribution(alpha=1.0, **WIDE)
        f = np.logspace(-2, 2, 200)
        slope = fit_loglog_slope(f, synthesized_spectrum(dist, f))
        assert abs(slope + 1.0) < 0.05

    def test_brown_slope(self):
        dist = RateDistribution(alpha=2.0, **WIDE)
        f = np.logspace(-2, 2, 200)
        slope = fit_loglog_slope(f, synthesized_spectrum(dist, f))
        assert abs(slope + 2.0) < 0.1

    def test_monotone_decreasing_positive(self):
        dist = RateDistribution(alpha=1.5, **WIDE)
        f = np.logspace(-4, 4, 60)
        s = synthesized_spectrum(dist, f)
        assert np.all(s > 0)
        assert np.all(np.diff(s) < 0)

    def test_narrow_distribution_reduces_to_lorentzian(self):
        g0 = 0.7
        dist = RateDistribution(alpha=1.0, gamma_min=g0, gamma_max=g0 * (1 + 1e-6))
        for f in (0.01, 0.2, 3.0):
            assert np.isclose(synthesized_spectrum(dist, f), rtn_psd(g0, f), rtol=1e-6)

    def test_invalid_frequency(self):
        dist = RateDistribution(alpha=1.0, **WIDE)
        with pytest.raises(ValueError):
            synthesized_spectrum(dist, 0.0)


class TestCollectionSpectrum:
    def test_single_rate_equals_lorentzian(self):
        f = np.logspace(-2, 2, 20)
        assert np.array_equal(collection_spectrum([0.3], f), rtn_psd(0.3, f))

    def test_twenty_fluctuator_slope(self):
        dist = RateDistribution(alpha=1.0, **WIDE)
        rng = np.random.default_rng(1234)
        rates = sample_rates(dist, rng, 20)
        band = slope_fit_band(dist)
        f = np.logspace(np.log10(band[0]), np.log10(band[1]), 200)
        slope = fit_loglog_slope(f, collection_spectrum(rates, f))
        assert abs(slope + 1.0) < 0.15

    def test_large_collection_converges_to_integral(self):
        dist = RateDistribution(alpha=1.0, **WIDE)
        rng = np.random.default_rng(2)
        rates = sample_rates(dist, rng, 1000)
        band = slope_fit_band(dist)
        f = np.logspace(np.log10(band[0]), np.log10(band[1]), 40)
        mean_spec = collection_spectrum(rates, f) / 1000
        target = synthesized_spectrum(dist, f)
        rms = np.sqrt(np.mean((mean_spec / target - 1.0) ** 2))
        assert rms < 0.05

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            collection_spectrum([], 1.0)


def test_band_is_one_decade_inside():
    dist = RateDistribution(alpha=1.0, **WIDE)
    lo, hi = slope_fit_band(dist)
    assert np.isclose(lo, 10 * 1e-4 / (2 * np.pi))
    assert np.isclose(hi, 1e4 / (20 * np.pi))
