"""Power-law switching-rate distributions and 1/f^alpha spectrum synthesis.

A spectrum proportional to 1/f^alpha on gamma_1 << 2 pi f << gamma_2 is
obtained by mixing single-fluctuator Lorentzians over switching rates drawn
from p_alpha(gamma) proportional to 1/gamma^alpha on [gamma_1, gamma_2]
(alpha in [1, 2]; alpha = 1 is log-uniform).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .rtn import rtn_psd

__all__ = [
    "RateDistribution",
    "rate_pdf",
    "rate_cdf",
    "rate_quantile",
    "sample_rate",
    "sample_rates",
    "synthesized_spectrum",
    "collection_spectrum",
    "slope_fit_band",
    "fit_loglog_slope",
    "SpectrumQuadratureError",
]


class SpectrumQuadratureError(RuntimeError):
    """Raised when the spectrum integral cannot reach the requested accuracy."""


@dataclass(frozen=True)
class RateDistribution:
    """p_alpha(gamma) proportional to 1/gamma^alpha on [gamma_min, gamma_max].

    Closed-form normalization::

        alpha = 1      : 1 / (gamma ln(gamma_max/gamma_min))
        1 < alpha <= 2 : (alpha-1)/gamma^alpha *
                         (g1 g2)^(alpha-1) / (g2^(alpha-1) - g1^(alpha-1))
    """

    alpha: float
    gamma_min: float
    gamma_max: float

    def __post_init__(self):
        if not 1.0 <= self.alpha <= 2.0:
            raise ValueError(f"alpha = {self.alpha} outside [1, 2]")
        if not 0.0 < self.gamma_min < self.gamma_max:
            raise ValueError("need 0 < gamma_min < gamma_max")

    @property
    def log_ratio(self) -> float:
        return math.log(self.gamma_max / self.gamma_min)


def rate_pdf(dist: RateDistribution, gamma):
    """Density of the switching-rate law; zero outside the support."""
    g = np.asarray(gamma, dtype=float)
    out = np.zeros_like(g, dtype=float)
    inside = (g >= dist.gamma_min) & (g <= dist.gamma_max)
    if dist.alpha == 1.0:
        out[inside] = 1.0 / (g[inside] * dist.log_ratio)
    else:
        b = dist.alpha - 1.0
        # norm = b (g1 g2)^b / (g2^b - g1^b), with the difference via expm1
        # so the alpha -> 1 limit stays accurate
        denom = math.expm1(b * dist.log_ratio)
        norm = b * dist.gamma_max**b / denom
        out[inside] = norm / g[inside] ** dist.alpha
    if np.isscalar(gamma) or np.ndim(gamma) == 0:
        return float(out)
    return out


def rate_cdf(dist: RateDistribution, gamma):
    """Cumulative distribution of the switching-rate law."""
    g = np.clip(np.asarray(gamma, dtype=float), dist.gamma_min, dist.gamma_max)
    if dist.alpha == 1.0:
        out = np.log(g / dist.gamma_min) / dist.log_ratio
    else:
        b = 1.0 - dist.alpha  # negative
        out = np.expm1(b * np.log(g / dist.gamma_min)) / math.expm1(b * dist.log_ratio)
    if np.isscalar(gamma) or np.ndim(gamma) == 0:
        return float(out)
    return out


def rate_quantile(dist: RateDistribution, u):
    """Inverse CDF: u = 0 maps to gamma_min, u -> 1 to gamma_max."""
    u_arr = np.asarray(u, dtype=float)
    if np.any((u_arr < 0.0) | (u_arr > 1.0)):
        raise ValueError("quantile argument outside [0, 1]")
    if dist.alpha == 1.0:
        out = dist.gamma_min * (dist.gamma_max / dist.gamma_min) ** u_arr
    else:
        b = 1.0 - dist.alpha
        out = dist.gamma_min * np.exp(
            np.log1p(u_arr * math.expm1(b * dist.log_ratio)) / b
        )
    # map the endpoints exactly; u = 1 otherwise cancels badly for alpha near 2
    out = np.where(u_arr == 0.0, dist.gamma_min, out)
    out = np.where(u_arr == 1.0, dist.gamma_max, out)
    if np.isscalar(u) or np.ndim(u) == 0:
        return float(out)
    return out


def sample_rate(dist: RateDistribution, rng: np.random.Generator) -> float:
    """One switching rate by inverse-CDF sampling."""
    return float(rate_quantile(dist, rng.random()))


def sample_rates(dist: RateDistribution, rng: np.random.Generator, size) -> np.ndarray:
    """Vectorized inverse-CDF sampling."""
    return rate_quantile(dist, rng.random(size))


def synthesized_spectrum(dist: RateDistribution, f, rtol: float = 1e-8):
    """Rate-averaged spectrum S(f) = integral of rtn_psd(f, gamma) p(gamma).

    The quadrature runs adaptively on log(gamma), where the Lorentzian knee
    is a smooth single bump; the estimated relative error must reach
    ``rtol`` or :class:`SpectrumQuadratureError` is raised.
    """
    f_arr = np.atleast_1d(np.asarray(f, dtype=float))
    if np.any(f_arr <= 0):
        raise ValueError("frequency must be positive")
    lo, hi = math.log(dist.gamma_min), math.log(dist.gamma_max)
    out = np.empty(f_arr.shape, dtype=float)
    for idx, fv in enumerate(f_arr):
        def integrand(u):
            g = math.exp(u)
            return rtn_psd(g, fv) * rate_pdf(dist, g) * g

        knee = math.log(2.0 * math.pi * fv)
        points = [p for p in (knee,) if lo < p < hi]
        val, err = quad(integrand, lo, hi, points=points or None,
                        epsabs=0.0, epsrel=min(rtol, 1e-10), limit=300)
        if not np.isfinite(val) or err > rtol * abs(val):
            raise SpectrumQuadratureError(
                f"spectrum quadrature at f={fv}: value={val}, err estimate={err}"
            )
        out[idx] = val
    if np.isscalar(f) or np.ndim(f) == 0:
        return float(out[0])
    return out


def collection_spectrum(rates, f):
    """Sum of single-fluctuator Lorentzians over an explicit rate list.

    For rates drawn from p_alpha, the per-fluctuator mean (1/N) * sum
    converges to :func:`synthesized_spectrum` as the collection grows.
    """
    rates_arr = np.asarray(rates, dtype=float)
    if rates_arr.size == 0:
        raise ValueError("rate list must be nonempty")
    f_arr = np.asarray(f, dtype=float)
    out = np.sum(
        [rtn_psd(g, f_arr) for g in rates_arr.ravel()], axis=0
    )
    if np.isscalar(f) or np.ndim(f) == 0:
        return float(out)
    return out


def slope_fit_band(dist: RateDistribution) -> tuple[float, float]:
    """Frequency band on which the power-law slope is fitted.

    The guaranteed scaling region gamma_1 << 2 pi f << gamma_2 is entered one
    decade inside either edge: [10 gamma_1 / 2 pi, gamma_2 / (20 pi)].
    """
    return (10.0 * dist.gamma_min / (2.0 * math.pi),
            dist.gamma_max / (20.0 * math.pi))


def fit_loglog_slope(f, s) -> float:
    """Least-squares slope of log(s) against log(f)."""
    f_arr = np.asarray(f, dtype=float)
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0) or np.any(f_arr <= 0):
        raise ValueError("slope fit requires positive frequencies and spectra")
    return float(np.polyfit(np.log(f_arr), np.log(s_arr), 1)[0])
