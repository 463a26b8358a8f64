"""Random-telegraph-noise primitives.

A telegraph fluctuator c(t) flips between -1 and +1 at Poisson rate gamma and
imprints the phase phi(t) = -nu * integral of c on a coupled qubit.  This
module provides

* the dephasing coefficient D_m(gamma, t) = <exp(i m phi(t))>, with its
  overdamped (gamma > m nu), underdamped (gamma < m nu) and degenerate
  branches evaluated in numerically stable form,
* the exact phase distribution (two delta atoms plus a Bessel-function
  continuum on |phi| < nu t),
* exact trajectory sampling and phase integration, and
* the Lorentzian spectral density of a single fluctuator.

The coupling nu defines the unit system and is fixed to 1: rates are given as
gamma/nu and times as nu*t.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import i0e, i1e

__all__ = [
    "NU",
    "RtnParams",
    "RtnTrajectory",
    "RtnPhase",
    "PhaseDistribution",
    "dephasing_coefficient",
    "d_coefficient",
    "phase_distribution",
    "phase_pdf",
    "sample_trajectory",
    "phase_of",
    "phases_at",
    "rtn_psd",
]

#: System-environment coupling; fixes the time unit.
NU = 1.0

#: Relative half-width of the switch-over window around gamma = m*nu inside
#: which the degenerate limit e^{-gamma t}(1 + gamma t) is used.
DEGENERATE_WINDOW = 1e-9

#: Below this value of kappa*t the bracket is evaluated by series expansion.
SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class RtnParams:
    """Single-fluctuator parameters: switching rate and phase multiplier."""

    gamma: float
    m: int = 2
    nu: float = NU

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("switching rate gamma must be positive")
        if self.m not in (2, 4):
            raise ValueError("phase multiplier m must be 2 or 4")
        if self.nu != NU:
            raise ValueError("the coupling nu is fixed to 1 (it sets the units)")


def dephasing_coefficient(gamma, m: int, t):
    """D_m(gamma, t) = <exp(i m phi(t))> for a telegraph phase, vectorized.

    Branches::

        gamma > m nu : e^{-gamma t}[cosh(kappa t) + (gamma/kappa) sinh(kappa t)]
        gamma < m nu : e^{-gamma t}[cos(kappa t)  + (gamma/kappa) sin(kappa t)]
        gamma = m nu : e^{-gamma t}(1 + gamma t)

    with kappa = sqrt(|gamma^2 - (m nu)^2|).  The overdamped branch is
    rewritten as a sum of decaying exponentials with the slow rate computed
    as (m nu)^2/(gamma + kappa), so it neither overflows nor loses precision
    in the motional-narrowing regime gamma >> m nu.  Broadcasts over gamma
    and t; D(gamma, 0) = 1 exactly.
    """
    if m not in (2, 4):
        raise ValueError("phase multiplier m must be 2 or 4")
    g = np.asarray(gamma, dtype=float)
    tt = np.asarray(t, dtype=float)
    if np.any(g <= 0):
        raise ValueError("switching rate gamma must be positive")
    if np.any(tt < 0):
        raise ValueError("time must be nonnegative")
    g, tt = np.broadcast_arrays(g, tt)
    scalar = g.ndim == 0
    g = np.atleast_1d(g)
    tt = np.atleast_1d(tt)
    out = np.empty(g.shape, dtype=float)

    mnu = m * NU
    # kappa via the factored form: exact where gamma is within a few ulp of m nu
    kappa = np.sqrt(np.abs(mnu - g) * (mnu + g))
    s = kappa * tt
    gt = g * tt

    degen = np.abs(g - mnu) < DEGENERATE_WINDOW * mnu
    small = (s < SERIES_CUTOFF) & ~degen
    over = (g > mnu) & ~degen & ~small
    under = (g < mnu) & ~degen & ~small

    if np.any(degen):
        out[degen] = np.exp(-gt[degen]) * (1.0 + gt[degen])
    if np.any(small):
        # cosh/cos = 1 +- s^2/2 + s^4/24, (g/k) sinh|sin = g t (1 +- s^2/6 + s^4/120)
        sign = np.where(g[small] > mnu, 1.0, -1.0)
        s2 = s[small] * s[small]
        bracket = (
            1.0
            + sign * 0.5 * s2
            + s2 * s2 / 24.0
            + gt[small] * (1.0 + sign * s2 / 6.0 + s2 * s2 / 120.0)
        )
        out[small] = np.exp(-gt[small]) * bracket
    if np.any(over):
        go, ko, to = g[over], kappa[over], tt[over]
        slow = mnu * mnu / (go + ko)  # = gamma - kappa, no cancellation
        out[over] = 0.5 * (1.0 + go / ko) * np.exp(-slow * to) - 0.5 * (
            slow / ko
        ) * np.exp(-(go + ko) * to)
    if np.any(under):
        gu, ku = g[under], kappa[under]
        su = s[under]
        out[under] = np.exp(-gt[under]) * (np.cos(su) + gu / ku * np.sin(su))

    out[tt == 0.0] = 1.0
    return float(out[0]) if scalar else out


def d_coefficient(params: RtnParams, t):
    """Dephasing coefficient for the given fluctuator parameters."""
    return dephasing_coefficient(params.gamma, params.m, t)


@dataclass(frozen=True)
class RtnPhase:
    """Accumulated telegraph phase, |value| <= nu * t."""

    value: float


@dataclass(frozen=True)
class PhaseDistribution:
    """Distribution of the telegraph phase phi(t) for switching rate gamma.

    The law has two delta atoms of weight exp(-gamma t)/2 at phi = +-nu t
    (the no-flip trajectories) and a continuous Bessel-function density on
    |phi| < nu t.  Atom weights and the continuum are kept separate; together
    they are normalized to 1.
    """

    gamma: float
    t: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("switching rate gamma must be positive")
        if not self.t > 0:
            raise ValueError("time must be positive")

    @property
    def atom_weight(self) -> float:
        """Weight of each of the two delta atoms at phi = +-nu t."""
        return 0.5 * float(np.exp(-self.gamma * self.t))

    @property
    def atom_locations(self) -> tuple[float, float]:
        return (-NU * self.t, NU * self.t)

    def density(self, phi):
        """Continuous part of the density; zero outside |phi| < nu t.

        Evaluated with exponentially scaled Bessel functions: the factor
        e^{-gamma t} I_v(z) with z <= gamma t is computed as
        i_v_e(z) * e^{z - gamma t}, which cannot overflow even for
        gamma t ~ 1e5.
        """
        phi_arr = np.asarray(phi, dtype=float)
        scalar = phi_arr.ndim == 0
        phi_arr = np.atleast_1d(phi_arr)
        out = np.zeros(phi_arr.shape, dtype=float)
        vt = NU * self.t
        gt = self.gamma * self.t
        inside = np.abs(phi_arr) < vt
        if np.any(inside):
            u = phi_arr[inside] / vt
            root = np.sqrt(1.0 - u * u)
            z = gt * root
            scale = np.exp(z - gt)
            out[inside] = (
                0.5 * (self.gamma / NU) * (i1e(z) / root + i0e(z)) * scale
            )
        return float(out[0]) if scalar else out

    def characteristic_value(self, m: int, quad_tol: float = 1e-10) -> float:
        """<exp(i m phi)> by quadrature over the continuum plus the atoms."""
        from scipy.integrate import quad

        vt = NU * self.t
        cont, _ = quad(
            lambda p: np.cos(m * p) * self.density(p),
            -vt,
            vt,
            epsabs=quad_tol,
            epsrel=quad_tol,
            limit=400,
        )
        return float(cont + 2.0 * self.atom_weight * np.cos(m * vt))


def phase_distribution(gamma: float, t: float) -> PhaseDistribution:
    """Exact phase distribution of a telegraph fluctuator at time t."""
    return PhaseDistribution(gamma=gamma, t=t)


def phase_pdf(gamma: float, t: float, phi):
    """Continuous part of the phase density at phi (0 outside |phi| < nu t).

    The two delta atoms at +-nu t are exposed separately through
    :class:`PhaseDistribution`; this function returns only the absolutely
    continuous component.
    """
    return phase_distribution(gamma, t).density(phi)


@dataclass(frozen=True)
class RtnTrajectory:
    """One telegraph realization: strictly increasing flip times in
    (0, horizon] plus the initial sign.  Only flips are stored, so the phase
    integral is exact and memory is O(number of flips)."""

    flip_times: np.ndarray
    initial_value: int
    horizon: float

    def __post_init__(self):
        ft = np.asarray(self.flip_times, dtype=float)
        ft.setflags(write=False)
        object.__setattr__(self, "flip_times", ft)
        if self.initial_value not in (-1, 1):
            raise ValueError("initial_value must be -1 or +1")
        if ft.size and (np.any(np.diff(ft) <= 0) or ft[0] <= 0 or ft[-1] > self.horizon):
            raise ValueError("flip times must be strictly increasing within (0, horizon]")

    @property
    def n_flips(self) -> int:
        return int(self.flip_times.size)

    def values_at(self, times) -> np.ndarray:
        """c(t) sampled at the given times (right-continuous)."""
        times = np.asarray(times, dtype=float)
        k = np.searchsorted(self.flip_times, times, side="right")
        return self.initial_value * (-1.0) ** k


def sample_trajectory(gamma: float, horizon: float, rng: np.random.Generator) -> RtnTrajectory:
    """Draw a telegraph trajectory: flips from a Poisson process of rate
    gamma on (0, horizon], initial sign +-1 with probability 1/2."""
    if not gamma > 0:
        raise ValueError("switching rate gamma must be positive")
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    mean = gamma * horizon
    block = max(16, int(mean + 6.0 * np.sqrt(mean) + 16))
    gaps = rng.exponential(1.0 / gamma, size=block)
    times = np.cumsum(gaps)
    while times[-1] < horizon:
        more = rng.exponential(1.0 / gamma, size=block)
        times = np.concatenate([times, times[-1] + np.cumsum(more)])
    flips = times[times <= horizon]
    initial = int(rng.integers(0, 2)) * 2 - 1
    return RtnTrajectory(flip_times=flips, initial_value=initial, horizon=horizon)


def phases_at(trajectory: RtnTrajectory, times) -> np.ndarray:
    """phi(t) = -nu * integral_0^t c(t') dt' at each requested time, exact.

    With flips f_1 < ... < f_n <= t the integral is
    c_0 [2 sum_j (-1)^{j+1} f_j + (-1)^n t]; the alternating prefix sums are
    shared across all requested times.
    """
    times_arr = np.asarray(times, dtype=float)
    if np.any(times_arr < 0) or np.any(times_arr > trajectory.horizon):
        raise ValueError("requested time outside [0, horizon]")
    ft = trajectory.flip_times
    signs = (-1.0) ** np.arange(ft.size)
    alt = np.concatenate([[0.0], np.cumsum(ft * signs)])  # +f1 -f2 +f3 ...
    k = np.searchsorted(ft, times_arr, side="right")
    integral = trajectory.initial_value * (2.0 * alt[k] + (-1.0) ** k * times_arr)
    return -NU * integral


def phase_of(trajectory: RtnTrajectory, t: float) -> RtnPhase:
    """Exact accumulated phase of one trajectory at time t."""
    value = float(phases_at(trajectory, np.asarray([t]))[0])
    return RtnPhase(value=value)


def rtn_psd(gamma: float, f):
    """Lorentzian spectral density 4 gamma / (4 pi^2 f^2 + gamma^2).

    Normalized so that the integral over all f equals 2 (one-sided
    convention for a unit-variance process).  Note the knee parameterization:
    this Lorentzian corresponds to an autocovariance e^{-gamma |tau|}, i.e.
    to a telegraph process flipping at rate gamma/2.  A process with flip
    rate gamma (autocovariance e^{-2 gamma |tau|}) has the spectrum
    ``rtn_psd(2 * gamma, f)``.
    """
    if not gamma > 0:
        raise ValueError("switching rate gamma must be positive")
    f_arr = np.asarray(f, dtype=float)
    out = 4.0 * gamma / (4.0 * np.pi**2 * f_arr**2 + gamma * gamma)
    if np.isscalar(f) or np.ndim(f) == 0:
        return float(out)
    return out
