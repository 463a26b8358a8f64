"""Monte Carlo trajectory oracle.

Every analytic coefficient in :mod:`qflicker.dynamics` is an average of
cos(2 (phi_A + phi_B)) over realizations of the stochastic qubit phases, and
this module estimates exactly that average without ever evaluating the
closed-form coefficient branches, so the two pipelines validate each other.

Sampling scheme
---------------
Only the phases at the grid times are needed, so each fluctuator is advanced
interval by interval with an exact bridge: the number of flips in an interval
of length tau is Poisson(gamma tau); conditioned on n flips, the flip times
are uniform order statistics, and the alternating sum that gives the
occupation integral of c(t) reduces to a Beta variable,

    n even:  integral = c0 tau (1 - 2 B),  B ~ Beta(n/2, n/2 + 1)
    n odd :  integral = c0 tau (2 B - 1),  B ~ Beta((n+1)/2, (n+1)/2)

with the sign flipping on odd counts.  This reproduces the telegraph process
exactly at the grid times at a cost independent of the switching rate (the
event-driven sampler in :mod:`qflicker.rtn` serves as its cross-check).

Reproducibility
---------------
Trajectories are processed in fixed-size batches.  Batch b draws from a
dedicated counter-based stream, Philox keyed on (seed, 2^33 + b), and batch
partial sums are reduced in batch order with exact (fsum) accumulation, so
results are bitwise identical for any thread count.  ``threads=1`` is the
default single-threaded mode.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .correlations import discord_bell_frame, h_function, negativity
from .dynamics import (
    CorrelationSeries,
    Scenario,
    ScenarioConfig,
    Topology,
    sample_fixed_rates,
)
from .noise_spectra import rate_quantile
from .qstate import PHI_PLUS, PSI_PLUS, TwoQubitDensityMatrix
from .rtn import NU

__all__ = [
    "McConfig",
    "McEstimate",
    "McCorrelationSeries",
    "evolve_trajectory",
    "estimate_phase_factor",
    "estimate_coefficient",
    "estimate_correlations",
    "series_z_scores",
]

#: Batch streams are Philox keyed on (seed, TRAJECTORY_STREAM_BASE + batch).
TRAJECTORY_STREAM_BASE = 2**33

_PROJ_PHI = np.outer(PHI_PLUS, PHI_PLUS.conj())
_PROJ_PSI = np.outer(PSI_PLUS, PSI_PLUS.conj())
# i |psi+><phi+| - i |phi+><psi+|, the coherence direction reached by the flow
_COHERENCE = 1j * np.outer(PSI_PLUS, PHI_PLUS.conj()) - 1j * np.outer(PHI_PLUS, PSI_PLUS.conj())


@dataclass(frozen=True)
class McConfig:
    """Trajectory count plus the scenario being validated."""

    scenario: ScenarioConfig
    n_trajectories: int = 100_000
    batch_size: int = 8192

    def __post_init__(self):
        if self.n_trajectories < 1000:
            raise ValueError("need at least 1000 trajectories for meaningful errors")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")


@dataclass(frozen=True)
class McEstimate:
    """Coefficient estimate and trajectory-averaged state at one time."""

    time: float
    coeff_mean: float
    coeff_stderr: float
    density_matrix: TwoQubitDensityMatrix


@dataclass(frozen=True)
class McCorrelationSeries:
    """Correlation measures of the trajectory-averaged states, with the
    delta-method standard errors used for z-score comparisons."""

    times: np.ndarray
    negativity: np.ndarray
    negativity_stderr: np.ndarray
    discord: np.ndarray
    discord_stderr: np.ndarray
    coeff_mean: np.ndarray
    coeff_stderr: np.ndarray
    coherence_mean: np.ndarray
    coherence_stderr: np.ndarray


def evolve_trajectory(phi_a: float, phi_b: float) -> np.ndarray:
    """Pure state reached from |phi+> under one phase realization.

    exp(i phi_A sx) (x) exp(i phi_B sx) |phi+> =
    cos(phi_A + phi_B) |phi+> + i sin(phi_A + phi_B) |psi+>.
    """
    total = phi_a + phi_b
    return np.cos(total) * PHI_PLUS + 1j * np.sin(total) * PSI_PLUS


def _batch_generator(seed: int, batch_index: int) -> np.random.Generator:
    key = np.array([seed, TRAJECTORY_STREAM_BASE + batch_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _interval_step(gen, rates, c, tau):
    """One exact bridge step: occupation integral over tau and the new sign."""
    counts = gen.poisson(rates * tau)
    odd = (counts & 1).astype(bool)
    integral = np.full(c.shape, tau)
    pos = counts > 0
    if np.any(pos):
        half = counts[pos] / 2.0
        is_odd = odd[pos]
        a = np.where(is_odd, half + 0.5, half)
        b = np.where(is_odd, half + 0.5, half + 1.0)
        beta = gen.beta(a, b)
        integral[pos] = tau * np.where(is_odd, 2.0 * beta - 1.0, 1.0 - 2.0 * beta)
    integral = integral * c
    return integral, np.where(odd, -c, c)


def estimate_phase_factor(gamma: float, m: int, times, n_trajectories: int,
                          seed: int, batch_size: int = 8192):
    """Sample mean and standard error of cos(m phi(t)) for one fluctuator.

    The direct trajectory estimate of the single-fluctuator dephasing
    coefficient, on the same counter-based streams as the two-qubit
    estimators.  Returns ``(means, stderrs)`` over the requested times.
    """
    if m not in (2, 4):
        raise ValueError("phase multiplier m must be 2 or 4")
    times_arr = np.asarray(times, dtype=float)
    sizes = []
    remaining = int(n_trajectories)
    while remaining > 0:
        take = min(batch_size, remaining)
        sizes.append(take)
        remaining -= take
    partials = []
    for b, n in enumerate(sizes):
        gen = _batch_generator(seed, b)
        rates = np.full(n, float(gamma))
        c = gen.integers(0, 2, size=n) * 2 - 1
        acc = np.zeros(n)
        sums = np.zeros((2, len(times_arr)))
        t_prev = 0.0
        for k, t in enumerate(times_arr):
            tau = t - t_prev
            if tau > 0.0:
                integral, c = _interval_step(gen, rates, c, tau)
                acc -= NU * integral
            t_prev = t
            x = np.cos(m * acc)
            sums[0, k] = x.sum()
            sums[1, k] = (x * x).sum()
        partials.append(sums)
    n_total = sum(sizes)
    pooled = np.empty((2, len(times_arr)))
    for row in range(2):
        for k in range(len(times_arr)):
            pooled[row, k] = math.fsum(p[row, k] for p in partials)
    mean = pooled[0] / n_total
    var = np.clip((pooled[1] - n_total * mean**2) / (n_total - 1), 0.0, None)
    return mean, np.sqrt(var / n_total)


def _batch_sums(config: McConfig, times: np.ndarray, batch_index: int, n: int,
                fixed_rates: np.ndarray | None):
    """Per-batch accumulators: sums of cos, cos^2, sin, sin^2 of 2*Phi."""
    sc = config.scenario
    gen = _batch_generator(sc.seed, batch_index)
    common = sc.topology is Topology.COMMON
    n_fl = 1 if sc.scenario is Scenario.SINGLE_RANDOM_FLUCTUATOR else sc.n_fluctuators
    n_slots = n_fl if common else 2 * n_fl

    # Draw order is fixed: rates slot-major, then initial signs slot-major,
    # then the interval updates, so a batch is a pure function of its key.
    if sc.scenario is Scenario.FIXED_COLLECTION:
        rates = [np.full(n, fixed_rates[s % n_fl]) for s in range(n_slots)]
    else:
        rates = [rate_quantile(sc.dist, gen.random(n)) for _ in range(n_slots)]
    signs = [gen.integers(0, 2, size=n) * 2 - 1 for _ in range(n_slots)]

    acc = np.zeros((2, n))  # phase of qubit A and B
    sums = np.zeros((4, len(times)))
    t_prev = 0.0
    for k, t in enumerate(times):
        tau = t - t_prev
        if tau > 0.0:
            for s in range(n_slots):
                integral, signs[s] = _interval_step(gen, rates[s], signs[s], tau)
                if common:
                    acc[0] -= NU * integral
                else:
                    acc[s // n_fl] -= NU * integral
        t_prev = t
        # observable argument 2*(phi_A + phi_B); a common bath means phi_B = phi_A
        total = 4.0 * acc[0] if common else 2.0 * (acc[0] + acc[1])
        x = np.cos(total)
        y = np.sin(total)
        sums[0, k] = x.sum()
        sums[1, k] = (x * x).sum()
        sums[2, k] = y.sum()
        sums[3, k] = (y * y).sum()
    return sums


def _pooled_moments(config: McConfig, threads: int = 1):
    """Coefficient and coherence means with standard errors, all times."""
    sc = config.scenario
    times = sc.time_grid
    fixed_rates = None
    if sc.scenario is Scenario.FIXED_COLLECTION:
        fixed_rates = sc.fixed_rates
        if fixed_rates is None:
            fixed_rates = sample_fixed_rates(sc.dist, sc.n_fluctuators, sc.seed)

    n_total = config.n_trajectories
    sizes = []
    remaining = n_total
    while remaining > 0:
        take = min(config.batch_size, remaining)
        sizes.append(take)
        remaining -= take

    def run(b):
        return _batch_sums(config, times, b, sizes[b], fixed_rates)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(run, range(len(sizes))))
    else:
        partials = [run(b) for b in range(len(sizes))]

    # exact reduction in batch order, independent of execution schedule
    pooled = np.empty((4, len(times)))
    for row in range(4):
        for k in range(len(times)):
            pooled[row, k] = math.fsum(p[row, k] for p in partials)

    mean = pooled[0] / n_total
    var = np.clip((pooled[1] - n_total * mean**2) / (n_total - 1), 0.0, None)
    stderr = np.sqrt(var / n_total)
    sin_mean = pooled[2] / n_total
    sin_var = np.clip((pooled[3] - n_total * sin_mean**2) / (n_total - 1), 0.0, None)
    sin_stderr = np.sqrt(sin_var / n_total)
    return times, mean, stderr, sin_mean, sin_stderr


def _averaged_matrix(coeff: float, coherence: float) -> TwoQubitDensityMatrix:
    m = (
        0.5 * (1.0 + coeff) * _PROJ_PHI
        + 0.5 * (1.0 - coeff) * _PROJ_PSI
        + 0.5 * coherence * _COHERENCE
    )
    return TwoQubitDensityMatrix(m)


def estimate_coefficient(config: McConfig, threads: int = 1) -> list[McEstimate]:
    """Unbiased Bell-mixture coefficient estimates at every grid time.

    The per-trajectory observable is the expectation of the projector onto
    |phi+> minus the projector onto |psi+>, which equals cos(2 (phi_A +
    phi_B)); its mean is the scenario coefficient.  Standard errors come from
    the sample variance.  Random-rate scenarios draw a fresh rate (set) per
    trajectory; a common environment feeds the identical trajectory to both
    qubits.
    """
    times, mean, stderr, sin_mean, _ = _pooled_moments(config, threads=threads)
    return [
        McEstimate(
            time=float(t),
            coeff_mean=float(m),
            coeff_stderr=float(s),
            density_matrix=_averaged_matrix(float(m), float(c)),
        )
        for t, m, s, c in zip(times, mean, stderr, sin_mean)
    ]


def _h_slope(x: float) -> float:
    """d h(x) / dx = log2((1+x)/(1-x)) / 2, capped near |x| = 1."""
    x = min(abs(x), 1.0 - 1e-12)
    return 0.5 * math.log2((1.0 + x) / (1.0 - x))


def estimate_correlations(config: McConfig, threads: int = 1) -> McCorrelationSeries:
    """Negativity and discord of the trajectory-averaged density matrices.

    Both measures are evaluated on the averaged matrix itself (negativity
    through the partial-transpose spectrum, discord through the Bell-frame
    spectral form), not as h of the coefficient estimate, so the analytic
    Q = h(N) identity is genuinely cross-checked.

    Standard errors are delta-method propagations of the (cos, sin) moment
    errors, floored by the quadrature norm of both so that the comparison
    stays calibrated where the folded estimators sit on top of a zero of the
    coefficient.
    """
    times, mean, stderr, sin_mean, sin_stderr = _pooled_moments(config, threads=threads)
    n_times = len(times)
    neg = np.empty(n_times)
    neg_err = np.empty(n_times)
    dis = np.empty(n_times)
    dis_err = np.empty(n_times)
    for k in range(n_times):
        m, sm, c, sc_ = mean[k], stderr[k], sin_mean[k], sin_stderr[k]
        if sm == 0.0 and m == 1.0 and c == 0.0:
            # pure averaged state (t = 0): both measures are 1 identically
            neg[k], dis[k] = 1.0, 1.0
            neg_err[k], dis_err[k] = 0.0, 0.0
            continue
        rho = _averaged_matrix(m, c)
        neg[k] = negativity(rho)
        dis[k] = discord_bell_frame(rho)
        radius = math.hypot(m, c)
        floor = math.hypot(sm, sc_)
        if radius > 0.0:
            delta = math.hypot(m * sm, c * sc_) / radius
        else:
            delta = 0.0
        neg_err[k] = max(delta, floor)
        dis_err[k] = max(_h_slope(radius) * neg_err[k], h_function(min(3.0 * floor, 1.0)) / 3.0)
    return McCorrelationSeries(
        times=times,
        negativity=neg,
        negativity_stderr=neg_err,
        discord=dis,
        discord_stderr=dis_err,
        coeff_mean=mean,
        coeff_stderr=stderr,
        coherence_mean=sin_mean,
        coherence_stderr=sin_stderr,
    )


def _z(diff: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    out = np.empty(diff.shape)
    zero = sigma == 0.0
    out[~zero] = np.abs(diff[~zero]) / sigma[~zero]
    out[zero] = np.where(np.abs(diff[zero]) <= 1e-12, 0.0, np.inf)
    return out


def _h_slope_arr(x: np.ndarray) -> np.ndarray:
    x = np.minimum(np.abs(x), 1.0 - 1e-12)
    return 0.5 * np.log2((1.0 + x) / (1.0 - x))


def series_z_scores(analytic: CorrelationSeries, mc: McCorrelationSeries) -> dict:
    """Pointwise z-scores of the Monte Carlo estimates against an analytic
    series on the same grid.

    The discord scale ``sigma`` uses the steeper of the endpoint slopes of h:
    h is convex, so the secant between the compared values never exceeds that
    slope and the transformed statistic stays calibrated right up to the
    pure-state boundary, where h' blows up.
    """
    if len(analytic.times) != len(mc.times) or np.max(
        np.abs(analytic.times - mc.times)
    ) > 1e-12:
        raise ValueError("series are not on the same time grid")
    slope = np.maximum(_h_slope_arr(mc.negativity), _h_slope_arr(analytic.negativity))
    sigma_q = np.maximum(slope * mc.negativity_stderr, mc.discord_stderr)
    return {
        "coefficient": _z(mc.coeff_mean - analytic.coefficients, mc.coeff_stderr),
        "negativity": _z(mc.negativity - analytic.negativity, mc.negativity_stderr),
        "discord": _z(mc.discord - analytic.discord, sigma_q),
    }
