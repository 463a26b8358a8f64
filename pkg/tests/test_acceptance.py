"""End-to-end acceptance suite.

Every test prints one `[criterion N] ... PASS/FAIL` line (run pytest with -s
to see them as they happen) and then asserts, so a failing criterion is both
visible and red.  The suite seed is fixed: the Monte Carlo criteria are
statistical statements evaluated on a pinned, reproducible realization.
"""
import time

import numpy as np
import pytest
from scipy.stats import kstest

from qflicker.correlations import discord_bell_diagonal, negativity
from qflicker.dynamics import (
    Scenario,
    ScenarioConfig,
    Topology,
    default_time_grid,
    evolve_series,
    gamma_random,
    peak_spacings,
    revival_peak_times,
    sample_fixed_rates,
)
from qflicker.mc_engine import (
    McConfig,
    estimate_correlations,
    estimate_phase_factor,
    series_z_scores,
)
from qflicker.noise_spectra import (
    RateDistribution,
    collection_spectrum,
    fit_loglog_slope,
    slope_fit_band,
    synthesized_spectrum,
)
from qflicker.qstate import BellMixture, bell_mixture_to_matrix
from qflicker.rtn import (
    dephasing_coefficient,
    phase_distribution,
    phases_at,
    sample_trajectory,
)

SEED = 1234
WIDE = dict(gamma_min=1e-4, gamma_max=1e4)


def report(num, label, ok, detail=""):
    tail = f"  ({detail})" if detail else ""
    print(f"\n[criterion {num}] {label}: {'PASS' if ok else 'FAIL'}{tail}")
    return ok


def make_config(scenario, topology, alpha, grid, seed=SEED):
    return ScenarioConfig(
        scenario=scenario,
        topology=topology,
        dist=RateDistribution(alpha=alpha, **WIDE),
        time_grid=grid,
        seed=seed,
    )


ALL_COMBOS = [(s, t) for s in Scenario for t in Topology]


def test_criterion_1_identity_suite():
    start = time.perf_counter()
    grid = default_time_grid(20.0, 200)
    worst_n = worst_q = 0.0
    for scenario, topology in ALL_COMBOS:
        for alpha in (1.0, 1.5, 2.0):
            series = evolve_series(make_config(scenario, topology, alpha, grid))
            assert series.negativity[0] == 1.0 and series.discord[0] == 1.0
            for coeff, n_val, q_val in zip(series.coefficients, series.negativity,
                                           series.discord):
                rho = bell_mixture_to_matrix(BellMixture(coeff))
                worst_n = max(worst_n, abs(negativity(rho) - n_val))
                worst_q = max(
                    worst_q, abs(discord_bell_diagonal(1.0, -coeff, coeff) - q_val)
                )
    elapsed = time.perf_counter() - start
    ok = worst_n < 1e-10 and worst_q < 1e-10 and elapsed < 10.0
    assert report(
        1, "identity N=|coeff|, Q=h(coeff), N(0)=Q(0)=1", ok,
        f"max|dN|={worst_n:.1e}, max|dQ|={worst_q:.1e}, {elapsed:.1f}s",
    )


def test_criterion_2_closed_form_rtn_oracle():
    start = time.perf_counter()
    grid = np.linspace(0.0, 20.0, 50)
    checked = failed = 0
    for gamma in (0.1, 1.0, 2.0, 4.0, 100.0):
        for m in (2, 4):
            mean, err = estimate_phase_factor(gamma, m, grid, 100_000,
                                              seed=SEED + int(10 * gamma) + m)
            ref = dephasing_coefficient(gamma, m, grid)
            z = np.abs(mean - ref) / np.where(err > 0, err, 1.0)
            z[(err == 0.0) & (np.abs(mean - ref) < 1e-12)] = 0.0
            checked += len(grid)
            failed += int(np.sum(z > 3.0))
    elapsed = time.perf_counter() - start
    fraction = 1.0 - failed / checked
    ok = fraction >= 0.99 and elapsed < 60.0
    assert report(
        2, "trajectory estimate of cos(m phi) vs closed form", ok,
        f"{checked - failed}/{checked} points within 3 sigma, {elapsed:.1f}s",
    )


@pytest.mark.parametrize(
    "alpha,topology,target,label",
    [
        (1.0, Topology.SEPARATE, np.pi, "1/f separate"),
        (1.0, Topology.COMMON, np.pi / 2, "1/f common"),
        (2.0, Topology.SEPARATE, np.pi / 2, "1/f^2 separate"),
        (2.0, Topology.COMMON, np.pi / 4, "1/f^2 common"),
    ],
)
def test_criterion_3_single_fluctuator_periodicity(alpha, topology, target, label):
    grid = default_time_grid(20.0, 2000)
    series = evolve_series(
        make_config(Scenario.SINGLE_RANDOM_FLUCTUATOR, topology, alpha, grid)
    )
    peaks = revival_peak_times(grid, series.negativity)
    spacing = float(np.mean(peak_spacings(peaks)))
    rel = abs(spacing - target) / target
    assert report(
        3, f"revival spacing, {label}", rel < 0.05,
        f"spacing={spacing:.4f}, target={target:.4f}, err={rel:.2%}",
    )


def test_criterion_4_pink_collection_monotonic():
    grid = default_time_grid(20.0, 2000)
    series = {}
    for nf in (20, 100):
        cfg = ScenarioConfig(
            scenario=Scenario.FIXED_COLLECTION,
            topology=Topology.SEPARATE,
            dist=RateDistribution(alpha=1.0, **WIDE),
            time_grid=grid,
            n_fluctuators=nf,
            seed=SEED,
        )
        series[nf] = evolve_series(cfg)
    worst = max(
        float(np.max(np.diff(series[nf].negativity))) for nf in (20, 100)
    )
    worst_q = max(float(np.max(np.diff(series[nf].discord))) for nf in (20, 100))
    n20, n100 = series[20].negativity[1:], series[100].negativity[1:]
    dominated = bool(np.all(n100 <= n20) and np.all(n100[n20 > 0] < n20[n20 > 0]))
    ok = worst <= 1e-6 and worst_q <= 1e-6 and dominated
    assert report(
        4, "1/f collection: monotone decay, faster for more fluctuators", ok,
        f"max increase N={worst:.1e}, Q={worst_q:.1e}, pointwise domination={dominated}",
    )


def _finite_dead_intervals(values, threshold=1e-6):
    dead = (values < threshold).astype(int)
    starts = np.flatnonzero(np.diff(np.concatenate([[0], dead])) == 1)
    ends = np.flatnonzero(np.diff(np.concatenate([dead, [0]])) == -1)
    interior = (starts > 0) & (ends < len(values) - 1)
    return int(np.sum(interior))


def test_criterion_5_brown_collection_sudden_death_and_revivals():
    grid = default_time_grid(20.0, 2000)
    results = {}
    for topology, target, tol in (
        (Topology.SEPARATE, np.pi / 2, 0.10),
        (Topology.COMMON, np.pi / 4, 0.10),
    ):
        cfg = ScenarioConfig(
            scenario=Scenario.FIXED_COLLECTION,
            topology=topology,
            dist=RateDistribution(alpha=2.0, **WIDE),
            time_grid=grid,
            n_fluctuators=20,
            seed=SEED,
        )
        series = evolve_series(cfg)
        n_dead = _finite_dead_intervals(series.negativity)
        peaks = revival_peak_times(grid, series.negativity)
        spacing = float(np.mean(peak_spacings(peaks)))
        rel = abs(spacing - target) / target
        results[topology] = (n_dead, spacing, rel, rel < tol and n_dead >= 3)

    # peak heights decrease as the collection grows (nested rate sets)
    big = ScenarioConfig(
        scenario=Scenario.FIXED_COLLECTION, topology=Topology.SEPARATE,
        dist=RateDistribution(alpha=2.0, **WIDE), time_grid=grid,
        n_fluctuators=100, seed=SEED,
    )
    small_cfg = ScenarioConfig(
        scenario=Scenario.FIXED_COLLECTION, topology=Topology.SEPARATE,
        dist=RateDistribution(alpha=2.0, **WIDE), time_grid=grid,
        n_fluctuators=20, seed=SEED,
    )
    n20 = evolve_series(small_cfg).negativity
    n100 = evolve_series(big).negativity
    heights_shrink = bool(
        np.all(n100[1:] <= n20[1:])
        and np.max(n100[grid > 0.5]) < np.max(n20[grid > 0.5])
    )
    ok = all(r[3] for r in results.values()) and heights_shrink
    detail = "; ".join(
        f"{t.value}: spacing={r[1]:.4f} (err {r[2]:.2%}), dead intervals={r[0]}"
        for t, r in results.items()
    )
    assert report(
        5, "1/f^2 collection: sudden death and revivals", ok,
        detail + f"; heights shrink with N_f={heights_shrink}",
    )


def test_criterion_6_random_rate_pathway():
    grid = default_time_grid(20.0, 200)
    dist = RateDistribution(alpha=1.0, **WIDE)
    worst = 0.0
    for topology in Topology:
        single = evolve_series(
            make_config(Scenario.SINGLE_RANDOM_FLUCTUATOR, topology, 1.0, grid)
        )
        one = ScenarioConfig(
            scenario=Scenario.RANDOM_RATE_COLLECTION, topology=topology,
            dist=dist, time_grid=grid, n_fluctuators=1, seed=SEED,
        )
        worst = max(worst, float(np.max(np.abs(
            evolve_series(one).coefficients - single.coefficients
        ))))
    envelope_ok = True
    t = grid[1:]
    prev = np.abs(gamma_random(dist, 1, Topology.SEPARATE, t))
    for nf in range(2, 12):
        cur = np.abs(gamma_random(dist, nf, Topology.SEPARATE, t))
        envelope_ok &= bool(np.all(cur <= prev + 1e-15))
        prev = cur
    ok = worst <= 1e-8 and envelope_ok
    assert report(
        6, "random-rate collection reduces and nests", ok,
        f"N_f=1 max deviation={worst:.1e}, envelope monotone={envelope_ok}",
    )


@pytest.mark.parametrize(
    "alpha,estimator,tol",
    [
        (1.0, "integral", 0.05),
        (1.0, "sum20", 0.15),
        (2.0, "integral", 0.05),
        (2.0, "sum20", 0.15),
    ],
)
def test_criterion_7_spectrum_slopes(alpha, estimator, tol):
    dist = RateDistribution(alpha=alpha, **WIDE)
    lo, hi = slope_fit_band(dist)
    f = np.logspace(np.log10(lo), np.log10(hi), 200)
    if estimator == "integral":
        slope = fit_loglog_slope(f, synthesized_spectrum(dist, f))
    else:
        rates = sample_fixed_rates(dist, 20, seed=SEED)
        slope = fit_loglog_slope(f, collection_spectrum(rates, f))
    err = abs(slope + alpha)
    assert report(
        7, f"spectrum slope, alpha={alpha}, {estimator}", err < tol,
        f"slope={slope:.4f}, target={-alpha}, err={err:.3f}, tol={tol}",
    )


def test_criterion_8_phase_distribution_consistency():
    worst = 0.0
    for gamma in (0.2, 1.0, 4.0):
        for t in (0.5, 2.0, 8.0):
            d = phase_distribution(gamma, t)
            for m in (2, 4):
                worst = max(worst, abs(
                    d.characteristic_value(m) - dephasing_coefficient(gamma, m, t)
                ))
    quad_ok = worst < 1e-6

    gamma, t, n = 1.0, 5.0, 30_000
    rng = np.random.default_rng(SEED)
    phases = np.empty(n)
    for i in range(n):
        phases[i] = phases_at(sample_trajectory(gamma, t, rng), np.array([t]))[0]
    continuous = phases[np.abs(phases) < t]
    d = phase_distribution(gamma, t)
    xs = np.linspace(-t, t, 4001)
    dens = d.density(xs)
    cdf_vals = np.concatenate(
        [[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2 * np.diff(xs))]
    )
    cdf_vals /= cdf_vals[-1]
    pvalue = kstest(continuous, lambda x: np.interp(x, xs, cdf_vals)).pvalue
    ok = quad_ok and pvalue > 0.01
    assert report(
        8, "phase law: characteristic function + trajectory histogram", ok,
        f"max quadrature deviation={worst:.1e}, KS p={pvalue:.3f}",
    )


def test_criterion_9_end_to_end_mc_validation():
    start = time.perf_counter()
    grid = np.linspace(0.0, 20.0, 50)
    worst = {"negativity": 0.0, "discord": 0.0}
    details = []
    all_ok = True
    for alpha in (1.0, 2.0):
        for scenario, topology in ALL_COMBOS:
            cfg = ScenarioConfig(
                scenario=scenario,
                topology=topology,
                dist=RateDistribution(alpha=alpha, **WIDE),
                time_grid=grid,
                n_fluctuators=20,
                seed=SEED,
            )
            series = evolve_series(cfg)
            mc = estimate_correlations(
                McConfig(scenario=cfg, n_trajectories=100_000), threads=2
            )
            z = series_z_scores(series, mc)
            z_n = float(np.max(z["negativity"]))
            z_q = float(np.max(z["discord"]))
            worst["negativity"] = max(worst["negativity"], z_n)
            worst["discord"] = max(worst["discord"], z_q)
            ok = z_n <= 3.0 and z_q <= 3.0
            all_ok &= ok
            details.append(
                f"{scenario.value}/{topology.value}/a={alpha}: zN={z_n:.2f} zQ={z_q:.2f}"
            )
    elapsed = time.perf_counter() - start
    all_ok &= elapsed < 600.0
    assert report(
        9, "analytic vs Monte Carlo, all scenarios", all_ok,
        f"max zN={worst['negativity']:.2f}, max zQ={worst['discord']:.2f}, "
        f"{elapsed:.0f}s; " + "; ".join(details),
    )
