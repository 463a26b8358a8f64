"""Command-line front end.

Subcommands
-----------
``run``       evolve one scenario, optionally alongside the Monte Carlo
              estimator, and write a CSV time series plus a JSON manifest.
``validate``  run the analytic and Monte Carlo pipelines on the same grid and
              emit a pass/fail JSON report with per-time z-scores.
``psd``       write the synthesized spectrum, the explicit Lorentzian sum and
              a Welch periodogram of sampled noise, plus fitted slopes.

Configuration is a flat ``key = value`` text file (``#`` starts a comment);
command-line flags override file values.  Schema and defaults::

    scenario      single | collection | collection-random   (single)
    topology      separate | common                         (separate)
    alpha         float in [1, 2]                           (1.0)
    gamma_min     positive float                            (1e-4)
    gamma_max     positive float > gamma_min                (1e4)
    nf            int >= 1, fluctuators per environment     (20)
    fixed_rates   comma-separated floats (collection only)  (sampled)
    t_max         grid end, units of 1/nu                   (20.0)
    n_times       grid points                               (2000; 50 for validate)
    mc            true | false, add MC columns to run       (false)
    trajectories  int >= 1000                               (100000)
    seed          int, master seed for all randomness       (1234)
    threads       int >= 1 (1 = deterministic single-thread,(1)
                  results are identical for any value)
    out           output path prefix                        (qflicker_<command>)
    psd_fs        periodogram sampling rate                 (2000.0)
    psd_samples   periodogram length in samples             (1048576)
    psd_nperseg   Welch segment length                      (16384)

All randomness derives from ``seed``.  Exit codes: 0 success, 2 schema
violation, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np
from scipy.signal import welch

from . import __version__
from .correlations import h_function
from .dynamics import (
    QuadratureError,
    Scenario,
    ScenarioConfig,
    Topology,
    evolve_series,
    sample_fixed_rates,
)
from .mc_engine import (
    McConfig,
    estimate_coefficient,
    estimate_correlations,
    series_z_scores,
)
from .noise_spectra import (
    RateDistribution,
    SpectrumQuadratureError,
    collection_spectrum,
    fit_loglog_slope,
    slope_fit_band,
    synthesized_spectrum,
)
from .rtn import sample_trajectory

__all__ = ["main", "ConfigError"]


class ConfigError(ValueError):
    """Schema violation; carries an optional file/line anchor."""


_SCENARIOS = {s.value: s for s in Scenario}
_TOPOLOGIES = {t.value: t for t in Topology}

_DEFAULTS = {
    "scenario": "single",
    "topology": "separate",
    "alpha": 1.0,
    "gamma_min": 1e-4,
    "gamma_max": 1e4,
    "nf": 20,
    "fixed_rates": None,
    "t_max": 20.0,
    "n_times": None,  # 2000 for run/psd, 50 for validate
    "mc": False,
    "trajectories": 100_000,
    "seed": 1234,
    "threads": 1,
    "out": None,
    "psd_fs": 2000.0,
    "psd_samples": 2**20,
    "psd_nperseg": 2**14,
}

_BOOL_WORDS = {"true": True, "false": False, "yes": True, "no": False,
               "1": True, "0": False}


def _parse_value(key: str, raw: str, anchor: str):
    try:
        if key in ("alpha", "gamma_min", "gamma_max", "t_max", "psd_fs"):
            return float(raw)
        if key in ("nf", "n_times", "trajectories", "seed", "threads",
                   "psd_samples", "psd_nperseg"):
            return int(raw)
        if key == "mc":
            word = raw.strip().lower()
            if word not in _BOOL_WORDS:
                raise ValueError
            return _BOOL_WORDS[word]
        if key == "fixed_rates":
            return [float(tok) for tok in raw.replace(",", " ").split()]
        if key in ("scenario", "topology", "out"):
            return raw.strip()
    except ValueError:
        raise ConfigError(f"{anchor}: cannot parse value {raw!r} for key '{key}'")
    raise ConfigError(f"{anchor}: unknown key '{key}'")


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}")
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {text!r}")
        key, raw = (part.strip() for part in text.split("=", 1))
        if key not in _DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
        values[key] = _parse_value(key, raw, f"{path}:{lineno}")
    return values


def _validate_settings(cfg: dict) -> dict:
    if cfg["scenario"] not in _SCENARIOS:
        raise ConfigError(
            f"scenario must be one of {sorted(_SCENARIOS)}, got '{cfg['scenario']}'"
        )
    if cfg["topology"] not in _TOPOLOGIES:
        raise ConfigError(
            f"topology must be one of {sorted(_TOPOLOGIES)}, got '{cfg['topology']}'"
        )
    if not 1.0 <= cfg["alpha"] <= 2.0:
        raise ConfigError(f"alpha must be in [1, 2], got {cfg['alpha']}")
    if not 0.0 < cfg["gamma_min"] < cfg["gamma_max"]:
        raise ConfigError(
            f"need 0 < gamma_min < gamma_max, got [{cfg['gamma_min']}, {cfg['gamma_max']}]"
        )
    if cfg["nf"] < 1:
        raise ConfigError(f"nf must be >= 1, got {cfg['nf']}")
    if cfg["n_times"] is not None and cfg["n_times"] < 2:
        raise ConfigError(f"n_times must be >= 2, got {cfg['n_times']}")
    if cfg["t_max"] <= 0:
        raise ConfigError(f"t_max must be positive, got {cfg['t_max']}")
    if cfg["trajectories"] < 1000:
        raise ConfigError(f"trajectories must be >= 1000, got {cfg['trajectories']}")
    if cfg["threads"] < 1:
        raise ConfigError(f"threads must be >= 1, got {cfg['threads']}")
    if cfg["fixed_rates"] is not None and cfg["scenario"] != "collection":
        raise ConfigError("fixed_rates only applies to scenario 'collection'")
    return cfg


def _resolve(args: argparse.Namespace, default_n_times: int) -> dict:
    cfg = dict(_DEFAULTS)
    if args.config:
        cfg.update(_read_config_file(args.config))
    for key in _DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    if cfg["n_times"] is None:
        cfg["n_times"] = default_n_times
    return _validate_settings(cfg)


def _scenario_config(cfg: dict) -> ScenarioConfig:
    dist = RateDistribution(alpha=cfg["alpha"], gamma_min=cfg["gamma_min"],
                            gamma_max=cfg["gamma_max"])
    fixed = None
    if cfg["fixed_rates"] is not None:
        fixed = np.asarray(cfg["fixed_rates"], dtype=float)
    try:
        return ScenarioConfig(
            scenario=_SCENARIOS[cfg["scenario"]],
            topology=_TOPOLOGIES[cfg["topology"]],
            dist=dist,
            time_grid=np.linspace(0.0, cfg["t_max"], cfg["n_times"]),
            n_fluctuators=cfg["nf"] if cfg["scenario"] != "single" else 1,
            fixed_rates=fixed,
            seed=cfg["seed"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: str, header: list[str], columns: list[np.ndarray]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _manifest(cfg: dict, command: str, outputs: list[str], wall: float,
              rates=None, extra: dict | None = None) -> dict:
    doc = {
        "command": command,
        "version": __version__,
        "seed": cfg["seed"],
        "config": {k: v for k, v in cfg.items() if k != "out"},
        "sampled_fixed_rates": None if rates is None else [float(g) for g in rates],
        "wall_clock_s": wall,
        "outputs": outputs,
    }
    if extra:
        doc.update(extra)
    return doc


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_run(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    cfg = _resolve(args, default_n_times=2000)
    out = cfg["out"] or "qflicker_run"
    sc = _scenario_config(cfg)
    series = evolve_series(sc)
    header = ["t", "coeff", "negativity", "discord"]
    columns = [series.times, series.coefficients, series.negativity, series.discord]
    if cfg["mc"]:
        estimates = estimate_coefficient(
            McConfig(scenario=sc, n_trajectories=cfg["trajectories"]),
            threads=cfg["threads"],
        )
        header += ["mc_coeff", "mc_stderr"]
        columns += [
            np.array([e.coeff_mean for e in estimates]),
            np.array([e.coeff_stderr for e in estimates]),
        ]
    csv_path = f"{out}.csv"
    manifest_path = f"{out}_manifest.json"
    _write_csv(csv_path, header, columns)
    _write_json(
        manifest_path,
        _manifest(cfg, "run", [csv_path, manifest_path],
                  time.perf_counter() - t0, rates=series.rates),
    )
    print(f"wrote {csv_path} and {manifest_path}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    cfg = _resolve(args, default_n_times=50)
    out = cfg["out"] or "qflicker_validate"
    sc = _scenario_config(cfg)
    series = evolve_series(sc)
    # optional negative control: evaluate the analytic side with the wrong
    # phase multiplier by flipping the topology label
    if getattr(args, "distort_m", False):
        flipped = Topology.COMMON if sc.topology is Topology.SEPARATE else Topology.SEPARATE
        distorted = ScenarioConfig(
            scenario=sc.scenario, topology=flipped, dist=sc.dist,
            time_grid=sc.time_grid, n_fluctuators=sc.n_fluctuators,
            fixed_rates=sc.fixed_rates, seed=sc.seed,
        )
        series = evolve_series(distorted)

    mc = estimate_correlations(
        McConfig(scenario=sc, n_trajectories=cfg["trajectories"]),
        threads=cfg["threads"],
    )
    z = series_z_scores(series, mc)
    identity_err = float(np.max(np.abs(series.discord - h_function(series.negativity))))
    n_bad = int(sum(int(np.sum(arr > 3.0)) for arr in z.values()))
    report = {
        "identity_max_abs_error": identity_err,
        "identity_pass": bool(identity_err <= 1e-10),
        "max_z": {k: float(np.max(v)) for k, v in z.items()},
        "points_exceeding_3sigma": n_bad,
        "mc_pass": bool(n_bad == 0),
        "pass": bool(identity_err <= 1e-10 and n_bad == 0),
        "per_time": [
            {
                "t": float(t),
                "z_coefficient": float(zc),
                "z_negativity": float(zn),
                "z_discord": float(zq),
            }
            for t, zc, zn, zq in zip(
                series.times, z["coefficient"], z["negativity"], z["discord"]
            )
        ],
        "manifest": _manifest(cfg, "validate", [], time.perf_counter() - t0,
                              rates=series.rates),
    }
    report_path = f"{out}_report.json"
    report["manifest"]["outputs"] = [report_path]
    _write_json(report_path, report)
    print(f"validation {'PASSED' if report['pass'] else 'FAILED'}; wrote {report_path}")
    return 0


def _periodogram_of_collection(rates: np.ndarray, fs: float, n_samples: int,
                               nperseg: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Welch spectrum of the summed telegraph signal sampled at rate fs."""
    gen = np.random.Generator(
        np.random.Philox(key=np.array([seed, 2**34], dtype=np.uint64))
    )
    horizon = n_samples / fs
    grid = (np.arange(n_samples) + 0.5) / fs
    signal = np.zeros(n_samples)
    for g in rates:
        traj = sample_trajectory(float(g), horizon, gen)
        signal += traj.values_at(grid)
    freqs, power = welch(signal, fs=fs, nperseg=nperseg, detrend=False)
    keep = freqs > 0
    return freqs[keep], power[keep]


def _cmd_psd(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    cfg = _resolve(args, default_n_times=2000)
    out = cfg["out"] or "qflicker_psd"
    dist = RateDistribution(alpha=cfg["alpha"], gamma_min=cfg["gamma_min"],
                            gamma_max=cfg["gamma_max"])
    nf = cfg["nf"]
    if cfg["fixed_rates"] is not None:
        rates = np.asarray(cfg["fixed_rates"], dtype=float)
        nf = rates.size
    else:
        rates = sample_fixed_rates(dist, nf, cfg["seed"])

    band = slope_fit_band(dist)
    freqs, power = _periodogram_of_collection(
        rates, cfg["psd_fs"], cfg["psd_samples"], cfg["psd_nperseg"], cfg["seed"]
    )
    # keep the band portion the periodogram can resolve without heavy
    # aliasing; a narrow rate window has no scaling band, so fall back to the
    # periodogram's native range
    lo = band[0] if band[0] < band[1] else freqs[0]
    hi = min(max(band[1], lo * 1.001), cfg["psd_fs"] / 8.0)
    keep = (freqs >= lo) & (freqs <= hi)
    freqs, power = freqs[keep], power[keep] / nf
    s_analytic = synthesized_spectrum(dist, freqs)
    s_collection = collection_spectrum(rates, freqs) / nf

    slopes = {"band": [band[0], band[1]], "slope_synthesized": None,
              "slope_collection": None,
              "slope_periodogram": fit_loglog_slope(freqs, power) if freqs.size >= 8 else None}
    if band[0] < band[1]:
        fit_grid = np.logspace(np.log10(band[0]), np.log10(band[1]), 200)
        slopes["slope_synthesized"] = fit_loglog_slope(
            fit_grid, synthesized_spectrum(dist, fit_grid)
        )
        slopes["slope_collection"] = fit_loglog_slope(
            fit_grid, collection_spectrum(rates, fit_grid) / nf
        )
    csv_path = f"{out}.csv"
    manifest_path = f"{out}_manifest.json"
    _write_csv(csv_path, ["f", "s_analytic", "s_collection", "s_periodogram"],
               [freqs, s_analytic, s_collection, power])
    _write_json(
        manifest_path,
        _manifest(cfg, "psd", [csv_path, manifest_path],
                  time.perf_counter() - t0, rates=rates, extra={"slope_fit": slopes}),
    )
    print(f"wrote {csv_path} and {manifest_path}")
    return 0


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--scenario", choices=sorted(_SCENARIOS))
    parser.add_argument("--topology", choices=sorted(_TOPOLOGIES))
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--gamma-min", dest="gamma_min", type=float)
    parser.add_argument("--gamma-max", dest="gamma_max", type=float)
    parser.add_argument("--nf", type=int)
    parser.add_argument("--t-max", dest="t_max", type=float)
    parser.add_argument("--n-times", dest="n_times", type=int)
    parser.add_argument("--trajectories", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--out")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="qflicker",
        description="Two-qubit negativity/discord dynamics under telegraph "
                    "and 1/f^alpha classical noise",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evolve one scenario and write CSV + manifest")
    _add_common_flags(p_run)
    p_run.add_argument("--mc", action="store_const", const=True, default=None,
                       help="add Monte Carlo coefficient columns")

    p_val = sub.add_parser("validate", help="analytic vs Monte Carlo cross-check report")
    _add_common_flags(p_val)
    p_val.add_argument("--distort-m", dest="distort_m", action="store_true",
                       help="negative control: analytic side evaluated with the "
                            "wrong phase multiplier; the report must flag it")

    p_psd = sub.add_parser("psd", help="spectrum synthesis and periodogram CSV")
    _add_common_flags(p_psd)
    p_psd.add_argument("--psd-fs", dest="psd_fs", type=float)
    p_psd.add_argument("--psd-samples", dest="psd_samples", type=int)
    p_psd.add_argument("--psd-nperseg", dest="psd_nperseg", type=int)

    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "validate": _cmd_validate, "psd": _cmd_psd}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, SpectrumQuadratureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
