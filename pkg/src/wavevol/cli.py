"""Command-line front end.

Subcommands:

* ``simulate``  - write simulated paths (CSV per path) plus ground truth;
* ``estimate``  - run the estimator battery on tick data or simulated
  paths, emitting estimates, jump reports, and standardized returns;
* ``study``     - run the bias or forecast Monte-Carlo study;
* ``decompose`` - split per-scale estimates into labelled horizons.

Report paths write CSV and aligned text alongside SVG figures.  Every
output directory receives a ``manifest.json`` recording the resolved
configuration, seeds, and toolkit version; rerunning the same command
reproduces all data files byte for byte.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .data_io import SessionCalendar, TickFormat, build_grids, load_ticks, read_config
from .errors import ConfigError, DataError
from .estimators import decompose_horizons, default_horizon_labels, VarianceEstimate
from .jumps import detect_jumps, DegenerateScaleError
from .simulate import SimConfig, fsv_config, heston_config, simulate_path
from .study import (
    DEFAULT_ESTIMATORS,
    SESSION_SECONDS,
    estimate_day,
    run_bias_study,
    run_forecast_study,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

_SIM_KEYS = {
    "model", "mu", "alpha", "kappa", "gamma", "rho", "hurst", "sigma_jump",
    "jump_intensity", "jump_count", "noise_sd", "n_steps", "horizon_days", "seed",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="wavevol", description=__doc__)
    parser.add_argument("--version", action="version", version=f"wavevol {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate intraday paths")
    sim.add_argument("--config", help="key = value config file")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--paths", type=int, default=1)
    sim.add_argument("--out", required=True)

    est = sub.add_parser("estimate", help="estimate integrated variance per day")
    src = est.add_mutually_exclusive_group(required=True)
    src.add_argument("--ticks", help="tick CSV (timestamp,price)")
    src.add_argument("--sim", help="directory produced by `wavevol simulate`")
    est.add_argument("--config", help="tick format / calendar config")
    est.add_argument("--estimators", default="RV,BV,TSRV,RK,JWTSRV")
    est.add_argument("--interval", type=float, default=300.0,
                     help="sparse grid and slow scale, seconds")
    est.add_argument("--fast-interval", type=float, default=60.0,
                     help="fast grid for tick data, seconds")
    est.add_argument("--levels", type=int, default=4)
    est.add_argument("--out", required=True)

    stu = sub.add_parser("study", help="run a Monte-Carlo study")
    stu.add_argument("kind", choices=["bias", "forecast"])
    stu.add_argument("--config", help="model and study config")
    stu.add_argument("--paths", type=int)
    stu.add_argument("--seed", type=int)
    stu.add_argument("--estimators")
    stu.add_argument("--levels", type=int, default=4)
    stu.add_argument("--out", required=True)

    dec = sub.add_parser("decompose", help="split estimates into horizons")
    dec.add_argument("--estimates", required=True, help="estimates CSV")
    dec.add_argument("--estimator", default="JWTSRV")
    dec.add_argument("--horizons", help="comma-separated horizon labels")
    dec.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        started = time.time()
        command = {
            "simulate": _cmd_simulate,
            "estimate": _cmd_estimate,
            "study": _cmd_study,
            "decompose": _cmd_decompose,
        }[args.command]
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        resolved, outputs = command(args, out_dir)
        _write_manifest(out_dir, args, resolved, outputs, time.time() - started)
        return EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


def _write_manifest(out_dir: Path, args, resolved: dict, outputs: list[str], dur: float):
    manifest = {
        "command": args.command,
        "version": __version__,
        "config": resolved,
        "outputs": sorted(outputs),
        "duration_seconds": round(dur, 3),
    }
    with open(out_dir / "manifest.json", "w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _load_config(path: str | None) -> dict:
    return read_config(path) if path else {}


def _sim_config(cfg: dict, seed: int | None) -> SimConfig:
    unknown = set(cfg) - _SIM_KEYS
    if unknown:
        raise ConfigError(f"unknown simulation config keys: {sorted(unknown)}")
    model = cfg.pop("model", "heston_jd")
    if seed is not None:
        cfg["seed"] = seed
    if model == "heston_jd":
        return heston_config(**cfg)
    if model == "fractional_sv":
        return fsv_config(**cfg)
    raise ConfigError(f"unknown model {model!r}")


def _cmd_simulate(args, out_dir: Path):
    raw = _load_config(args.config)
    study_keys = {k: raw.pop(k) for k in list(raw) if k not in _SIM_KEYS}
    if study_keys:
        raise ConfigError(f"config keys not understood by simulate: {sorted(study_keys)}")
    cfg = _sim_config(raw, args.seed)
    outputs = []
    for p in range(args.paths):
        path = simulate_path(cfg, path_index=p)
        name = f"path{p:03d}.csv"
        _write_path_csv(out_dir / name, path)
        meta = {
            "config": asdict(cfg),
            "path_index": p,
            "true_iv": [float(v) for v in path.true_iv],
            "jumps": [[int(i), float(s)] for i, s in path.jumps],
        }
        meta_name = f"path{p:03d}.json"
        with open(out_dir / meta_name, "w") as handle:
            json.dump(meta, handle, indent=2, sort_keys=True)
            handle.write("\n")
        outputs += [name, meta_name]
    return {"simulate": asdict(cfg), "paths": args.paths}, outputs


def _write_path_csv(path: Path, sim) -> None:
    from .report import fmt, write_csv

    rows = [
        [i, fmt(p), fmt(y), fmt(v)]
        for i, (p, y, v) in enumerate(zip(sim.prices, sim.observed, sim.variance))
    ]
    write_csv(path, ["step", "latent", "observed", "variance"], rows)


def _parse_estimators(raw: str) -> list[str]:
    names = [n.strip() for n in raw.split(",") if n.strip()]
    bad = [n for n in names if n not in DEFAULT_ESTIMATORS + ("WRV",)]
    if bad:
        raise ConfigError(
            f"unknown estimator(s) {bad}; valid: {', '.join(DEFAULT_ESTIMATORS + ('WRV',))}"
        )
    if not names:
        raise ConfigError("estimator list is empty")
    return names


def _estimate_inputs(args) -> list[tuple[str, np.ndarray, float]]:
    """Yield (day id, fast-grid log prices, tick interval seconds) per day."""
    if args.ticks:
        cfg = _load_config(args.config)
        fmt_ = TickFormat(
            timestamp_kind=cfg.get("timestamp_kind", "iso8601"),
            timezone=cfg.get("timezone", "America/Chicago"),
        )
        holidays = cfg.get("holidays", [])
        if isinstance(holidays, str):
            holidays = [holidays]
        from datetime import date

        calendar = SessionCalendar(
            tz=fmt_.timezone,
            open_hour=int(cfg.get("open_hour", 17)),
            close_hour=int(cfg.get("close_hour", 16)),
            holidays=frozenset(date.fromisoformat(h) for h in holidays),
        )
        ticks = load_ticks(args.ticks, fmt_)
        grids = build_grids(
            ticks, calendar, interval=args.fast_interval,
            min_ticks=int(cfg.get("min_ticks", 10)),
        )
        out = []
        for grid in grids:
            y = np.concatenate([[0.0], np.cumsum(grid.log_returns)])
            out.append((grid.day, y, args.fast_interval))
        return out
    sim_dir = Path(args.sim)
    metas = sorted(sim_dir.glob("path*.json"))
    if not metas:
        raise DataError(f"no simulated paths found in {sim_dir}")
    out = []
    for meta_path in metas:
        with open(meta_path) as handle:
            meta = json.load(handle)
        n = int(meta["config"]["n_steps"])
        days = int(meta["config"]["horizon_days"])
        tick = SESSION_SECONDS / n
        observed = np.loadtxt(
            meta_path.with_suffix(".csv"), delimiter=",", skiprows=1, usecols=2
        )
        stem = meta_path.stem
        for d in range(days):
            day_id = f"{stem}-d{d:03d}" if days > 1 else stem
            out.append((day_id, observed[d * n : (d + 1) * n + 1], tick))
    return out


def _cmd_estimate(args, out_dir: Path):
    from . import report

    names = _parse_estimators(args.estimators)
    levels = args.levels
    inputs = _estimate_inputs(args)
    estimates: list[tuple[str, VarianceEstimate]] = []
    jump_rows: list[tuple] = []
    std_rows: list[list] = []
    by_name: dict[str, list[float]] = {n: [] for n in names}
    days: list[str] = []
    for day, y, tick in inputs:
        returns = np.diff(y)
        days.append(day)
        if not returns.any():
            zeros = {
                n: VarianceEstimate(value=0.0, estimator=n,
                                    per_scale=np.zeros(levels + 1)
                                    if n in ("WRV", "JWTSRV", "JWTSRVopt") else None,
                                    jump_variation=0.0 if "JWTSRV" in n else None)
                for n in names
            }
            day_ests = zeros
        else:
            day_ests = estimate_day(
                y, names, slow_interval=args.interval, tick_interval=tick,
                levels=levels,
            )
            try:
                rep = detect_jumps(y)
                jump_rows += rep.to_rows(day)
            except DegenerateScaleError:
                pass
        for n in names:
            estimates.append((day, day_ests[n]))
            by_name[n].append(day_ests[n].value)
        daily_return = float(y[-1] - y[0])
        std_rows.append(
            [day, report.fmt(daily_return)]
            + [
                report.fmt(daily_return / np.sqrt(day_ests[n].value))
                if day_ests[n].value > 0 else ""
                for n in names
            ]
        )

    report.write_estimates_csv(out_dir / "estimates.csv", estimates, levels)
    report.write_csv(
        out_dir / "jumps.csv",
        ["day", "grid_index", "size", "squared_size"],
        jump_rows,
    )
    report.write_csv(
        out_dir / "standardized_returns.csv",
        ["day", "daily_return"] + [f"std_{n}" for n in names],
        std_rows,
    )
    moment_rows = _moment_rows(std_rows, names)
    report.write_csv(
        out_dir / "standardized_moments.csv",
        ["estimator", "mean", "std", "skewness", "kurtosis"],
        moment_rows,
    )
    fig = report.fig_estimates(by_name, days)
    report.save_figure(fig, out_dir / "estimates.svg")
    outputs = [
        "estimates.csv", "jumps.csv", "standardized_returns.csv",
        "standardized_moments.csv", "estimates.svg",
    ]
    resolved = {
        "estimators": names, "interval": args.interval,
        "fast_interval": args.fast_interval, "levels": levels,
        "source": args.ticks or args.sim,
    }
    return resolved, outputs


def _moment_rows(std_rows: list[list], names: list[str]) -> list[list]:
    from scipy import stats

    rows = []
    for idx, name in enumerate(names):
        values = np.array([float(r[2 + idx]) for r in std_rows if r[2 + idx] != ""])
        if values.size == 0:
            rows.append([name, "", "", "", ""])
            continue
        rows.append(
            [
                name,
                float(np.mean(values)),
                float(np.std(values, ddof=1)) if values.size > 1 else 0.0,
                float(stats.skew(values)) if values.size > 2 else 0.0,
                float(stats.kurtosis(values, fisher=False)) if values.size > 3 else 0.0,
            ]
        )
    return rows


def _cmd_study(args, out_dir: Path):
    from . import report

    cfg = _load_config(args.config)
    sim_keys = {k: cfg[k] for k in cfg if k in _SIM_KEYS}
    sim_cfg = _sim_config(dict(sim_keys), args.seed)
    cfg_estimators = cfg.get("estimators", ",".join(DEFAULT_ESTIMATORS))
    if isinstance(cfg_estimators, list):
        cfg_estimators = ",".join(str(e) for e in cfg_estimators)
    estimators = _parse_estimators(args.estimators or cfg_estimators)
    outputs: list[str] = []
    if args.kind == "bias":
        noise_grid = _as_tuple(cfg.get("noise_grid", [0.0, 0.0005, 0.001, 0.0015]))
        jump_grid = _as_tuple(cfg.get("jump_grid", [0, 1, 2, 3]))
        paths = args.paths or int(cfg.get("paths", 200))
        table = run_bias_study(
            sim_cfg, noise_grid, jump_grid, paths, estimators, levels=args.levels
        )
        header, rows = report.bias_table_rows(table)
        report.write_csv(out_dir / "bias_table.csv", header, rows)
        (out_dir / "bias_table.txt").write_text(report.bias_table_text(table))
        report.save_figure(report.fig_bias_table(table), out_dir / "bias_table.svg")
        outputs += ["bias_table.csv", "bias_table.txt", "bias_table.svg"]
        resolved = {
            "study": "bias", "model": asdict(sim_cfg), "paths": paths,
            "noise_grid": list(noise_grid), "jump_grid": list(jump_grid),
            "estimators": estimators,
        }
    else:
        paths = args.paths or int(cfg.get("paths", 500))
        days = int(cfg.get("days", 101))
        from dataclasses import replace

        sim_cfg = replace(
            sim_cfg,
            noise_sd=float(cfg.get("noise_sd", 0.0005)),
            jump_intensity=float(cfg.get("jump_intensity", 1.0)),
        )
        rep = run_forecast_study(
            sim_cfg, paths=paths, days=days, estimators=estimators, levels=args.levels
        )
        header, rows = report.mz_report_rows(rep)
        report.write_csv(out_dir / "forecast_eval.csv", header, rows)
        (out_dir / "forecast_eval.txt").write_text(report.mz_report_text(rep))
        report.save_figure(report.fig_forecasts(rep), out_dir / "forecast_eval.svg")
        outputs += ["forecast_eval.csv", "forecast_eval.txt", "forecast_eval.svg"]
        resolved = {
            "study": "forecast", "model": asdict(sim_cfg), "paths": paths,
            "days": days, "estimators": estimators,
        }
    return resolved, outputs


def _as_tuple(raw) -> tuple:
    if isinstance(raw, (list, tuple)):
        return tuple(raw)
    return (raw,)


def _cmd_decompose(args, out_dir: Path):
    from . import report

    rows = report.read_estimates_csv(args.estimates)
    target = [r for r in rows if r["estimator"] == args.estimator]
    if not target:
        raise DataError(f"no {args.estimator!r} rows in {args.estimates}")
    scale_keys = [k for k in target[0] if k.startswith("scale_")] + ["smooth"]
    if any(r[k] is None for r in target for k in scale_keys):
        raise DataError(
            f"estimator {args.estimator!r} rows carry no per-scale columns"
        )
    levels = len(scale_keys) - 1
    labels = (
        [h.strip() for h in args.horizons.split(",")]
        if args.horizons
        else default_horizon_labels(levels)
    )
    if len(labels) != levels + 1:
        raise ConfigError(
            f"{len(labels)} horizon labels for {levels + 1} components"
        )
    out_rows = []
    days = []
    components = {label: [] for label in labels}
    jumps = []
    for row in target:
        per_scale = np.array([row[k] for k in scale_keys])
        est = VarianceEstimate(
            value=float(per_scale.sum()), estimator=args.estimator, per_scale=per_scale
        )
        parts = decompose_horizons(est, labels)
        total = est.value
        vol_total = np.sqrt(max(total, 0.0) * report.ANNUALIZATION_DAYS)
        days.append(row["day"])
        jumps.append(row["jump_variation"] or 0.0)
        for label, value in parts:
            share = value / total if total else 0.0
            components[label].append(value)
            out_rows.append(
                [row["day"], args.estimator, label, report.fmt(value),
                 report.fmt(share * vol_total), report.fmt(share)]
            )
    report.write_csv(
        out_dir / "horizons.csv",
        ["day", "estimator", "horizon", "variance", "annualized_vol", "share"],
        out_rows,
    )
    fig = report.fig_decomposition(days, components, jumps)
    report.save_figure(fig, out_dir / "horizons.svg")
    resolved = {
        "estimates": args.estimates, "estimator": args.estimator, "horizons": labels,
    }
    return resolved, ["horizons.csv", "horizons.svg"]


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
