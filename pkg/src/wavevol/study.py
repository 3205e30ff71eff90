"""Monte-Carlo harnesses: estimator bias tables and forecast evaluation.

The bias study simulates a grid of (noise level, jump intensity) cells,
runs the estimator battery on every simulated day, and aggregates the mean
and variance of (estimate - true IV) per cell, reported in annualised
variance units times 1e4.

The forecast study simulates multi-day paths, estimates a daily IV series
per estimator, fits an AR(1) to each series, forecasts the held-out last
day, and evaluates the forecasts with Mincer-Zarnowitz regressions (true
IV on a constant plus forecasts), individually and jointly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .estimators import (
    VarianceEstimate,
    bv,
    grid_from_prices,
    jwtsrv,
    optimal_grid_count,
    rk,
    rv,
    tsrv,
    wrv,
)
from .simulate import DAYS_PER_YEAR, SimConfig, iter_day_batches

__all__ = [
    "BiasTable",
    "MzFit",
    "JointFit",
    "Ar1Fit",
    "ForecastEvalReport",
    "PathsBelowMinimumError",
    "TooFewObservationsError",
    "CollinearRegressorsError",
    "REPORT_UNIT",
    "DEFAULT_NOISE_GRID",
    "DEFAULT_JUMP_GRID",
    "estimate_day",
    "run_bias_study",
    "ar1_forecast",
    "mincer_zarnowitz",
    "run_forecast_study",
]

REPORT_UNIT = "annualized variance x 1e4"
_UNIT_SCALE = DAYS_PER_YEAR * 1e4
_VAR_SCALE = DAYS_PER_YEAR**2 * 1e4  # variance of an annualized error, x 1e4

DEFAULT_NOISE_GRID = (0.0, 0.0005, 0.001, 0.0015)
DEFAULT_JUMP_GRID = (0, 1, 2, 3)
DEFAULT_ESTIMATORS = ("RV", "BV", "TSRV", "TSRVopt", "RK", "JWTSRV", "JWTSRVopt")

MIN_BIAS_PATHS = 50
MIN_SERIES = 30
_COND_LIMIT = 1e10

# A simulated day covers a 6.5 hour session; n_steps steps set the tick spacing.
SESSION_SECONDS = 23400.0


class PathsBelowMinimumError(ConfigError):
    """Bias cells need enough paths for a stable mean."""


class TooFewObservationsError(DataError):
    """Regression sample too small."""


class CollinearRegressorsError(DataError):
    """Forecast columns are numerically collinear."""


@dataclass(frozen=True)
class BiasTable:
    """Per-cell mean bias and error variance of each estimator.

    Keys of ``bias``/``variance`` are (noise_sd, jump_intensity) pairs;
    values map estimator tags to numbers in ``unit``.
    """

    model: str
    paths: int
    noise_levels: tuple[float, ...]
    jump_counts: tuple[float, ...]
    estimators: tuple[str, ...]
    bias: dict = field(repr=False)
    variance: dict = field(repr=False)
    unit: str = REPORT_UNIT


def _estimator_battery(
    y: np.ndarray,
    names: Sequence[str],
    slow_interval: float,
    tick_interval: float,
    levels: int,
) -> dict[str, VarianceEstimate]:
    """Run the named estimators on one day of tick-level prices."""
    step = max(1, int(round(slow_interval / tick_interval)))
    out: dict[str, VarianceEstimate] = {}
    grid = None
    if {"RV", "BV", "RK", "WRV"} & set(names):
        grid = grid_from_prices(y, step, sampling_interval=slow_interval)
    g_opt = None
    if {"TSRVopt", "JWTSRVopt"} & set(names):
        g_opt = optimal_grid_count(y, slow_interval, tick_interval)
    for name in names:
        if name == "RV":
            out[name] = rv(grid)
        elif name == "BV":
            est = bv(grid, stagger=1)
            out[name] = est
        elif name == "RK":
            out[name] = rk(grid)
        elif name == "WRV":
            out[name] = wrv(grid, levels=levels)
        elif name == "TSRV":
            out[name] = tsrv(y, None, slow_interval, tick_interval)
        elif name == "TSRVopt":
            est = tsrv(y, g_opt, slow_interval, tick_interval)
            out[name] = VarianceEstimate(
                value=est.value, estimator="TSRVopt", grids=est.grids,
                small_sample_adjusted=est.small_sample_adjusted,
            )
        elif name == "JWTSRV":
            out[name] = jwtsrv(y, levels=levels, slow_interval=slow_interval,
                               tick_interval=tick_interval)
        elif name == "JWTSRVopt":
            est = jwtsrv(y, levels=levels, grids=g_opt, slow_interval=slow_interval,
                         tick_interval=tick_interval)
            out[name] = VarianceEstimate(
                value=est.value, estimator="JWTSRVopt", per_scale=est.per_scale,
                jump_variation=est.jump_variation, grids=est.grids,
                small_sample_adjusted=est.small_sample_adjusted,
            )
        else:
            raise ConfigError(
                f"unknown estimator {name!r}; valid tags: {', '.join(DEFAULT_ESTIMATORS)}"
            )
    return out


def estimate_day(
    y: np.ndarray,
    names: Sequence[str] = DEFAULT_ESTIMATORS,
    slow_interval: float = 300.0,
    tick_interval: float = 1.0,
    levels: int = 4,
) -> dict[str, VarianceEstimate]:
    """Public wrapper around the per-day estimator battery."""
    return _estimator_battery(y, names, slow_interval, tick_interval, levels)


def run_bias_study(
    cfg: SimConfig,
    noise_grid: Sequence[float] = DEFAULT_NOISE_GRID,
    jump_grid: Sequence[float] = DEFAULT_JUMP_GRID,
    paths: int = 200,
    estimators: Sequence[str] = DEFAULT_ESTIMATORS,
    slow_interval: float = 300.0,
    levels: int = 4,
) -> BiasTable:
    """Bias/variance table over the (noise, jumps) grid.

    Every cell simulates ``paths`` one-day paths of ``cfg``'s model with the
    cell's noise level and jump intensity, evaluates the estimators on each
    day, and aggregates (estimate - true IV) in annualised units x 1e4.
    """
    if paths < MIN_BIAS_PATHS:
        raise PathsBelowMinimumError(
            f"bias study needs at least {MIN_BIAS_PATHS} paths, got {paths}"
        )
    tick_interval = SESSION_SECONDS / cfg.n_steps
    bias: dict = {}
    variance: dict = {}
    for noise in noise_grid:
        for lam in jump_grid:
            cell_cfg = _cell_config(cfg, noise, lam)
            errors = {name: np.empty(paths) for name in estimators}
            for day in iter_day_batches(cell_cfg, paths):
                for p in range(paths):
                    ests = _estimator_battery(
                        day.observed[p], estimators, slow_interval, tick_interval,
                        levels,
                    )
                    for name, est in ests.items():
                        errors[name][p] = est.value - day.true_iv[p]
            key = (noise, lam)
            bias[key] = {
                n: float(np.mean(e)) * _UNIT_SCALE for n, e in errors.items()
            }
            variance[key] = {
                n: float(np.var(e)) * _VAR_SCALE for n, e in errors.items()
            }
    return BiasTable(
        model=cfg.model,
        paths=paths,
        noise_levels=tuple(noise_grid),
        jump_counts=tuple(jump_grid),
        estimators=tuple(estimators),
        bias=bias,
        variance=variance,
    )


def _cell_config(cfg: SimConfig, noise: float, lam: float) -> SimConfig:
    from dataclasses import replace

    return replace(cfg, noise_sd=noise, jump_intensity=float(lam), horizon_days=1)


class Ar1Fit(NamedTuple):
    """AR(1) forecast a + b * last with the fitted coefficients."""

    forecast: float
    intercept: float
    slope: float


def ar1_forecast(series: np.ndarray, m: int | None = None) -> Ar1Fit:
    """One-day-ahead AR(1) forecast from a daily IV series.

    Fits IV_{t+1} = a + b IV_t by OLS on the history up to index ``m``
    (default: the last entry) and returns a + b IV_m.  A constant series
    degenerates to b = 0, a = mean.  Under the square-root variance model
    the exact discretisation maps b to exp(-kappa D) and a to
    alpha (1 - exp(-kappa D)) D, which the tests use as an oracle.
    """
    series = np.asarray(series, dtype=float)
    if m is None:
        m = series.size - 1
    if not 0 <= m < series.size:
        raise ConfigError(f"index {m} outside series of length {series.size}")
    history = series[: m + 1]
    if history.size < MIN_SERIES:
        raise TooFewObservationsError(
            f"AR(1) fit needs >= {MIN_SERIES} observations, got {history.size}"
        )
    x = history[:-1]
    y = history[1:]
    dx = x - x.mean()
    den = float(dx @ dx)
    if den == 0.0:
        a, b = float(y.mean()), 0.0
    else:
        b = float(dx @ (y - y.mean())) / den
        a = float(y.mean() - b * x.mean())
    return Ar1Fit(forecast=a + b * float(series[m]), intercept=a, slope=b)


class MzFit(NamedTuple):
    """Individual Mincer-Zarnowitz regression: true = alpha + beta forecast."""

    alpha: float
    beta: float
    se_alpha: float
    se_beta: float
    r2: float
    n_obs: int


class JointFit(NamedTuple):
    """Joint regression: coefficient and standard error per column, plus R^2."""

    names: tuple[str, ...]
    coefficients: tuple[float, ...]
    standard_errors: tuple[float, ...]
    r2: float
    n_obs: int


@dataclass(frozen=True)
class ForecastEvalReport:
    """Mincer-Zarnowitz evaluation of one-day-ahead variance forecasts."""

    paths: int
    individual: dict[str, MzFit]
    joint: JointFit
    ar1_coefficients: dict[str, tuple[float, float]] = field(default_factory=dict)
    noise_sd: float | None = None
    jump_intensity: float | None = None


def _ols(y: np.ndarray, design: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """OLS with intercept-first design; classical standard errors."""
    n, k = design.shape
    if n <= k:
        raise TooFewObservationsError(f"{n} observations cannot fit {k} coefficients")
    cond = np.linalg.cond(design)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise CollinearRegressorsError(
            f"design condition number {cond:.2e} exceeds {_COND_LIMIT:.0e}"
        )
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    ssr = float(resid @ resid)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if sst == 0.0 else 1.0 - ssr / sst
    sigma2 = ssr / (n - k)
    cov = sigma2 * np.linalg.inv(design.T @ design)
    return beta, np.sqrt(np.diag(cov)), r2


def mincer_zarnowitz(
    true_iv: np.ndarray, forecasts: Mapping[str, np.ndarray]
) -> ForecastEvalReport:
    """Regress realised IV on a constant plus forecast column(s).

    Produces one individual regression per forecast column and one joint
    regression with all columns.  An unbiased forecast has alpha = 0,
    beta = 1 and R^2 near one.
    """
    true_iv = np.asarray(true_iv, dtype=float)
    n = true_iv.size
    if n < MIN_SERIES:
        raise TooFewObservationsError(
            f"Mincer-Zarnowitz needs >= {MIN_SERIES} observations, got {n}"
        )
    columns = {k: np.asarray(v, dtype=float) for k, v in forecasts.items()}
    for k, v in columns.items():
        if v.shape != (n,):
            raise ConfigError(f"forecast column {k!r} has shape {v.shape}, want ({n},)")
    ones = np.ones(n)
    individual = {}
    for name, col in columns.items():
        beta, se, r2 = _ols(true_iv, np.column_stack([ones, col]))
        individual[name] = MzFit(
            alpha=float(beta[0]), beta=float(beta[1]),
            se_alpha=float(se[0]), se_beta=float(se[1]), r2=r2, n_obs=n,
        )
    names = tuple(columns)
    design = np.column_stack([ones, *[columns[k] for k in names]])
    beta, se, r2 = _ols(true_iv, design)
    joint = JointFit(
        names=("const",) + names,
        coefficients=tuple(float(b) for b in beta),
        standard_errors=tuple(float(s) for s in se),
        r2=r2,
        n_obs=n,
    )
    return ForecastEvalReport(paths=n, individual=individual, joint=joint)


def run_forecast_study(
    cfg: SimConfig,
    paths: int = 500,
    days: int = 101,
    estimators: Sequence[str] = ("RV", "BV", "TSRV", "RK", "JWTSRV"),
    slow_interval: float = 300.0,
    levels: int = 4,
) -> ForecastEvalReport:
    """One-day-ahead forecast evaluation over simulated multi-day paths.

    Each path contributes one out-of-sample observation: the first
    ``days - 1`` days feed the estimators and the AR(1) fits, the last
    day's true IV is the regression target.
    """
    if days < MIN_SERIES + 1:
        raise TooFewObservationsError(
            f"forecast study needs >= {MIN_SERIES + 1} days, got {days}"
        )
    if paths < MIN_SERIES:
        raise PathsBelowMinimumError(
            f"forecast regressions need >= {MIN_SERIES} paths, got {paths}"
        )
    from dataclasses import replace

    run_cfg = replace(cfg, horizon_days=days)
    tick_interval = SESSION_SECONDS / run_cfg.n_steps
    series = {name: np.empty((paths, days)) for name in estimators}
    true_iv = np.empty((paths, days))
    for day in iter_day_batches(run_cfg, paths):
        true_iv[:, day.day] = day.true_iv
        for p in range(paths):
            ests = _estimator_battery(
                day.observed[p], estimators, slow_interval, tick_interval, levels
            )
            for name, est in ests.items():
                series[name][p, day.day] = est.value

    forecasts = {}
    ar1_coeffs = {}
    for name in estimators:
        fits = [ar1_forecast(series[name][p, :-1]) for p in range(paths)]
        forecasts[name] = np.array([f.forecast for f in fits])
        ar1_coeffs[name] = (
            float(np.mean([f.intercept for f in fits])),
            float(np.mean([f.slope for f in fits])),
        )
    report = mincer_zarnowitz(true_iv[:, -1], forecasts)
    return ForecastEvalReport(
        paths=paths,
        individual=report.individual,
        joint=report.joint,
        ar1_coefficients=ar1_coeffs,
        noise_sd=run_cfg.noise_sd,
        jump_intensity=run_cfg.jump_intensity,
    )
