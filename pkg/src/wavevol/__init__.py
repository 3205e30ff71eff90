"""Wavelet-based realized volatility toolkit.

MODWT decomposition of integrated variance, noise- and jump-robust
estimators (RV, BV, TSRV, RK, WRV, JWTSRV), stochastic-volatility
simulators with known ground truth, Monte-Carlo study harnesses, and a
tick-data pipeline for empirical horizon decomposition.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, WavevolError
from .filters import D4, HAAR, ModwtFilter, WaveletSpec, base_filter, level_filter, squared_gain
from .modwt import ModwtDecomposition, energy_by_scale, transform, wavelet_variance
from .jumps import JumpReport, detect_jumps, jump_adjust
from .estimators import (
    ReturnGrid,
    VarianceEstimate,
    bv,
    decompose_horizons,
    grid_from_prices,
    jwtsrv,
    optimal_grid_count,
    rk,
    rv,
    tsrv,
    wrv,
)
from .simulate import (
    SimConfig,
    SimPath,
    add_noise,
    fgn,
    fsv_config,
    heston_config,
    simulate_fsv,
    simulate_heston_jd,
)
from .study import (
    BiasTable,
    ForecastEvalReport,
    ar1_forecast,
    mincer_zarnowitz,
    run_bias_study,
    run_forecast_study,
)

__all__ = [
    "__version__",
    "WavevolError", "ConfigError", "DataError",
    "WaveletSpec", "ModwtFilter", "HAAR", "D4",
    "base_filter", "level_filter", "squared_gain",
    "ModwtDecomposition", "transform", "energy_by_scale", "wavelet_variance",
    "JumpReport", "detect_jumps", "jump_adjust",
    "ReturnGrid", "VarianceEstimate", "grid_from_prices",
    "rv", "bv", "tsrv", "rk", "wrv", "jwtsrv",
    "optimal_grid_count", "decompose_horizons",
    "SimConfig", "SimPath", "heston_config", "fsv_config",
    "simulate_heston_jd", "simulate_fsv", "add_noise", "fgn",
    "BiasTable", "ForecastEvalReport",
    "run_bias_study", "run_forecast_study", "ar1_forecast", "mincer_zarnowitz",
]
