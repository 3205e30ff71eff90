"""Integrated-variance estimators: RV, BV, TSRV, RK, WRV and JWTSRV.

RV, BV, RK and WRV operate on a uniform return grid; TSRV and JWTSRV
consume the full tick-level log-price path and combine a slow-scale
subgrid average with a fast-scale correction.  JWTSRV additionally removes
detected jumps first and carries a per-scale wavelet energy decomposition,
so each estimate can be split into investment-horizon components.

Subgrid convention (two-scale estimators): the price path is partitioned
into G subgrids, subgrid g taking every G-th observation starting at offset
g.  G therefore equals both the number of offsets and the slow-scale
spacing in ticks; the default G is the slow interval divided by the tick
interval, and the optimal-G rule minimises the estimator's asymptotic
variance.  With n fast returns, nbar = (n - G + 1) / G is the average
number of returns per subgrid, and the two-scale estimate is

    RV_avg - (nbar / n) RV_all,

optionally rescaled by (1 - nbar/n)^(-1) in small samples.

All values are per-day integrated variance in squared log-return units;
annualisation (x 252) happens only at reporting time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError
from .filters import WaveletSpec, D4, filter_width
from .jumps import detect_jumps, jump_adjust
from .modwt import scale_energies, transform, energy_by_scale

__all__ = [
    "ReturnGrid",
    "VarianceEstimate",
    "TooFewTicksError",
    "BandwidthTooLargeError",
    "MissingPerScaleError",
    "ESTIMATOR_TAGS",
    "grid_from_prices",
    "rv",
    "bv",
    "tsrv",
    "optimal_grid_count",
    "rk",
    "wrv",
    "jwtsrv",
    "default_horizon_labels",
    "decompose_horizons",
]

ESTIMATOR_TAGS = ("RV", "BV", "TSRV", "TSRVopt", "RK", "WRV", "JWTSRV", "JWTSRVopt")

_MU1_SQ = 2.0 / np.pi  # mu_1^2 for the bipower scaling
_PARZEN_CSTAR = 3.5134  # optimal-bandwidth constant for the Parzen kernel


class TooFewTicksError(DataError):
    """Not enough observations for the requested grid structure."""


class BandwidthTooLargeError(ConfigError):
    """Kernel bandwidth exceeds what the return count supports."""


class MissingPerScaleError(DataError):
    """Horizon decomposition requires per-scale components."""


@dataclass(frozen=True)
class ReturnGrid:
    """Uniformly sampled intraday log returns for one session."""

    day: str
    log_returns: np.ndarray = field(repr=False)
    sampling_interval: float = 300.0
    n_ticks_underlying: int = 0

    def __post_init__(self) -> None:
        r = np.asarray(self.log_returns, dtype=float)
        object.__setattr__(self, "log_returns", r)
        if r.ndim != 1 or r.size < 2:
            raise TooFewTicksError(
                f"return grid needs at least 2 returns, got shape {r.shape}"
            )


@dataclass(frozen=True)
class VarianceEstimate:
    """A scalar integrated-variance estimate plus provenance.

    ``per_scale`` (when present) sums to ``value``; ``jump_variation`` is
    the removed jump variation for jump-adjusted estimators; ``grids`` is
    the subgrid count G of two-scale estimators.
    """

    value: float
    estimator: str
    per_scale: np.ndarray | None = None
    jump_variation: float | None = None
    grids: int | None = None
    small_sample_adjusted: bool = False


def grid_from_prices(
    y: np.ndarray,
    step: int,
    day: str = "",
    sampling_interval: float = 300.0,
) -> ReturnGrid:
    """Sparse return grid from a price path, sampling every ``step`` ticks."""
    y = np.asarray(y, dtype=float)
    if step < 1:
        raise ConfigError(f"step must be >= 1, got {step}")
    sampled = y[::step]
    if sampled.size < 3:
        raise TooFewTicksError("not enough prices for a sparse grid")
    return ReturnGrid(
        day=day,
        log_returns=np.diff(sampled),
        sampling_interval=sampling_interval,
        n_ticks_underlying=y.size,
    )


def rv(g: ReturnGrid) -> VarianceEstimate:
    """Realized variance: sum of squared grid returns."""
    r = g.log_returns
    return VarianceEstimate(value=float(r @ r), estimator="RV")


def bv(g: ReturnGrid, stagger: int = 0) -> VarianceEstimate:
    """Bipower variation mu_1^-2 sum |r_i| |r_{i-1-stagger}|.

    ``stagger=1`` skips one return between the factors, which guards the
    product against bid-ask-style serial correlation in the noise.
    """
    if stagger < 0:
        raise ConfigError(f"stagger must be >= 0, got {stagger}")
    r = np.abs(g.log_returns)
    lag = 1 + stagger
    if r.size < lag + 1:
        raise TooFewTicksError(
            f"bipower with stagger {stagger} needs {lag + 1} returns, got {r.size}"
        )
    value = float(r[lag:] @ r[:-lag]) / _MU1_SQ
    return VarianceEstimate(value=value, estimator="BV")


def _subgrid_slices(n_prices: int, grids: int) -> list[slice]:
    return [slice(g, n_prices, grids) for g in range(grids)]


def _resolve_grids(
    grids: int | None, slow_interval: float, tick_interval: float, n_returns: int
) -> int:
    if grids is None:
        grids = int(round(slow_interval / tick_interval))
    if grids < 1:
        raise ConfigError(f"grid count must be >= 1, got {grids}")
    if n_returns < 2 * grids:
        raise TooFewTicksError(
            f"need at least 2 returns per subgrid: n={n_returns}, G={grids}"
        )
    return grids


def tsrv(
    y: np.ndarray,
    grids: int | None = None,
    slow_interval: float = 300.0,
    tick_interval: float = 1.0,
    small_sample: bool = True,
) -> VarianceEstimate:
    """Two-scale realized variance on a tick-level log-price path.

    Averages the RVs of the G offset subgrids and subtracts the noise-bias
    proxy (nbar / n) RV_all measured on every tick.
    """
    y = np.asarray(y, dtype=float)
    n = y.size - 1
    grids = _resolve_grids(grids, slow_interval, tick_interval, n)
    r_all = np.diff(y)
    rv_all = float(r_all @ r_all)
    rv_sum = 0.0
    for sl in _subgrid_slices(y.size, grids):
        r = np.diff(y[sl])
        rv_sum += float(r @ r)
    nbar = (n - grids + 1) / grids
    value = rv_sum / grids - (nbar / n) * rv_all
    if small_sample:
        value /= 1.0 - nbar / n
    return VarianceEstimate(
        value=value, estimator="TSRV", grids=grids, small_sample_adjusted=small_sample
    )


def optimal_grid_count(
    y: np.ndarray, slow_interval: float = 300.0, tick_interval: float = 1.0
) -> int:
    """Variance-minimising subgrid count G* = max(2, round(c n^(2/3))).

    The plug-in constant c = (12 eta^4 / IQ)^(1/3) uses the noise-variance
    estimate eta^2 = RV_all / (2n) and the realized quarticity of the
    slow grid for IQ.  Deterministic given ``y``; capped at n // 8 so the
    subgrids keep enough returns for the wavelet decomposition.
    """
    y = np.asarray(y, dtype=float)
    n = y.size - 1
    if n < 100:
        raise TooFewTicksError(f"optimal grid selection needs >= 100 returns, got {n}")
    r_all = np.diff(y)
    eta2 = float(r_all @ r_all) / (2.0 * n)
    step = max(1, int(round(slow_interval / tick_interval)))
    r_slow = np.diff(y[::step])
    m = r_slow.size
    if m < 2:
        raise TooFewTicksError("slow grid too sparse for quarticity")
    quarticity = m / 3.0 * float(np.sum(r_slow**4))
    if quarticity <= 0.0:
        return 2
    c = (12.0 * eta2 * eta2 / quarticity) ** (1.0 / 3.0)
    g = int(round(c * n ** (2.0 / 3.0)))
    return int(min(max(2, g), n // 8))


def _parzen(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.where(x <= 0.5, 1.0 - 6.0 * x**2 + 6.0 * x**3, 2.0 * (1.0 - x) ** 3)
    return np.where(x > 1.0, 0.0, out)


_KERNELS = {"parzen": _parzen}


def _default_bandwidth(r: np.ndarray) -> int:
    """Parzen rule-of-thumb H* = c* xi^(4/5) n^(3/5) with plug-ins."""
    n = r.size
    rv_ = float(r @ r)
    eta2 = rv_ / (2.0 * n)
    iq = n / 3.0 * float(np.sum(r**4))
    if iq <= 0.0:
        return 1
    xi2 = eta2 / np.sqrt(iq)
    h = int(np.ceil(_PARZEN_CSTAR * xi2 ** (2.0 / 5.0) * n ** (3.0 / 5.0)))
    return max(1, min(h, (n - 1) // 2))


def rk(
    g: ReturnGrid, kernel: str = "parzen", bandwidth: int | None = None
) -> VarianceEstimate:
    """Realized kernel: gamma_0 + sum_h k((h-1)/H) (gamma_h + gamma_-h)."""
    if kernel not in _KERNELS:
        raise ConfigError(f"unknown kernel {kernel!r}; choose from {sorted(_KERNELS)}")
    weight = _KERNELS[kernel]
    r = g.log_returns
    n = r.size
    h_band = _default_bandwidth(r) if bandwidth is None else int(bandwidth)
    if h_band < 1:
        raise ConfigError(f"bandwidth must be >= 1, got {h_band}")
    if n <= 2 * h_band:
        raise BandwidthTooLargeError(f"bandwidth {h_band} needs n > {2 * h_band}, got {n}")
    value = float(r @ r)
    for h in range(1, h_band + 1):
        gamma = float(r[h:] @ r[:-h])
        value += float(weight((h - 1) / h_band)) * 2.0 * gamma
    return VarianceEstimate(value=value, estimator="RK")


def wrv(g: ReturnGrid, spec: WaveletSpec = D4, levels: int = 4) -> VarianceEstimate:
    """Wavelet realized variance: total MODWT energy of the grid returns.

    Numerically identical to RV by the energy decomposition; the point is
    the per-scale split it carries along.
    """
    d = transform(g.log_returns, spec, levels)
    per_scale = energy_by_scale(d)
    return VarianceEstimate(
        value=float(per_scale.sum()), estimator="WRV", per_scale=per_scale
    )


def jwtsrv(
    y: np.ndarray,
    spec: WaveletSpec = D4,
    levels: int = 4,
    grids: int | str | None = None,
    slow_interval: float = 300.0,
    tick_interval: float = 1.0,
    neighborhood: int | None = None,
    small_sample: bool = True,
    noise_correction: bool = True,
) -> VarianceEstimate:
    """Jump-adjusted wavelet two-scale realized variance.

    Pipeline: detect jumps on ``y``; remove them; average the wavelet
    energy of the G offset subgrids of the adjusted path; subtract the
    fast-scale correction (nbar / n) RV_all; rescale by (1 - nbar/n)^(-1)
    when ``small_sample``.  The per-scale vector is the averaged subgrid
    energy split, rescaled so its entries sum to the final value exactly.

    ``grids`` may be an integer, None (slow interval / tick interval), or
    "opt" for the variance-minimising count.  ``noise_correction=False``
    drops the fast-scale term (and the small-sample refit), leaving the
    plain subgrid-averaged wavelet variance.
    """
    y = np.asarray(y, dtype=float)
    n = y.size - 1
    if isinstance(grids, str):
        if grids != "opt":
            raise ConfigError(f"grids must be an int, None, or 'opt'; got {grids!r}")
        grids = optimal_grid_count(y, slow_interval, tick_interval)
    grids = _resolve_grids(grids, slow_interval, tick_interval, n)

    report = detect_jumps(y, spec=spec, neighborhood=neighborhood)
    adjusted = jump_adjust(y, report) if len(report) else y

    min_returns = (y.size - grids) // grids  # shortest subgrid's return count
    if min_returns < filter_width(spec.length, levels) or levels > int(
        np.log2(max(min_returns, 2))
    ):
        raise TooFewTicksError(
            f"subgrids of {min_returns} returns cannot carry {levels} wavelet levels"
        )

    # Group equal-length subgrids so each group filters as one batch.
    groups: dict[int, list[np.ndarray]] = {}
    for sl in _subgrid_slices(y.size, grids):
        r = np.diff(adjusted[sl])
        groups.setdefault(r.size, []).append(r)
    energy = np.zeros(levels + 1)
    for rows in groups.values():
        energy += scale_energies(np.stack(rows), spec, levels).sum(axis=0)
    energy /= grids

    r_all = np.diff(adjusted)
    rv_all = float(r_all @ r_all)
    nbar = (n - grids + 1) / grids
    avg_energy = float(energy.sum())
    value = avg_energy
    adjusted_flag = False
    if noise_correction:
        value -= (nbar / n) * rv_all
        if small_sample:
            value /= 1.0 - nbar / n
            adjusted_flag = True

    if avg_energy > 0.0:
        per_scale = energy * (value / avg_energy)
        per_scale[-1] += value - per_scale.sum()  # exact additivity
    else:
        per_scale = np.zeros_like(energy)
    return VarianceEstimate(
        value=value,
        estimator="JWTSRV",
        per_scale=per_scale,
        jump_variation=report.jump_variation,
        grids=grids,
        small_sample_adjusted=adjusted_flag,
    )


def default_horizon_labels(levels: int, sampling_interval: float = 300.0) -> list[str]:
    """Investment-horizon labels for ``levels`` scales plus the remainder.

    Scale j of a grid sampled every ``sampling_interval`` seconds is tagged
    with the window [base * 2^(j-1), base * 2^j] minutes; the smooth
    component covers everything up to one day.
    """
    base = sampling_interval / 60.0
    labels = []
    for j in range(1, levels + 1):
        labels.append(f"{_fmt_minutes(base * 2 ** (j - 1))}-{_fmt_minutes(base * 2**j)}")
    labels.append(f"{_fmt_minutes(base * 2**levels)}-1d")
    return labels


def _fmt_minutes(m: float) -> str:
    if m >= 60.0 and m % 60.0 == 0.0:
        h = m / 60.0
        return f"{h:g}h"
    return f"{m:g}m"


def decompose_horizons(
    v: VarianceEstimate,
    horizon_labels: list[str] | None = None,
    sampling_interval: float = 300.0,
) -> list[tuple[str, float]]:
    """Label the per-scale components of an estimate as horizon components.

    Returns (label, variance) pairs in scale order; their sum equals the
    estimate value to within the per-scale additivity guarantee.
    """
    if v.per_scale is None:
        raise MissingPerScaleError(
            f"estimator {v.estimator} carries no per-scale components"
        )
    per_scale = np.asarray(v.per_scale, dtype=float)
    if horizon_labels is None:
        horizon_labels = default_horizon_labels(per_scale.size - 1, sampling_interval)
    if len(horizon_labels) != per_scale.size:
        raise ConfigError(
            f"{len(horizon_labels)} horizon labels for {per_scale.size} components"
        )
    return [(label, float(c)) for label, c in zip(horizon_labels, per_scale)]
