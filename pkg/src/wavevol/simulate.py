"""Intraday sample-path simulators with known ground truth.

Two data-generating processes, both with annualised parameters, compound
Poisson jumps in the price, and i.i.d. Gaussian observation noise added to
the latent log price:

* a one-factor square-root stochastic-volatility jump diffusion
  (Euler scheme, full truncation at the zero-variance boundary), and
* a fractional stochastic-volatility model whose variance is driven by
  fractional Gaussian noise of Hurst index H (exact circulant-embedding
  generator), reducing to independent increments at H = 1/2.

Every path records the step-resolution integrated variance and the list of
injected jumps, so estimator bias can be measured exactly.

Reproducibility contract: each path derives three independent substreams
from ``(seed, path_index)`` - diffusion, jumps, noise - so a path is
bit-identical regardless of batch width or evaluation order, latent paths
are shared across noise levels, and the diffusion is shared across jump
intensities (matched-path comparisons).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import ConfigError

__all__ = [
    "SimConfig",
    "SimPath",
    "DayBatch",
    "InvalidConfigError",
    "heston_config",
    "fsv_config",
    "fgn",
    "simulate_heston_jd",
    "simulate_fsv",
    "simulate_path",
    "iter_day_batches",
    "add_noise",
]

DAYS_PER_YEAR = 252.0
DEFAULT_STEPS = 23400  # one second per step over a 6.5 hour day


class InvalidConfigError(ConfigError):
    """Simulation configuration fails validation."""


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings; rate parameters are annualised.

    ``jump_intensity`` is the expected Poisson jump count per day; setting
    ``jump_count`` instead forces exactly that many jumps per day.  Noise
    of standard deviation ``noise_sd`` is added to log prices.
    """

    model: str = "heston_jd"
    mu: float = 0.05
    alpha: float = 0.04
    kappa: float = 5.0
    gamma: float = 0.5
    rho: float = -0.5
    hurst: float = 0.5
    sigma_jump: float = 0.025
    jump_intensity: float = 0.0
    jump_count: int | None = None
    noise_sd: float = 0.0
    n_steps: int = DEFAULT_STEPS
    horizon_days: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.model not in ("heston_jd", "fractional_sv"):
            raise InvalidConfigError(f"unknown model {self.model!r}")
        if self.model == "fractional_sv" and not 0.0 < self.hurst <= 1.0:
            raise InvalidConfigError(f"Hurst index must be in (0, 1], got {self.hurst}")
        if self.noise_sd < 0.0:
            raise InvalidConfigError("noise_sd must be >= 0")
        if self.jump_intensity < 0.0:
            raise InvalidConfigError("jump_intensity must be >= 0")
        if self.n_steps < 2:
            raise InvalidConfigError("n_steps must be >= 2")
        if self.horizon_days < 1:
            raise InvalidConfigError("horizon_days must be >= 1")
        if self.alpha < 0.0 or self.kappa < 0.0 or self.gamma < 0.0:
            raise InvalidConfigError("variance parameters must be >= 0")
        if not -1.0 <= self.rho <= 1.0:
            raise InvalidConfigError(f"correlation must be in [-1, 1], got {self.rho}")


def heston_config(**overrides) -> SimConfig:
    """Jump-diffusion defaults: mu=.05, alpha=.04, kappa=5, gamma=.5, rho=-.5."""
    return SimConfig(model="heston_jd", **overrides)


def fsv_config(hurst: float = 0.7, **overrides) -> SimConfig:
    """Fractional SV defaults: mu=.05, alpha=.2, kappa=20, gamma=.012."""
    base = dict(model="fractional_sv", mu=0.05, alpha=0.2, kappa=20.0, gamma=0.012,
                hurst=hurst)
    base.update(overrides)
    return SimConfig(**base)


@dataclass(frozen=True)
class SimPath:
    """One simulated path with its ground truth.

    ``prices`` and ``observed`` have ``horizon_days * n_steps + 1`` entries;
    ``variance`` holds the spot variance at each step start (same length).
    ``true_iv`` is the per-day Riemann sum of the variance path and
    ``jumps`` the injected (price index, size) pairs.
    """

    config: SimConfig
    prices: np.ndarray = field(repr=False)
    observed: np.ndarray = field(repr=False)
    variance: np.ndarray = field(repr=False)
    true_iv: np.ndarray
    jumps: list[tuple[int, float]]

    @property
    def true_jump_variation(self) -> float:
        return float(sum(s * s for _, s in self.jumps))


@dataclass(frozen=True)
class DayBatch:
    """One day of a batch of paths (arrays have shape (paths, n_steps + 1))."""

    day: int
    observed: np.ndarray = field(repr=False)
    prices: np.ndarray = field(repr=False)
    variance: np.ndarray = field(repr=False)
    true_iv: np.ndarray
    jump_variation: np.ndarray
    jumps: list[list[tuple[int, float]]]


def fgn(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance fractional Gaussian noise via circulant embedding.

    Exact for the target autocovariance
    gamma(k) = 0.5 (|k+1|^2H - 2|k|^2H + |k-1|^2H); H = 1/2 short-circuits
    to independent draws.
    """
    if not 0.0 < hurst <= 1.0:
        raise InvalidConfigError(f"Hurst index must be in (0, 1], got {hurst}")
    if hurst == 0.5:
        return rng.standard_normal(n)
    k = np.arange(n, dtype=float)
    gam = 0.5 * ((k + 1) ** (2 * hurst) - 2 * k ** (2 * hurst) + np.abs(k - 1) ** (2 * hurst))
    tail = 0.5 * ((n + 1) ** (2 * hurst) - 2 * n ** (2 * hurst) + (n - 1) ** (2 * hurst))
    row = np.concatenate([gam, [tail], gam[-1:0:-1]])
    lam = np.fft.fft(row).real
    if lam.min() < -1e-8 * lam.max():
        raise InvalidConfigError(
            f"circulant embedding not nonnegative definite for n={n}, H={hurst}"
        )
    lam = np.clip(lam, 0.0, None)
    z = np.empty(2 * n, dtype=complex)
    z[0] = rng.standard_normal() * np.sqrt(2.0)
    z[n] = rng.standard_normal() * np.sqrt(2.0)
    v = rng.standard_normal((n - 1, 2))
    z[1:n] = v[:, 0] + 1j * v[:, 1]
    z[n + 1 :] = np.conj(z[1:n][::-1])
    return np.sqrt(n) * np.fft.ifft(np.sqrt(lam) * z).real[:n]


def add_noise(prices: np.ndarray, noise_sd: float, rng=None) -> np.ndarray:
    """Observed path y = p + eps with eps i.i.d. N(0, noise_sd^2)."""
    if noise_sd < 0.0:
        raise InvalidConfigError("noise_sd must be >= 0")
    prices = np.asarray(prices, dtype=float)
    if noise_sd == 0.0:
        return prices.copy()
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    return prices + noise_sd * rng.standard_normal(prices.shape)


class _BatchEngine:
    """Day-by-day batch simulator with per-path substreams.

    Stream layout per path p: ``default_rng([seed, p, 0])`` drives the
    diffusion (FSV draws its full-horizon fGn first), ``[seed, p, 1]`` the
    jumps, ``[seed, p, 2]`` the standardised noise.  Each day consumes a
    fixed number of draws, so day d of path p never depends on batch width.
    """

    def __init__(self, cfg: SimConfig, n_paths: int):
        if n_paths < 1:
            raise InvalidConfigError("need at least one path")
        self.cfg = cfg
        self.n_paths = n_paths
        self._diff = [np.random.default_rng([cfg.seed, p, 0]) for p in range(n_paths)]
        self._jump = [np.random.default_rng([cfg.seed, p, 1]) for p in range(n_paths)]
        self._noise = [np.random.default_rng([cfg.seed, p, 2]) for p in range(n_paths)]
        self._dt = 1.0 / (DAYS_PER_YEAR * cfg.n_steps)
        self._sqdt = np.sqrt(self._dt)
        self._v = np.full(n_paths, cfg.alpha)
        self._last_price = np.zeros(n_paths)
        self._day = 0
        if cfg.model == "fractional_sv":
            total = cfg.n_steps * cfg.horizon_days
            scale = self._dt**cfg.hurst
            self._fgn = np.stack(
                [scale * fgn(total, cfg.hurst, rng) for rng in self._diff]
            )
        else:
            self._fgn = None
        # Noise for the very first observation; later points draw per day.
        self._last_noise = np.stack([r.standard_normal() for r in self._noise])

    def next_day(self) -> DayBatch:
        cfg = self.cfg
        n, width = cfg.n_steps, self.n_paths
        if self._day >= cfg.horizon_days:
            raise StopIteration
        zx = np.empty((width, n))
        zy = np.empty((width, n)) if cfg.model == "heston_jd" else None
        for p, rng in enumerate(self._diff):
            if cfg.model == "heston_jd":
                z = rng.standard_normal((n, 2))
                zx[p] = z[:, 0]
                zy[p] = cfg.rho * z[:, 0] + np.sqrt(1.0 - cfg.rho**2) * z[:, 1]
            else:
                zx[p] = rng.standard_normal(n)

        jump_inc = np.zeros((width, n))
        jump_var = np.zeros(width)
        jumps: list[list[tuple[int, float]]] = []
        offset = self._day * n
        for p, rng in enumerate(self._jump):
            count = cfg.jump_count if cfg.jump_count is not None else rng.poisson(
                cfg.jump_intensity
            )
            steps = rng.integers(1, n + 1, size=count)
            sizes = rng.normal(0.0, cfg.sigma_jump, size=count)
            np.add.at(jump_inc[p], steps - 1, sizes)
            jump_var[p] = float(sizes @ sizes)
            jumps.append([(offset + int(s), float(x)) for s, x in zip(steps, sizes)])

        if cfg.model == "heston_jd":
            vpath = self._step_heston(zy)
        else:
            vpath = self._step_fsv()
        increments = (cfg.mu - 0.5 * vpath) * self._dt + np.sqrt(vpath) * zx * self._sqdt
        increments += jump_inc
        prices = np.concatenate(
            [self._last_price[:, None], self._last_price[:, None] + np.cumsum(increments, axis=1)],
            axis=1,
        )
        self._last_price = prices[:, -1].copy()

        noise_std = np.empty((width, n + 1))
        noise_std[:, 0] = self._last_noise
        for p, rng in enumerate(self._noise):
            noise_std[p, 1:] = rng.standard_normal(n)
        self._last_noise = noise_std[:, -1].copy()
        observed = prices + cfg.noise_sd * noise_std

        variance = np.concatenate([vpath, self._v[:, None]], axis=1)
        batch = DayBatch(
            day=self._day,
            observed=observed,
            prices=prices,
            variance=variance,
            true_iv=vpath.sum(axis=1) * self._dt,
            jump_variation=jump_var,
            jumps=jumps,
        )
        self._day += 1
        return batch

    def _step_heston(self, zy: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        n, width = cfg.n_steps, self.n_paths
        v = self._v
        vpath = np.empty((width, n))
        for i in range(n):
            vp = np.maximum(v, 0.0)  # full truncation
            vpath[:, i] = vp
            v = v + cfg.kappa * (cfg.alpha - vp) * self._dt + cfg.gamma * np.sqrt(
                vp
            ) * zy[:, i] * self._sqdt
        self._v = v
        return vpath

    def _step_fsv(self) -> np.ndarray:
        cfg = self.cfg
        n, width = cfg.n_steps, self.n_paths
        dw = self._fgn[:, self._day * n : (self._day + 1) * n]
        v = self._v
        vpath = np.empty((width, n))
        for i in range(n):
            vp = np.maximum(v, 0.0)
            vpath[:, i] = vp
            v = v + cfg.kappa * (cfg.alpha - vp) * self._dt + cfg.gamma * dw[:, i]
        self._v = v
        return vpath


def iter_day_batches(cfg: SimConfig, n_paths: int) -> Iterator[DayBatch]:
    """Yield ``cfg.horizon_days`` batches of ``n_paths`` simulated days."""
    engine = _BatchEngine(cfg, n_paths)
    for _ in range(cfg.horizon_days):
        yield engine.next_day()


def simulate_path(cfg: SimConfig, path_index: int = 0) -> SimPath:
    """Simulate one full path (all horizon days) for ``path_index``.

    Equals row ``path_index`` of any batch run with the same config.
    """
    wide = _BatchEngine(cfg, path_index + 1)
    prices, observed, variance, ivs, jumps = [], [], [], [], []
    for _ in range(cfg.horizon_days):
        day = wide.next_day()
        start = 0 if not prices else 1
        prices.append(day.prices[path_index, start:])
        observed.append(day.observed[path_index, start:])
        variance.append(day.variance[path_index, start:])
        ivs.append(day.true_iv[path_index])
        jumps.extend(day.jumps[path_index])
    return SimPath(
        config=cfg,
        prices=np.concatenate(prices),
        observed=np.concatenate(observed),
        variance=np.concatenate(variance),
        true_iv=np.asarray(ivs),
        jumps=jumps,
    )


def simulate_heston_jd(cfg: SimConfig) -> SimPath:
    """One jump-diffusion stochastic-volatility path."""
    if cfg.model != "heston_jd":
        raise InvalidConfigError(f"expected model 'heston_jd', got {cfg.model!r}")
    return simulate_path(cfg)


def simulate_fsv(cfg: SimConfig) -> SimPath:
    """One fractional stochastic-volatility path."""
    if cfg.model != "fractional_sv":
        raise InvalidConfigError(f"expected model 'fractional_sv', got {cfg.model!r}")
    return simulate_path(cfg)
