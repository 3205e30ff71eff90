"""Maximal overlap discrete wavelet transform by circular filtering.

Coefficients keep the full series length at every level (no downsampling),
which makes the transform shift-invariant and free of the power-of-two
length restriction.  The reference implementation filters in the time
domain; an FFT route is available and must agree with it to 1e-12.

The transform underpins two quantities used by the estimators:

* scale-by-scale energy, which partitions ||x||^2 across levels plus the
  smooth remainder, and
* the (un)biased wavelet variance at a single level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError
from .filters import WaveletSpec, base_filter, filter_width, level_filter

__all__ = [
    "ModwtDecomposition",
    "SeriesTooShortError",
    "LevelTooDeepError",
    "InsufficientCoefficientsError",
    "transform",
    "energy_by_scale",
    "scale_energies",
    "wavelet_variance",
    "circular_filter",
]


class SeriesTooShortError(DataError):
    """Series shorter than the deepest filter width."""


class LevelTooDeepError(ConfigError):
    """Requested more levels than log2(N) supports."""


class InsufficientCoefficientsError(DataError):
    """No boundary-free coefficients left for the unbiased variance."""


@dataclass(frozen=True)
class ModwtDecomposition:
    """MODWT coefficients of one series: J wavelet vectors plus the smooth.

    ``wavelet`` has shape (levels, N), ``scaling`` shape (N,).  The
    ``boundary_counts`` entry for level j is L_j - 1, the number of
    coefficients whose circular support wraps past the series start;
    they are recorded but never dropped from energy sums.
    """

    spec: WaveletSpec
    wavelet: np.ndarray = field(repr=False)
    scaling: np.ndarray = field(repr=False)
    boundary_counts: tuple[int, ...] = ()

    @property
    def levels(self) -> int:
        return self.wavelet.shape[0]

    @property
    def size(self) -> int:
        return self.scaling.size


def circular_filter(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Circular convolution out[i] = sum_l taps[l] x[(i-l) mod N].

    ``x`` may have leading batch axes; filtering runs along the last axis.
    Tap indices wrap modulo N, so filters wider than the series are
    periodised implicitly.
    """
    out = np.zeros_like(x, dtype=float)
    for l, t in enumerate(taps):
        out += t * np.roll(x, l, axis=-1)
    return out


def _fft_filter(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    wrapped = np.zeros(n)
    np.add.at(wrapped, np.arange(taps.size) % n, taps)
    return np.fft.irfft(np.fft.rfft(x, axis=-1) * np.fft.rfft(wrapped), n=n, axis=-1)


def _check_levels(n: int, spec: WaveletSpec, levels: int) -> None:
    if levels < 1:
        raise ConfigError(f"levels must be >= 1, got {levels}")
    if levels > int(np.log2(n)):
        raise LevelTooDeepError(
            f"levels={levels} exceeds log2(N)={np.log2(n):.2f} for N={n}"
        )
    deepest = filter_width(spec.length, levels)
    if n < deepest:
        raise SeriesTooShortError(
            f"series of length {n} shorter than level-{levels} filter width {deepest}"
        )


def transform(
    x: np.ndarray, spec: WaveletSpec, levels: int, method: str = "direct"
) -> ModwtDecomposition:
    """MODWT of a 1-D series at ``levels`` levels.

    Requires N >= L_levels and levels <= log2(N).  ``method`` is "direct"
    (time-domain reference) or "fft".
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ConfigError("transform expects a 1-D series")
    _check_levels(x.size, spec, levels)
    if method not in ("direct", "fft"):
        raise ConfigError(f"unknown method {method!r}")
    filt = _fft_filter if method == "fft" else circular_filter

    base = base_filter(spec)
    coeffs = np.empty((levels, x.size))
    bounds = []
    for j in range(1, levels + 1):
        fj = level_filter(base, j)
        coeffs[j - 1] = filt(x, fj.wavelet)
        bounds.append(fj.width - 1)
    smooth = filt(x, level_filter(base, levels).scaling)
    return ModwtDecomposition(
        spec=spec, wavelet=coeffs, scaling=smooth, boundary_counts=tuple(bounds)
    )


def energy_by_scale(d: ModwtDecomposition) -> np.ndarray:
    """Vector (||W_1||^2, ..., ||W_J||^2, ||V_J||^2); sums to ||x||^2."""
    w = np.sum(d.wavelet * d.wavelet, axis=-1)
    v = float(d.scaling @ d.scaling)
    return np.append(w, v)


def scale_energies(x: np.ndarray, spec: WaveletSpec, levels: int) -> np.ndarray:
    """Per-scale energies for one series or a batch of equal-length series.

    Accepts shape (..., N) and returns shape (..., levels + 1) with the
    smooth energy last.  Batch rows are filtered in one pass, which is what
    the subgrid-averaged estimators lean on.
    """
    x = np.asarray(x, dtype=float)
    _check_levels(x.shape[-1], spec, levels)
    base = base_filter(spec)
    parts = []
    for j in range(1, levels + 1):
        w = circular_filter(x, level_filter(base, j).wavelet)
        parts.append(np.sum(w * w, axis=-1))
    v = circular_filter(x, level_filter(base, levels).scaling)
    parts.append(np.sum(v * v, axis=-1))
    return np.stack(parts, axis=-1)


def wavelet_variance(
    d: ModwtDecomposition, level: int, mode: str = "unbiased"
) -> float:
    """Wavelet variance at ``level``.

    Unbiased mode averages the squared coefficients unaffected by the
    circular boundary (the M_j = N - L_j + 1 trailing ones); biased mode
    averages all N.  The two agree as N grows.
    """
    if not 1 <= level <= d.levels:
        raise ConfigError(f"level {level} outside decomposition range 1..{d.levels}")
    w = d.wavelet[level - 1]
    n = w.size
    if mode == "biased":
        return float(w @ w) / n
    if mode != "unbiased":
        raise ConfigError(f"unknown mode {mode!r}")
    width = filter_width(d.spec.length, level)
    m = n - width + 1
    if m <= 0:
        raise InsufficientCoefficientsError(
            f"unbiased variance needs N - L_j + 1 > 0; got N={n}, L_{level}={width}"
        )
    tail = w[width - 1 :]
    return float(tail @ tail) / m
