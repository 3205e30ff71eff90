"""Daubechies-family MODWT filter construction.

Level-1 MODWT taps are the classical DWT taps divided by sqrt(2); higher
levels come from the filter cascade

    H_j(f) = H_1(2^(j-1) f) * prod_{l=0..j-2} G_1(2^l f),
    G_j(f) = prod_{l=0..j-1} G_1(2^l f),

realised here as time-domain convolutions of upsampled taps, which equals
the inverse Fourier transform of the spectral product to machine precision.

Tap orientation: taps are stored in convolution order (h_0 ... h_{L-1}), so
coefficient i of a circular filtering is sum_l h_l x[(i - l) mod N].  Sign
convention follows the extremal-phase construction in which the level-1
scaling taps are all positive and the wavelet taps are their quadrature
mirror h_l = (-1)^l g_{L-1-l}; energy identities are sign-invariant but jump
localisation is not, so downstream code assumes exactly this orientation.

Supported families are Haar (length 2) and D(4) (length 4).  Haar doubles as
the analytic oracle in the test-suite; D(4) is the working filter everywhere
else.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = [
    "WaveletSpec",
    "ModwtFilter",
    "UnsupportedFamilyError",
    "HAAR",
    "D4",
    "base_filter",
    "level_filter",
    "filter_width",
    "squared_gain",
    "analytic_wavelet_gain",
    "analytic_scaling_gain",
    "step_phase_offset",
]

_SQRT3 = np.sqrt(3.0)

# DWT taps; MODWT taps are these divided by sqrt(2).
_DWT_SCALING = {
    "haar": np.array([1.0, 1.0]) / np.sqrt(2.0),
    "d4": np.array([1.0 + _SQRT3, 3.0 + _SQRT3, 3.0 - _SQRT3, 1.0 - _SQRT3])
    / (4.0 * np.sqrt(2.0)),
}

_FAMILY_ALIASES = {"haar": "haar", "d2": "haar", "d4": "d4", "daubechies4": "d4"}


class UnsupportedFamilyError(ConfigError):
    """Requested wavelet family is not implemented."""


@dataclass(frozen=True)
class WaveletSpec:
    """A wavelet family choice. ``family`` is 'haar' (alias 'd2') or 'd4'."""

    family: str = "d4"

    def __post_init__(self) -> None:
        key = _FAMILY_ALIASES.get(self.family.lower())
        if key is None:
            raise UnsupportedFamilyError(
                f"unsupported wavelet family {self.family!r}; " "expected 'haar' or 'd4'"
            )
        object.__setattr__(self, "family", key)

    @property
    def length(self) -> int:
        """Width L of the level-1 filter (2 for Haar, 4 for D4)."""
        return 2 if self.family == "haar" else 4


HAAR = WaveletSpec("haar")
D4 = WaveletSpec("d4")


@dataclass(frozen=True)
class ModwtFilter:
    """MODWT wavelet/scaling tap pair at one decomposition level."""

    spec: WaveletSpec
    level: int
    wavelet: np.ndarray = field(repr=False)
    scaling: np.ndarray = field(repr=False)

    @property
    def width(self) -> int:
        return self.wavelet.size


def filter_width(length: int, level: int) -> int:
    """Width L_j = (2^j - 1)(L - 1) + 1 of a level-``level`` filter."""
    return (2**level - 1) * (length - 1) + 1


def base_filter(spec: WaveletSpec) -> ModwtFilter:
    """Level-1 MODWT filter pair for ``spec`` (DWT taps divided by sqrt 2)."""
    g = _DWT_SCALING[spec.family] / np.sqrt(2.0)
    # Quadrature mirror: h_l = (-1)^l g_{L-1-l}.
    signs = np.where(np.arange(g.size) % 2 == 0, 1.0, -1.0)
    h = signs * g[::-1]
    g.flags.writeable = False
    h.flags.writeable = False
    return ModwtFilter(spec=spec, level=1, wavelet=h, scaling=g)


def _upsample(taps: np.ndarray, factor: int) -> np.ndarray:
    if factor == 1:
        return taps.copy()
    out = np.zeros((taps.size - 1) * factor + 1)
    out[::factor] = taps
    return out


def level_filter(base: ModwtFilter, level: int) -> ModwtFilter:
    """Level-``level`` filter from a level-1 ``base`` via the cascade."""
    if base.level != 1:
        raise ConfigError("level_filter expects a level-1 base filter")
    if level < 1:
        raise ConfigError(f"decomposition level must be >= 1, got {level}")
    if level == 1:
        return base
    h = _upsample(base.wavelet, 2 ** (level - 1))
    g = _upsample(base.scaling, 2 ** (level - 1))
    for l in range(level - 1):
        low = _upsample(base.scaling, 2**l)
        h = np.convolve(h, low)
        g = np.convolve(g, low)
    h.flags.writeable = False
    g.flags.writeable = False
    return ModwtFilter(spec=base.spec, level=level, wavelet=h, scaling=g)


def squared_gain(taps: np.ndarray, freq) -> np.ndarray:
    """Squared gain |sum_l taps_l exp(-i 2 pi f l)|^2 at frequency ``freq``.

    ``freq`` may be a scalar or an array; the result matches its shape.
    """
    f = np.asarray(freq, dtype=float)
    l = np.arange(taps.size)
    tf = np.exp(-2j * np.pi * np.multiply.outer(f, l)) @ taps
    out = np.abs(tf) ** 2
    return out if out.ndim else float(out)


def analytic_wavelet_gain(length: int, freq) -> np.ndarray:
    """Closed-form level-1 MODWT wavelet squared gain for a D(L) filter.

    This is the DWT closed form 2 sin^L(pi f) sum_l C(L/2-1+l, l) cos^2l(pi f)
    divided by 2 for the MODWT rescaling.
    """
    f = np.asarray(freq, dtype=float)
    half = length // 2
    poly = sum(
        _binom(half - 1 + l, l) * np.cos(np.pi * f) ** (2 * l) for l in range(half)
    )
    return np.sin(np.pi * f) ** length * poly


def analytic_scaling_gain(length: int, freq) -> np.ndarray:
    """Closed-form level-1 MODWT scaling squared gain: wavelet gain at 1/2 - f."""
    return analytic_wavelet_gain(length, 0.5 - np.asarray(freq, dtype=float))


def _binom(n: int, k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= (n - i) / (i + 1)
    return out


def step_phase_offset(spec: WaveletSpec) -> int:
    """Offset between a level step and the peak level-1 coefficient response.

    A unit step in the input starting at index s excites coefficient s + m
    the most, where m maximises |cumulative sum of the wavelet taps|; the
    offset is 0 for Haar and 2 for D4.  Jump localisation subtracts it.
    """
    partial = np.cumsum(base_filter(spec).wavelet)
    return int(np.argmax(np.abs(partial)))
