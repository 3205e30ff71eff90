"""Jump detection on intraday log prices via the universal threshold.

Level-1 MODWT coefficients of the observed price path are compared against
d * sqrt(2 log n), where d is the MAD-based robust scale
median(|W_1|) / 0.6745.  Coefficients exceeding the threshold are clustered
into events (a single price jump excites up to L-1 adjacent coefficients),
each event is located at the inferred step boundary, and its size is the
difference between the price averages just after and just before that
boundary.  Jump variation is the sum of squared sizes.

The located index is the first post-jump observation: the in-cluster
coefficient argmax is shifted back by the family's step-response phase
(see ``filters.step_phase_offset``), which keeps the subsequent step
removal aligned for asymmetric filters such as D4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .filters import WaveletSpec, D4, base_filter, step_phase_offset
from .modwt import SeriesTooShortError, circular_filter

__all__ = [
    "JumpReport",
    "DegenerateScaleError",
    "LocationOutOfRangeError",
    "default_neighborhood",
    "detect_jumps",
    "jump_adjust",
]

# MAD-to-sigma factor for Gaussian data.
_MAD_SCALE = 0.6745


class DegenerateScaleError(DataError):
    """MAD scale is zero; the threshold model presumes diffusive motion."""


class LocationOutOfRangeError(DataError):
    """A jump location does not index into the adjusted series."""


@dataclass(frozen=True)
class JumpReport:
    """Detected jumps for one intraday price path.

    ``locations`` hold grid indices of the first post-jump observation;
    ``sizes`` are signed log-price step heights.  ``jump_variation`` is
    exactly the sum of squared sizes.
    """

    locations: np.ndarray
    sizes: np.ndarray
    jump_variation: float
    threshold: float
    mad_scale: float
    neighborhood: int

    def __len__(self) -> int:
        return self.locations.size

    def to_rows(self, day: str) -> list[tuple]:
        """CSV rows (day, grid index, size, squared size)."""
        return [
            (day, int(k), float(s), float(s * s))
            for k, s in zip(self.locations, self.sizes)
        ]


def default_neighborhood(n: int) -> int:
    """Default averaging half-width: ceil(sqrt(n) / 4) grid points."""
    return int(np.ceil(np.sqrt(n) / 4.0))


def detect_jumps(
    y: np.ndarray,
    spec: WaveletSpec = D4,
    neighborhood: int | None = None,
) -> JumpReport:
    """Detect jumps in the log-price vector ``y``.

    Flags level-1 coefficients with |W_1,k| > d sqrt(2 log n), merges runs
    of flagged indices closer than the filter width into single events, and
    sizes each event from the mean prices over [tau, tau + delta] and
    [tau - delta, tau - 1].  Raises ``DegenerateScaleError`` when more than
    half the coefficients are zero (d = 0).
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 16:
        raise SeriesTooShortError(f"need at least 16 observations, got {n}")
    delta = default_neighborhood(n) if neighborhood is None else int(neighborhood)
    if delta < 1:
        raise ConfigError(f"neighborhood must be >= 1, got {delta}")
    if delta > n // 4:
        raise ConfigError(f"neighborhood {delta} too wide for series of length {n}")

    w1 = circular_filter(y, base_filter(spec).wavelet)
    absw = np.abs(w1)
    d = float(np.median(absw)) / _MAD_SCALE
    # rounding of the zero-sum taps leaves ~eps * level coefficients on
    # constant stretches; treat those as zero
    floor = 100.0 * np.finfo(float).eps * max(1.0, float(np.abs(y).max()))
    if d <= floor:
        raise DegenerateScaleError("median absolute level-1 coefficient is zero")
    threshold = d * np.sqrt(2.0 * np.log(n))

    flagged = np.nonzero(absw > threshold)[0]
    shift = step_phase_offset(spec)
    gap = spec.length - 1

    locations: list[int] = []
    sizes: list[float] = []
    for cluster in _split_clusters(flagged, gap):
        peak = cluster[np.argmax(absw[cluster])]
        loc = int(peak) - shift
        lo = max(0, loc - delta)
        hi = min(n - 1, loc + delta)
        if loc - 1 < lo or loc > hi:
            continue  # no pre- or post-jump window survives truncation
        size = float(np.mean(y[loc : hi + 1]) - np.mean(y[lo:loc]))
        locations.append(loc)
        sizes.append(size)

    loc_arr = np.asarray(locations, dtype=int)
    size_arr = np.asarray(sizes, dtype=float)
    return JumpReport(
        locations=loc_arr,
        sizes=size_arr,
        jump_variation=float(size_arr @ size_arr),
        threshold=float(threshold),
        mad_scale=d,
        neighborhood=delta,
    )


def _split_clusters(flagged: np.ndarray, gap: int) -> list[np.ndarray]:
    if flagged.size == 0:
        return []
    breaks = np.nonzero(np.diff(flagged) > gap)[0] + 1
    return np.split(flagged, breaks)


def jump_adjust(y: np.ndarray, report: JumpReport) -> np.ndarray:
    """Remove detected jumps: subtract each size from observations >= its
    location, which deletes the steps while leaving the diffusion intact."""
    y = np.asarray(y, dtype=float)
    adjusted = y.copy()
    for loc, size in zip(report.locations, report.sizes):
        if not 0 <= loc < y.size:
            raise LocationOutOfRangeError(
                f"jump location {loc} outside series of length {y.size}"
            )
        adjusted[loc:] -= size
    return adjusted
