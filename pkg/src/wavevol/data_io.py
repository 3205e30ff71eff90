"""Tick-data ingestion, trading sessions, and sampling grids.

Input CSVs carry two columns, ``timestamp,price``, with timestamps either
ISO-8601 strings or epoch milliseconds (declared up front).  Ticks sharing
a timestamp collapse to their arithmetic mean.  All times are normalised
to the exchange time zone at load.

A trading day runs from 17:00 (exchange time) on the previous calendar day
to 16:00 on the session's labelling date; weekends, listed holidays, and
the fixed year-end exclusions are skipped.  Sampling is previous-tick: the
price at grid time g is the latest tick at or before g, so grids never
look ahead.  Grid points before a session's first tick fall back to that
first tick's price, which keeps every full session at exactly
session-length / interval returns.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from zoneinfo import ZoneInfo

import numpy as np

from .errors import ConfigError, DataError
from .estimators import ReturnGrid

__all__ = [
    "TickFormat",
    "TickSeries",
    "SessionCalendar",
    "ParseError",
    "NonpositivePriceError",
    "NoTicksInSessionError",
    "load_ticks",
    "write_ticks",
    "build_grids",
    "read_config",
]

logger = logging.getLogger(__name__)

_FIXED_EXCLUSIONS = ((12, 24), (12, 25), (12, 26), (12, 31), (1, 1), (1, 2))


class ParseError(DataError):
    """A CSV row could not be parsed; carries row and column context."""


class NonpositivePriceError(ParseError):
    """Prices must be strictly positive."""


class NoTicksInSessionError(DataError):
    """A requested session window contains no ticks."""


@dataclass(frozen=True)
class TickFormat:
    """Input declaration: timestamp kind and exchange time zone."""

    timestamp_kind: str = "iso8601"  # or "epoch_ms"
    timezone: str = "America/Chicago"

    def __post_init__(self) -> None:
        if self.timestamp_kind not in ("iso8601", "epoch_ms"):
            raise ConfigError(
                f"timestamp_kind must be 'iso8601' or 'epoch_ms', got {self.timestamp_kind!r}"
            )
        try:
            ZoneInfo(self.timezone)
        except Exception as exc:
            raise ConfigError(f"unknown time zone {self.timezone!r}") from exc


@dataclass(frozen=True)
class TickSeries:
    """Timestamped prices for one instrument, strictly increasing in time.

    ``times`` are epoch milliseconds (UTC); ``tz`` names the exchange zone
    used for session arithmetic.
    """

    instrument: str
    times: np.ndarray = field(repr=False)
    prices: np.ndarray = field(repr=False)
    tz: str = "America/Chicago"

    def __len__(self) -> int:
        return self.times.size


def _parse_timestamp(raw: str, fmt: TickFormat, row: int) -> int:
    if fmt.timestamp_kind == "epoch_ms":
        try:
            return int(raw)
        except ValueError as exc:
            raise ParseError(
                f"row {row}, column 'timestamp': {raw!r} is not epoch milliseconds"
            ) from exc
    try:
        dt = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ParseError(
            f"row {row}, column 'timestamp': {raw!r} is not ISO-8601"
        ) from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=ZoneInfo(fmt.timezone))
    return int(dt.timestamp() * 1000)


def load_ticks(path, fmt: TickFormat | None = None, instrument: str = "") -> TickSeries:
    """Load, sort, and de-duplicate a tick CSV.

    Rows sharing a timestamp collapse to the arithmetic mean of their
    prices.  Raises ``ParseError`` (with row context) on malformed rows and
    ``NonpositivePriceError`` on prices <= 0.  An empty file yields an
    empty, valid series.
    """
    fmt = fmt or TickFormat()
    times: list[int] = []
    prices: list[float] = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        for row_num, row in enumerate(reader, start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if row_num == 1 and not _looks_like_data(row):
                continue  # header line
            if len(row) < 2:
                raise ParseError(f"row {row_num}: expected 'timestamp,price', got {row!r}")
            stamp = _parse_timestamp(row[0].strip(), fmt, row_num)
            try:
                price = float(row[1])
            except ValueError as exc:
                raise ParseError(
                    f"row {row_num}, column 'price': {row[1]!r} is not a number"
                ) from exc
            if price <= 0.0:
                raise NonpositivePriceError(
                    f"row {row_num}: nonpositive price {price}"
                )
            times.append(stamp)
            prices.append(price)

    t = np.asarray(times, dtype=np.int64)
    p = np.asarray(prices, dtype=float)
    order = np.argsort(t, kind="stable")
    t, p = t[order], p[order]
    uniq, inverse, counts = np.unique(t, return_inverse=True, return_counts=True)
    summed = np.zeros(uniq.size)
    np.add.at(summed, inverse, p)
    return TickSeries(
        instrument=instrument, times=uniq, prices=summed / counts, tz=fmt.timezone
    )


def _looks_like_data(row: list[str]) -> bool:
    try:
        float(row[1])
    except (ValueError, IndexError):
        return False
    return True


def write_ticks(ts: TickSeries, path) -> None:
    """Serialize a tick series as epoch-millisecond CSV (load round-trips)."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["timestamp", "price"])
        for t, p in zip(ts.times, ts.prices):
            writer.writerow([int(t), format(p, ".17g")])


@dataclass(frozen=True)
class SessionCalendar:
    """Session windows and exclusion rules on the exchange clock.

    A session labelled with date D opens at ``open_hour`` on the previous
    calendar day and closes at ``close_hour`` on D.  Saturdays, Sundays,
    listed holidays, December 24-26, and December 31 - January 2 are
    excluded.
    """

    tz: str = "America/Chicago"
    open_hour: int = 17
    close_hour: int = 16
    holidays: frozenset = frozenset()

    def is_excluded(self, day: date) -> bool:
        if day.weekday() >= 5:
            return True
        if (day.month, day.day) in _FIXED_EXCLUSIONS:
            return True
        return day in self.holidays

    def session_window(self, day: date) -> tuple[int, int]:
        """Epoch-millisecond (open, close) of the session labelled ``day``."""
        zone = ZoneInfo(self.tz)
        opens = datetime.combine(day - timedelta(days=1), time(self.open_hour), zone)
        closes = datetime.combine(day, time(self.close_hour), zone)
        return int(opens.timestamp() * 1000), int(closes.timestamp() * 1000)

    def sessions_between(self, first: date, last: date) -> list[date]:
        out = []
        day = first
        while day <= last:
            if not self.is_excluded(day):
                out.append(day)
            day += timedelta(days=1)
        return out


def build_grids(
    ts: TickSeries,
    calendar: SessionCalendar | None = None,
    interval: float = 300.0,
    min_ticks: int = 10,
) -> list[ReturnGrid]:
    """Previous-tick sampled return grids, one per retained session.

    Sessions with fewer than ``min_ticks`` ticks are dropped and logged.
    ``interval`` must divide the session length.
    """
    calendar = calendar or SessionCalendar(tz=ts.tz)
    if len(ts) == 0:
        return []
    zone = ZoneInfo(calendar.tz)
    first = datetime.fromtimestamp(ts.times[0] / 1000, tz=timezone.utc).astimezone(zone)
    last = datetime.fromtimestamp(ts.times[-1] / 1000, tz=timezone.utc).astimezone(zone)
    grids = []
    for day in calendar.sessions_between(first.date(), last.date() + timedelta(days=1)):
        opens, closes = calendar.session_window(day)
        lo, hi = np.searchsorted(ts.times, [opens, closes], side="left")
        count = int(hi - lo)
        if count == 0:
            continue
        if count < min_ticks:
            logger.info("dropping session %s: below-min-ticks (%d < %d)",
                        day.isoformat(), count, min_ticks)
            continue
        session_ms = closes - opens
        step_ms = int(round(interval * 1000))
        if session_ms % step_ms:
            raise ConfigError(
                f"interval {interval}s does not divide the {session_ms / 1000:.0f}s session"
            )
        grid_times = np.arange(opens, closes + step_ms, step_ms, dtype=np.int64)
        idx = np.searchsorted(ts.times, grid_times, side="right") - 1
        idx = np.clip(idx, lo, hi - 1)  # flat start before the first tick
        sampled = ts.prices[idx]
        grids.append(
            ReturnGrid(
                day=day.isoformat(),
                log_returns=np.diff(np.log(sampled)),
                sampling_interval=interval,
                n_ticks_underlying=count,
            )
        )
    if not grids:
        raise NoTicksInSessionError("no session produced a usable grid")
    return grids


def read_config(path) -> dict:
    """Read a flat ``key = value`` configuration file.

    Lines starting with '#' are comments.  Values are coerced to int,
    float, or bool where possible; comma-separated values become lists.
    """
    out: dict = {}
    try:
        handle = open(path)
    except OSError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    with handle:
        for line_num, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{line_num}: expected 'key = value'")
            key, _, raw = text.partition("=")
            out[key.strip()] = _coerce(raw.strip())
    return out


def _coerce(raw: str):
    if "," in raw:
        return [_coerce(part.strip()) for part in raw.split(",") if part.strip()]
    lowered = raw.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            continue
    return raw
