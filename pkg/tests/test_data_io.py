"""Tick ingestion and session-grid tests."""

from datetime import date

import numpy as np
import pytest

from wavevol.errors import ConfigError
from wavevol.data_io import (
    NonpositivePriceError,
    NoTicksInSessionError,
    ParseError,
    SessionCalendar,
    TickFormat,
    build_grids,
    load_ticks,
    read_config,
    write_ticks,
)


def write_csv(path, lines):
    path.write_text("timestamp,price\n" + "\n".join(lines) + "\n")


class TestLoadTicks:
    def test_duplicate_timestamps_collapse_to_mean(self, tmp_path):
        f = tmp_path / "t.csv"
        write_csv(f, ["1000,100", "1000,102", "2000,101"])
        ts = load_ticks(f, TickFormat(timestamp_kind="epoch_ms"))
        assert len(ts) == 2
        assert ts.prices[0] == pytest.approx(101.0)

    def test_empty_file_is_valid(self, tmp_path):
        f = tmp_path / "t.csv"
        f.write_text("")
        ts = load_ticks(f)
        assert len(ts) == 0

    def test_nonpositive_price_names_row(self, tmp_path):
        f = tmp_path / "t.csv"
        write_csv(f, ["1000,100", "2000,-1"])
        with pytest.raises(NonpositivePriceError, match="row 3"):
            load_ticks(f, TickFormat(timestamp_kind="epoch_ms"))

    def test_bad_timestamp_names_row_and_column(self, tmp_path):
        f = tmp_path / "t.csv"
        write_csv(f, ["not-a-time,100"])
        with pytest.raises(ParseError, match="row 2.*timestamp"):
            load_ticks(f)

    def test_bad_price(self, tmp_path):
        f = tmp_path / "t.csv"
        write_csv(f, ["1000,abc"])
        with pytest.raises(ParseError, match="price"):
            load_ticks(f, TickFormat(timestamp_kind="epoch_ms"))

    def test_unsorted_input_sorted(self, tmp_path):
        f = tmp_path / "t.csv"
        write_csv(f, ["3000,103", "1000,101", "2000,102"])
        ts = load_ticks(f, TickFormat(timestamp_kind="epoch_ms"))
        assert list(ts.times) == [1000, 2000, 3000]

    def test_iso_timestamps_with_offset(self, tmp_path):
        f = tmp_path / "t.csv"
        write_csv(f, ["2007-01-05T09:00:00-06:00,1.95"])
        ts = load_ticks(f)
        assert len(ts) == 1

    def test_round_trip_idempotent(self, tmp_path, gbp_ticks_path):
        ts = load_ticks(gbp_ticks_path)
        out = tmp_path / "round.csv"
        write_ticks(ts, out)
        again = load_ticks(out, TickFormat(timestamp_kind="epoch_ms"))
        assert np.array_equal(again.times, ts.times)
        np.testing.assert_allclose(again.prices, ts.prices, rtol=0, atol=0)

    def test_unknown_timestamp_kind(self):
        with pytest.raises(ConfigError):
            TickFormat(timestamp_kind="julian")


class TestSessionCalendar:
    def test_weekends_excluded(self):
        cal = SessionCalendar()
        assert cal.is_excluded(date(2007, 1, 6))  # Saturday
        assert cal.is_excluded(date(2007, 1, 7))  # Sunday
        assert not cal.is_excluded(date(2007, 1, 5))

    def test_fixed_year_end_exclusions(self):
        cal = SessionCalendar()
        for d in (date(2007, 12, 24), date(2007, 12, 26), date(2008, 1, 2),
                  date(2007, 12, 31)):
            assert cal.is_excluded(d)

    def test_holiday_list(self):
        cal = SessionCalendar(holidays=frozenset({date(2007, 7, 4)}))
        assert cal.is_excluded(date(2007, 7, 4))

    def test_session_window_23_hours(self):
        cal = SessionCalendar()
        opens, closes = cal.session_window(date(2007, 1, 5))
        assert closes - opens == 23 * 3600 * 1000

    def test_no_overlap_between_consecutive_sessions(self):
        cal = SessionCalendar()
        _, close_thu = cal.session_window(date(2007, 1, 4))
        open_fri, _ = cal.session_window(date(2007, 1, 5))
        assert open_fri >= close_thu


class TestBuildGrids:
    def test_gbp_fixture_has_276_five_minute_returns(self, gbp_ticks_path):
        ts = load_ticks(gbp_ticks_path)
        grids = build_grids(ts, interval=300.0)
        assert [g.day for g in grids] == [
            "2007-01-05", "2007-01-08", "2007-01-09", "2007-01-10", "2007-01-11",
        ]
        for g in grids:
            assert g.log_returns.size == 276  # 23 h / 5 min

    def test_fixture_daily_sd_resembles_gbp(self, gbp_ticks_path):
        ts = load_ticks(gbp_ticks_path)
        grids = build_grids(ts, interval=300.0)
        daily = np.array([g.log_returns.sum() for g in grids])
        assert 0.003 < np.std(daily, ddof=1) < 0.03

    def test_sparse_sessions_dropped(self, tmp_path):
        f = tmp_path / "t.csv"
        write_csv(f, ["2007-01-05T09:00:00-06:00,1.95"])
        ts = load_ticks(f)
        with pytest.raises(NoTicksInSessionError):
            build_grids(ts, interval=300.0, min_ticks=10)

    def test_on_grid_ticks_sampled_identically(self, tmp_path):
        # ticks exactly on grid points: sampled prices equal tick prices
        lines = []
        base = "2007-01-0{d}T{h:02d}:{m:02d}:00-06:00"
        prices = []
        k = 0
        for h, m in [(h, m) for h in range(17, 24) for m in (0, 5, 10)]:
            p = 1.9 + 0.001 * k
            lines.append(f"2007-01-04T{h:02d}:{m:02d}:00-06:00,{p}")
            prices.append(p)
            k += 1
        f = tmp_path / "t.csv"
        write_csv(f, lines)
        ts = load_ticks(f)
        grids = build_grids(ts, interval=300.0, min_ticks=2)
        g = grids[0]
        # first grid points align with the ticks at 17:00, 17:05, ...
        sampled = np.exp(np.concatenate([[0.0], np.cumsum(g.log_returns)]))
        expect = np.asarray(prices) / prices[0]
        got = sampled[: len(prices)] / sampled[0]
        # ticks at :00, :05, :10 of each hour; grid points between them
        # re-sample the previous tick
        np.testing.assert_allclose(got[:3], expect[:3], rtol=1e-12)

    def test_previous_tick_never_looks_ahead(self, tmp_path):
        # a lone early tick then a late tick: grid points between them hold
        # the early price
        f = tmp_path / "t.csv"
        write_csv(
            f,
            ["2007-01-04T17:00:00-06:00,2.0"]
            + [f"2007-01-04T{h}:00:00-06:00,2.1" for h in (21, 22, 23)]
            + [f"2007-01-05T{h:02d}:00:00-06:00,2.2" for h in range(9, 16)],
        )
        ts = load_ticks(f)
        grids = build_grids(ts, interval=300.0, min_ticks=2)
        sampled = 2.0 * np.exp(np.concatenate([[0.0], np.cumsum(grids[0].log_returns)]))
        # grid points in (17:00, 21:00) stay at 2.0
        assert np.allclose(sampled[1:48], 2.0, rtol=1e-9)

    def test_interval_must_divide_session(self, gbp_ticks_path):
        ts = load_ticks(gbp_ticks_path)
        with pytest.raises(ConfigError):
            build_grids(ts, interval=7.0)


class TestReadConfig:
    def test_basic_types(self, tmp_path):
        f = tmp_path / "c.cfg"
        f.write_text(
            "# comment\nmodel = heston_jd\npaths = 100\nnoise_sd = 0.0015\n"
            "flag = true\nnoise_grid = 0, 0.0005, 0.001\n"
        )
        cfg = read_config(f)
        assert cfg["model"] == "heston_jd"
        assert cfg["paths"] == 100
        assert cfg["noise_sd"] == 0.0015
        assert cfg["flag"] is True
        assert cfg["noise_grid"] == [0, 0.0005, 0.001]

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            read_config(tmp_path / "nope.cfg")

    def test_malformed_line(self, tmp_path):
        f = tmp_path / "c.cfg"
        f.write_text("just a line\n")
        with pytest.raises(ConfigError, match="key = value"):
            read_config(f)
