"""CLI tests: subcommands, exit codes, manifests, reproducibility."""

import csv
import json
from pathlib import Path

import pytest

from wavevol.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main


def read_rows(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def run(argv):
    return main(argv)


def dir_bytes(path: Path, skip=("manifest.json",)):
    out = {}
    for p in sorted(path.iterdir()):
        if p.name in skip:
            continue
        out[p.name] = p.read_bytes()
    return out


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    cfg = out / "sim.cfg"
    cfg.write_text("model = heston_jd\nn_steps = 23400\nnoise_sd = 0.0005\n"
                   "jump_count = 1\nseed = 77\n")
    assert run(["simulate", "--config", str(cfg), "--paths", "1",
                "--out", str(out / "run")]) == EXIT_OK
    return out / "run"


class TestSimulate:
    def test_price_rows_and_manifest(self, sim_dir):
        rows = read_rows(sim_dir / "path000.csv")
        assert len(rows) == 23401  # n + 1 prices
        manifest = json.loads((sim_dir / "manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert manifest["config"]["simulate"]["seed"] == 77
        meta = json.loads((sim_dir / "path000.json").read_text())
        assert len(meta["jumps"]) == 1
        assert meta["true_iv"][0] > 0

    def test_same_seed_byte_identical(self, tmp_path):
        cfg = tmp_path / "sim.cfg"
        cfg.write_text("model = heston_jd\nn_steps = 512\nseed = 5\n")
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(["simulate", "--config", str(cfg), "--out", str(a)]) == EXIT_OK
        assert run(["simulate", "--config", str(cfg), "--out", str(b)]) == EXIT_OK
        assert dir_bytes(a) == dir_bytes(b)

    def test_invalid_hurst_is_usage_error(self, tmp_path):
        cfg = tmp_path / "sim.cfg"
        cfg.write_text("model = fractional_sv\nhurst = 1.2\n")
        assert run(["simulate", "--config", str(cfg),
                    "--out", str(tmp_path / "x")]) == EXIT_USAGE

    def test_missing_config_file(self, tmp_path):
        assert run(["simulate", "--config", str(tmp_path / "nope.cfg"),
                    "--out", str(tmp_path / "x")]) == EXIT_USAGE


class TestEstimate:
    def test_from_simulated_path(self, sim_dir, tmp_path):
        out = tmp_path / "est"
        assert run(["estimate", "--sim", str(sim_dir), "--out", str(out)]) == EXIT_OK
        rows = read_rows(out / "estimates.csv")
        by_est = {r["estimator"]: r for r in rows}
        assert set(by_est) == {"RV", "BV", "TSRV", "RK", "JWTSRV"}
        jw = by_est["JWTSRV"]
        assert float(jw["jump_variation"]) > 0
        # RV - JWTSRV picks up the removed jump variation plus noise bias
        gap = float(by_est["RV"]["value"]) - float(jw["value"])
        noise_bias = 2 * 78 * 0.0005**2
        expected = float(jw["jump_variation"]) + noise_bias
        assert gap == pytest.approx(expected, rel=0.5)
        assert (out / "estimates.svg").exists()
        assert (out / "jumps.csv").exists()
        moments = read_rows(out / "standardized_moments.csv")
        assert {m["estimator"] for m in moments} == set(by_est)

    def test_tick_pipeline_and_decompose(self, gbp_ticks_path, tmp_path):
        est_out = tmp_path / "est"
        assert run([
            "estimate", "--ticks", str(gbp_ticks_path),
            "--estimators", "RV,JWTSRV", "--out", str(est_out),
        ]) == EXIT_OK
        rows = read_rows(est_out / "estimates.csv")
        days = sorted({r["day"] for r in rows})
        assert len(days) == 5
        jumps = read_rows(est_out / "jumps.csv")
        assert any(r["day"] == "2007-01-09" for r in jumps)

        dec_out = tmp_path / "dec"
        assert run(["decompose", "--estimates", str(est_out / "estimates.csv"),
                    "--out", str(dec_out)]) == EXIT_OK
        hrows = read_rows(dec_out / "horizons.csv")
        assert {r["horizon"] for r in hrows} == {
            "5m-10m", "10m-20m", "20m-40m", "40m-80m", "80m-1d",
        }
        # components sum exactly to the JWTSRV values they came from
        jw = {r["day"]: float(r["value"]) for r in rows if r["estimator"] == "JWTSRV"}
        for day in days:
            total = sum(float(r["variance"]) for r in hrows if r["day"] == day)
            assert total == pytest.approx(jw[day], rel=1e-12)
        assert (dec_out / "horizons.svg").exists()

    def test_constant_price_day_all_zero(self, tmp_path):
        # a full flat session: one tick per 5 minutes, all at the same price
        ticks = tmp_path / "flat.csv"
        lines = ["timestamp,price"]
        from datetime import datetime, timedelta
        from zoneinfo import ZoneInfo

        start = datetime(2007, 1, 4, 17, 0, tzinfo=ZoneInfo("America/Chicago"))
        for k in range(276):
            stamp = (start + timedelta(minutes=5 * k)).isoformat()
            lines.append(f"{stamp},2.0")
        ticks.write_text("\n".join(lines) + "\n")
        out = tmp_path / "est"
        assert run(["estimate", "--ticks", str(ticks), "--fast-interval", "300",
                    "--estimators", "RV,BV,JWTSRV", "--out", str(out)]) == EXIT_OK
        rows = read_rows(out / "estimates.csv")
        assert rows and all(float(r["value"]) == 0.0 for r in rows)

    def test_wrv_tag_supported(self, sim_dir, tmp_path):
        out = tmp_path / "est"
        assert run(["estimate", "--sim", str(sim_dir), "--estimators", "WRV,RV",
                    "--out", str(out)]) == EXIT_OK
        rows = read_rows(out / "estimates.csv")
        by_est = {r["estimator"]: r for r in rows}
        # WRV equals RV and carries the per-scale split
        assert float(by_est["WRV"]["value"]) == pytest.approx(
            float(by_est["RV"]["value"]), rel=1e-10
        )
        assert by_est["WRV"]["scale_1"] != ""

    def test_unknown_estimator_usage_error(self, sim_dir, tmp_path):
        assert run(["estimate", "--sim", str(sim_dir), "--estimators", "RV,MAGIC",
                    "--out", str(tmp_path / "x")]) == EXIT_USAGE

    def test_missing_sim_dir_is_data_error(self, tmp_path):
        assert run(["estimate", "--sim", str(tmp_path / "empty"),
                    "--out", str(tmp_path / "x")]) == EXIT_DATA

    def test_rerun_byte_identical(self, sim_dir, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run(["estimate", "--sim", str(sim_dir), "--out", str(out)]) == EXIT_OK
        assert dir_bytes(a) == dir_bytes(b)


class TestStudy:
    def test_bias_study_16_cells(self, tmp_path):
        cfg = tmp_path / "study.cfg"
        cfg.write_text(
            "model = heston_jd\nn_steps = 1170\npaths = 50\nseed = 9\n"
            "noise_grid = 0, 0.0005, 0.001, 0.0015\njump_grid = 0, 1, 2, 3\n"
        )
        out = tmp_path / "bias"
        assert run(["study", "bias", "--config", str(cfg),
                    "--estimators", "RV,TSRV", "--out", str(out)]) == EXIT_OK
        rows = read_rows(out / "bias_table.csv")
        assert len(rows) == 16
        text = (out / "bias_table.txt").read_text()
        assert "Bias (variance in parenthesis)" in text
        assert (out / "bias_table.svg").exists()

    def test_forecast_study_blocks(self, tmp_path):
        cfg = tmp_path / "study.cfg"
        cfg.write_text(
            "model = heston_jd\nn_steps = 1170\npaths = 30\ndays = 40\nseed = 10\n"
            "noise_sd = 0.0005\njump_intensity = 1\n"
        )
        out = tmp_path / "fc"
        assert run(["study", "forecast", "--config", str(cfg),
                    "--estimators", "RV,TSRV", "--out", str(out)]) == EXIT_OK
        text = (out / "forecast_eval.txt").read_text()
        assert "Individual regressions" in text
        assert "Joint regression" in text
        rows = read_rows(out / "forecast_eval.csv")
        blocks = {r["block"] for r in rows}
        assert blocks == {"individual", "joint", "ar1"}

    def test_estimators_from_config_list(self, tmp_path):
        cfg = tmp_path / "study.cfg"
        cfg.write_text(
            "model = heston_jd\nn_steps = 1170\npaths = 50\nseed = 11\n"
            "noise_grid = 0\njump_grid = 0\nestimators = RV, TSRV\n"
        )
        out = tmp_path / "bias"
        assert run(["study", "bias", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        rows = read_rows(out / "bias_table.csv")
        assert "bias_RV" in rows[0] and "bias_TSRV" in rows[0]

    def test_config_not_found(self, tmp_path):
        assert run(["study", "bias", "--config", str(tmp_path / "nope.cfg"),
                    "--out", str(tmp_path / "x")]) == EXIT_USAGE


class TestDecompose:
    def test_horizon_label_mismatch_is_usage_error(self, sim_dir, tmp_path):
        est_out = tmp_path / "est"
        assert run(["estimate", "--sim", str(sim_dir), "--estimators", "JWTSRV",
                    "--out", str(est_out)]) == EXIT_OK
        assert run(["decompose", "--estimates", str(est_out / "estimates.csv"),
                    "--horizons", "a,b", "--out", str(tmp_path / "x")]) == EXIT_USAGE

    def test_missing_per_scale_is_data_error(self, sim_dir, tmp_path):
        est_out = tmp_path / "est"
        assert run(["estimate", "--sim", str(sim_dir), "--estimators", "RV",
                    "--out", str(est_out)]) == EXIT_OK
        assert run(["decompose", "--estimates", str(est_out / "estimates.csv"),
                    "--estimator", "RV", "--out", str(tmp_path / "x")]) == EXIT_DATA

    def test_single_day_sums_to_total(self, sim_dir, tmp_path):
        est_out = tmp_path / "est"
        run(["estimate", "--sim", str(sim_dir), "--estimators", "JWTSRV",
             "--out", str(est_out)])
        dec_out = tmp_path / "dec"
        assert run(["decompose", "--estimates", str(est_out / "estimates.csv"),
                    "--out", str(dec_out)]) == EXIT_OK
        rows = read_rows(dec_out / "horizons.csv")
        assert len(rows) == 5
        est_rows = read_rows(est_out / "estimates.csv")
        total = float(est_rows[0]["value"])
        assert sum(float(r["variance"]) for r in rows) == pytest.approx(total, rel=1e-12)


def test_usage_error_on_no_command():
    assert run([]) == EXIT_USAGE
