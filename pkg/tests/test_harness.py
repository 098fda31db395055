import json
import math
from pathlib import Path

import numpy as np
import pytest

import pulsecam as pc
from pulsecam import cli
from pulsecam.harness import _check_finite, build_strategy

SCENARIO = """\
name: tiny
duration: 16
grid: 8 8
roi: 2 6 2 6
seed: 3
base_level: 100
pulse_amplitude: 0.04
hr: constant 72
"""

CONFIG = {
    "scenarios": ["tiny.scn"],
    "strategies": [
        {"kind": "fixed", "exposure_ms": 8.0, "name": "fixed-short"},
        {"kind": "adaptive_triplet", "name": "adaptive"},
    ],
    "sensor": {"responsivity": 0.2, "read_noise_sigma": 0.5},
    "pipeline": {"window_s": 10.0, "hop_s": 5.0},
    "seeds": [3],
    "output_dir": "out",
}


@pytest.fixture
def config_dir(tmp_path):
    (tmp_path / "tiny.scn").write_text(SCENARIO)
    (tmp_path / "config.json").write_text(json.dumps(CONFIG))
    return tmp_path


def _run(config_dir, out_name="out"):
    config = pc.load_experiment_config(config_dir / "config.json", str(config_dir / out_name))
    return config, pc.run_experiment(config)


class TestRunExperiment:
    def test_summary_shape_and_files(self, config_dir):
        config, summary = _run(config_dir)
        assert len(summary["cells"]) == 2
        for row in summary["cells"]:
            assert math.isfinite(row["mae_bpm"])
            assert math.isfinite(row["snr_db"])
            assert 0.0 <= row["success_rate_pct"] <= 100.0
        # strategy cells for the same scenario share duration and window count
        assert len({(r["duration_s"], r["windows"]) for r in summary["cells"]}) == 1
        out = config.output_dir
        assert (out / "summary.json").exists()
        cell = out / "cells" / "tiny__adaptive__seed3"
        for name in ("frames.csv", "pulse.csv", "windows.csv", "report.json", "cycles.csv"):
            assert (cell / name).exists()
        # fixed cells carry no cycle log
        assert not (out / "cells" / "tiny__fixed-short__seed3" / "cycles.csv").exists()

    def test_deterministic_bytes(self, config_dir):
        config1, _ = _run(config_dir, "out1")
        config2, _ = _run(config_dir, "out2")
        s1 = (config1.output_dir / "summary.json").read_bytes()
        s2 = (config2.output_dir / "summary.json").read_bytes()
        assert s1 == s2
        f1 = (config1.output_dir / "cells" / "tiny__adaptive__seed3" / "pulse.csv").read_bytes()
        f2 = (config2.output_dir / "cells" / "tiny__adaptive__seed3" / "pulse.csv").read_bytes()
        assert f1 == f2

    def test_frame_csv_rows_match_stream_length(self, config_dir):
        config, _ = _run(config_dir)
        frames_csv = (config.output_dir / "cells" / "tiny__fixed-short__seed3" / "frames.csv")
        rows = frames_csv.read_text().strip().splitlines()
        assert len(rows) - 1 == int(16 * 15)

    def test_nan_metric_is_invariant_breach(self):
        with pytest.raises(pc.InvariantBreach):
            _check_finite({"scenario": "s", "strategy": "x", "mae_bpm": float("nan"),
                           "success_rate_pct": 1.0, "snr_db": 0.0})


class TestConfigHandling:
    def test_missing_scenario_is_config_error(self, tmp_path):
        (tmp_path / "config.json").write_text(json.dumps(dict(CONFIG, scenarios=["ghost.scn"])))
        with pytest.raises(pc.ScenarioFormatError):
            pc.load_experiment_config(tmp_path / "config.json")

    def test_no_strategies_rejected(self, tmp_path):
        (tmp_path / "tiny.scn").write_text(SCENARIO)
        (tmp_path / "config.json").write_text(json.dumps(dict(CONFIG, strategies=[])))
        with pytest.raises(pc.ConfigError):
            pc.load_experiment_config(tmp_path / "config.json")

    def test_unknown_strategy_kind_rejected(self):
        with pytest.raises(pc.ConfigError):
            build_strategy({"kind": "psychic"})

    def test_strategy_filter(self, config_dir):
        config = pc.load_experiment_config(config_dir / "config.json", strategy_filter="adaptive")
        assert [s.name for s in config.strategies] == ["adaptive"]

    def test_adaptive_strategy_accepts_flat_controller_keys(self):
        strat = build_strategy({
            "kind": "adaptive_triplet",
            "bracket_low_range": [0.5, 8.0],
            "bracket_high_range": [1.5, 16.0],
        })
        assert strat.controller.bracket_low_range == (0.5, 8.0)

    def test_bad_json_reports_position(self, tmp_path):
        (tmp_path / "config.json").write_text("{broken")
        with pytest.raises(pc.ConfigError) as err:
            pc.load_experiment_config(tmp_path / "config.json")
        assert "invalid JSON" in str(err.value)


class TestPlotData:
    def test_cdf_files_are_monotone(self, config_dir):
        config, _ = _run(config_dir)
        written = pc.emit_plot_data(config.output_dir, "cdf")
        assert len(written) == 3
        for path in written:
            rows = path.read_text().strip().splitlines()[1:]
            ps = [float(r.split(",")[1]) for r in rows]
            assert all(0.0 < p <= 1.0 for p in ps)

    def test_timeseries_row_count_matches_frames(self, config_dir):
        config, _ = _run(config_dir)
        written = pc.emit_plot_data(config.output_dir, "timeseries")
        ts = next(p for p in written if "fixed-short" in p.name)
        rows = ts.read_text().strip().splitlines()
        assert len(rows) - 1 == int(16 * 15)

    def test_spectrogram_has_ridge_at_pulse_rate(self, config_dir):
        config, _ = _run(config_dir)
        written = pc.emit_plot_data(config.output_dir, "spectrogram")
        spect = next(p for p in written if "adaptive" in p.name)
        rows = [r.split(",") for r in spect.read_text().strip().splitlines()[1:]]
        by_window: dict[str, list[tuple[float, float]]] = {}
        for t, f, m in rows:
            by_window.setdefault(t, []).append((float(f), float(m)))
        for t, pts in by_window.items():
            peak_f = max(pts, key=lambda p: p[1])[0]
            assert abs(peak_f - 1.2) < 0.15, f"window {t} peaks at {peak_f}"

    def test_unknown_kind_rejected(self, config_dir):
        config, _ = _run(config_dir)
        with pytest.raises(pc.ConfigError):
            pc.emit_plot_data(config.output_dir, "pie-chart")


class TestCli:
    def test_validate_ok(self, config_dir, capsys):
        rc = cli.main(["validate-config", "--config", str(config_dir / "config.json")])
        assert rc == 0
        assert "ok:" in capsys.readouterr().out

    def test_validate_bad_config_exit_1(self, tmp_path, capsys):
        (tmp_path / "config.json").write_text("{}")
        rc = cli.main(["validate-config", "--config", str(tmp_path / "config.json")])
        assert rc == 1

    def test_run_end_to_end(self, config_dir, capsys):
        rc = cli.main([
            "run", "--config", str(config_dir / "config.json"),
            "--out", str(config_dir / "cli-out"),
        ])
        assert rc == 0
        assert (config_dir / "cli-out" / "summary.json").exists()

    def test_plot_data_cli(self, config_dir):
        cli.main(["run", "--config", str(config_dir / "config.json"),
                  "--out", str(config_dir / "cli-out")])
        rc = cli.main(["plot-data", "--report", str(config_dir / "cli-out"), "--kind", "cdf"])
        assert rc == 0
        assert (config_dir / "cli-out" / "plots" / "cdf_mae_bpm.csv").exists()

    def test_unknown_demo_case_exit_1(self, tmp_path):
        rc = cli.main(["demo", "--out", str(tmp_path / "d"), "--case", "nope"])
        assert rc == 1
