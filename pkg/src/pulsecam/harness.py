"""Experiment harness: run scenario x strategy x seed grids and write reports.

Every cell runs one strategy over one scenario with one noise seed, pushes the
resulting 15 Hz stream through the pulse pipeline, scores it against the known
heart-rate profile, and leaves CSV/JSON artefacts behind. All writes are atomic
(temp file plus rename) and all content is deterministic for a fixed config, so
repeated runs produce byte-identical reports.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .controller import ControllerConfig
from .fusion import FusionConfig
from .metrics import MetricsReport, cdf_points, evaluate
from .rppg import HRSeries, PipelineConfig, run_pipeline
from .scenario_io import ScenarioFormatError, load_scenario
from .scene import ScenarioSpec, ground_truth_hr
from .sensor import SensorConfig
from .strategies import (
    AdaptiveTriplet,
    AdaptiveTripletMerf,
    AutoFullFrame,
    ExposureStrategy,
    FixedExposure,
    StrategyRun,
    run_strategy,
)


class ConfigError(ValueError):
    """Bad experiment configuration file."""


class InvariantBreach(RuntimeError):
    """A metric came out non-finite; the simulation promised that cannot happen."""


FRAME_COLUMNS = ("t", "strategy", "exposure_ms", "mu_roi", "mu_fullframe", "saturated_patch_count")
CYCLE_COLUMNS = ("cycle_index", "t", "T_l", "I_l", "T_h", "I_h", "k", "b", "T_opt", "mu_opt", "flags")


@dataclass
class ExperimentConfig:
    scenarios: list[ScenarioSpec]
    strategies: list[ExposureStrategy]
    sensor: SensorConfig
    pipeline: PipelineConfig
    seeds: list[int]
    output_dir: Path
    tolerance_bpm: float = 5.0
    workers: int = 1


@dataclass
class CellResult:
    scenario: str
    strategy: str
    seed: int
    duration_s: float
    report: MetricsReport
    run: StrategyRun
    ref: HRSeries
    hr: HRSeries
    wave_samples: np.ndarray
    wave_times: np.ndarray


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.9g}"
    return str(value)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_csv(path: Path, columns: tuple[str, ...], rows: list[dict]) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(c, "")) for c in columns))
    _atomic_write(path, "\n".join(lines) + "\n")


def _build_sensor(raw: dict) -> SensorConfig:
    try:
        if "responsivity" in raw and isinstance(raw["responsivity"], list):
            raw = dict(raw, responsivity=tuple(raw["responsivity"]))
        return SensorConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad sensor config: {exc}") from exc


def _build_controller(raw: dict) -> ControllerConfig:
    raw = dict(raw)
    for key in ("bracket_low_range", "bracket_high_range"):
        if key in raw:
            raw[key] = tuple(raw[key])
    try:
        return ControllerConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad controller config: {exc}") from exc


def build_strategy(raw: dict) -> ExposureStrategy:
    raw = dict(raw)
    kind = raw.pop("kind", None)
    try:
        if kind == "fixed":
            return FixedExposure(**raw)
        if kind == "auto_fullframe":
            return AutoFullFrame(**raw)
        if kind in ("adaptive_triplet", "adaptive_triplet_merf"):
            name = raw.pop("name", "")
            fusion_raw = raw.pop("fusion", {})
            controller = _build_controller(raw.pop("controller", raw))
            if kind == "adaptive_triplet":
                return AdaptiveTriplet(controller, name=name or "adaptive")
            fusion = FusionConfig(**fusion_raw)
            return AdaptiveTripletMerf(controller, fusion, name=name or "adaptive-merf")
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad strategy config ({kind}): {exc}") from exc
    raise ConfigError(f"unknown strategy kind {kind!r}")


def load_experiment_config(
    path: str | Path,
    out_override: str | None = None,
    seed_override: int | None = None,
    strategy_filter: str | None = None,
) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc

    scenario_paths = raw.get("scenarios", [])
    if not scenario_paths:
        raise ConfigError("config needs at least one scenario")
    scenarios = []
    for sp in scenario_paths:
        sp = Path(sp)
        if not sp.is_absolute():
            sp = path.parent / sp
        scenarios.append(load_scenario(sp))

    strategy_raw = raw.get("strategies", [])
    if not strategy_raw:
        raise ConfigError("config needs at least one strategy")
    strategies = [build_strategy(s) for s in strategy_raw]
    if strategy_filter:
        strategies = [s for s in strategies if s.name == strategy_filter]
        if not strategies:
            raise ConfigError(f"no strategy named {strategy_filter!r} in config")

    sensor = _build_sensor(raw.get("sensor", {}))
    try:
        pipeline = PipelineConfig(**{
            k: (tuple(v) if k == "band" else v) for k, v in raw.get("pipeline", {}).items()
        })
    except TypeError as exc:
        raise ConfigError(f"bad pipeline config: {exc}") from exc

    seeds = [seed_override] if seed_override is not None else raw.get("seeds", [0])
    out = Path(out_override) if out_override else Path(raw.get("output_dir", "out"))
    return ExperimentConfig(
        scenarios=scenarios,
        strategies=strategies,
        sensor=sensor,
        pipeline=pipeline,
        seeds=[int(s) for s in seeds],
        output_dir=out,
        tolerance_bpm=float(raw.get("tolerance_bpm", 5.0)),
        workers=int(raw.get("workers", 1)),
    )


def run_cell(
    spec: ScenarioSpec,
    strategy: ExposureStrategy,
    sensor: SensorConfig,
    pipeline: PipelineConfig,
    seed: int,
    tolerance_bpm: float = 5.0,
) -> CellResult:
    """Simulate, extract, and score one scenario/strategy/seed combination."""
    spec = replace(spec, noise_seed=seed)
    run = run_strategy(strategy, spec, sensor)
    result = run_pipeline(run.frames, spec.roi, pipeline)
    ref = HRSeries(result.hr.times, np.array([ground_truth_hr(spec, t) for t in result.hr.times]))
    report = evaluate(result.hr, ref, result.wave, tolerance_bpm)
    return CellResult(
        scenario=spec.name,
        strategy=run.strategy_name,
        seed=seed,
        duration_s=spec.duration,
        report=report,
        run=run,
        ref=ref,
        hr=result.hr,
        wave_samples=result.wave.samples,
        wave_times=result.wave.timestamps,
    )


def _cell_dir_name(scenario: str, strategy: str, seed: int) -> str:
    return f"{scenario}__{strategy}__seed{seed}"


def _write_cell(out_dir: Path, cell: CellResult) -> dict:
    cell_dir = out_dir / "cells" / _cell_dir_name(cell.scenario, cell.strategy, cell.seed)
    cell_dir.mkdir(parents=True, exist_ok=True)

    write_csv(cell_dir / "frames.csv", FRAME_COLUMNS, cell.run.log_rows)
    if cell.run.cycles is not None:
        write_csv(cell_dir / "cycles.csv", CYCLE_COLUMNS, [c.log_row() for c in cell.run.cycles])

    pulse_rows = [{"t": float(t), "value": float(v)} for t, v in zip(cell.wave_times, cell.wave_samples)]
    write_csv(cell_dir / "pulse.csv", ("t", "value"), pulse_rows)

    hr_rows = [
        {"t": t, "hr_est": e, "hr_ref": r, "abs_err": a}
        for t, e, r, a in cell.report.per_window
    ]
    write_csv(cell_dir / "windows.csv", ("t", "hr_est", "hr_ref", "abs_err"), hr_rows)

    report = {
        "scenario": cell.scenario,
        "strategy": cell.strategy,
        "seed": cell.seed,
        "duration_s": cell.duration_s,
        **cell.report.to_dict(),
    }
    _atomic_write(cell_dir / "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


def _check_finite(report: dict) -> None:
    for key in ("mae_bpm", "success_rate_pct", "snr_db"):
        if not math.isfinite(report[key]):
            raise InvariantBreach(
                f"{report['scenario']}/{report['strategy']}: non-finite {key}"
            )


def _cell_task(args) -> CellResult:
    return run_cell(*args)


def run_experiment(config: ExperimentConfig) -> dict:
    """Run the full grid and write summary plus per-cell artefacts.

    Returns the summary dictionary that was written to summary.json.
    """
    config.output_dir.mkdir(parents=True, exist_ok=True)
    tasks = [
        (spec, strategy, config.sensor, config.pipeline, seed, config.tolerance_bpm)
        for spec in config.scenarios
        for strategy in config.strategies
        for seed in config.seeds
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            cells = list(pool.map(_cell_task, tasks))
    else:
        cells = [run_cell(*t) for t in tasks]

    rows = []
    for cell in cells:
        report = _write_cell(config.output_dir, cell)
        _check_finite(report)
        rows.append(report)
    rows.sort(key=lambda r: (r["scenario"], r["strategy"], r["seed"]))

    summary = {
        "cells": rows,
        "scenario_names": sorted({r["scenario"] for r in rows}),
        "strategy_names": sorted({r["strategy"] for r in rows}),
        "seeds": sorted({r["seed"] for r in rows}),
        "window_s": config.pipeline.window_s,
        "hop_s": config.pipeline.hop_s,
        "tolerance_bpm": config.tolerance_bpm,
    }
    _atomic_write(config.output_dir / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


PLOT_KINDS = ("cdf", "timeseries", "spectrogram")


def emit_plot_data(out_dir: str | Path, kind: str, dest: str | Path | None = None) -> list[Path]:
    """Derive plot-ready CSV files from a finished experiment directory."""
    out_dir = Path(out_dir)
    if kind not in PLOT_KINDS:
        raise ConfigError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
    summary_path = out_dir / "summary.json"
    if not summary_path.exists():
        raise ConfigError(f"no summary.json under {out_dir}")
    summary = json.loads(summary_path.read_text())
    dest = Path(dest) if dest else out_dir / "plots"
    dest.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if kind == "cdf":
        metric_dirs = {"mae_bpm": "cdf", "snr_db": "ccdf", "success_rate_pct": "ccdf"}
        for metric, direction in metric_dirs.items():
            values = [row[metric] for row in summary["cells"]]
            pts = cdf_points(values, direction)
            path = dest / f"{direction}_{metric}.csv"
            write_csv(path, ("x", "p"), [{"x": x, "p": p} for x, p in pts])
            written.append(path)
        return written

    for row in summary["cells"]:
        cell = _cell_dir_name(row["scenario"], row["strategy"], row["seed"])
        cell_dir = out_dir / "cells" / cell
        if kind == "timeseries":
            frames = _read_csv(cell_dir / "frames.csv")
            path = dest / f"timeseries_{cell}.csv"
            write_csv(path, ("t", "exposure_ms", "mu_roi"), frames)
            written.append(path)
        else:
            pulse = _read_csv(cell_dir / "pulse.csv")
            t = np.array([float(r["t"]) for r in pulse])
            v = np.array([float(r["value"]) for r in pulse])
            rows = _spectrogram_rows(t, v, summary["window_s"], summary["hop_s"])
            path = dest / f"spectrogram_{cell}.csv"
            write_csv(path, ("t", "f", "magnitude"), rows)
            written.append(path)
    return written


def _read_csv(path: Path) -> list[dict]:
    with path.open() as fh:
        return list(csv.DictReader(fh))


def _spectrogram_rows(t: np.ndarray, v: np.ndarray, window_s: float, hop_s: float) -> list[dict]:
    if len(t) < 2:
        raise ConfigError("pulse trace too short for a spectrogram")
    rate = 1.0 / float(np.mean(np.diff(t)))
    win = int(round(window_s * rate))
    hop = int(round(hop_s * rate))
    freqs = np.fft.rfftfreq(max(1024, win), d=1.0 / rate)
    keep = (freqs >= 0.5) & (freqs <= 4.0)
    rows = []
    for start in range(0, len(v) - win + 1, hop):
        seg = v[start : start + win]
        mag = np.abs(np.fft.rfft(seg, n=max(1024, win)))
        centre = t[start] + (win - 1) / (2.0 * rate)
        for f, m in zip(freqs[keep], mag[keep]):
            rows.append({"t": float(centre), "f": float(f), "magnitude": float(m)})
    return rows
