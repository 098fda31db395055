"""Exposure strategies for the four-way comparison.

Every strategy produces a 15 Hz frame stream over the scenario plus a per-frame
log. The fixed strategies hold one exposure; the auto strategy emulates a
full-frame mid-grey auto-exposure loop on a single-stream camera (whose 15 fps
cadence allows exposures up to 1000/15 ms); the adaptive strategies run the
triplet cycle at 45 fps and emit the third (optionally fused) frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .controller import ControllerConfig, ControllerState, TripletCycle, run_cycle
from .fusion import FusionConfig, fuse
from .scene import ScenarioSpec
from .sensor import (
    Frame,
    SensorConfig,
    capture,
    full_frame_mean,
    roi_mean,
    saturated_patch_count,
)

OUTPUT_RATE = 15.0
AUTO_T_MAX = 1000.0 / 15.0  # single-stream camera slot at 15 fps


@dataclass
class FixedExposure:
    exposure_ms: float
    name: str = ""

    def __post_init__(self):
        if not self.name:
            self.name = f"fixed-{self.exposure_ms:g}ms"


@dataclass
class AutoFullFrame:
    target: float = 128.0
    step_gain: float = 0.3
    initial_ms: float = 8.0
    name: str = "auto"


@dataclass
class AdaptiveTriplet:
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    name: str = "adaptive"


@dataclass
class AdaptiveTripletMerf:
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    name: str = "adaptive-merf"


ExposureStrategy = FixedExposure | AutoFullFrame | AdaptiveTriplet | AdaptiveTripletMerf


@dataclass
class StrategyRun:
    strategy_name: str
    frames: list[Frame]
    log_rows: list[dict]
    cycles: list[TripletCycle] | None = None


def next_exposure_auto(
    prev_ms: float,
    fullframe_mean: float,
    target: float = 128.0,
    step_gain: float = 0.3,
    t_min: float = 0.1,
    t_max: float = AUTO_T_MAX,
) -> float:
    """Proportional multiplicative auto-exposure update toward a mid-grey scene mean."""
    factor = 1.0 + step_gain * (target - fullframe_mean) / target
    return min(max(prev_ms * factor, t_min), t_max)


def _log_row(t: float, name: str, frame: Frame, spec: ScenarioSpec, i_max: int) -> dict:
    return {
        "t": t,
        "strategy": name,
        "exposure_ms": frame.exposure_ms,
        "mu_roi": roi_mean(frame, spec.roi),
        "mu_fullframe": full_frame_mean(frame),
        "saturated_patch_count": saturated_patch_count(frame, spec.roi, i_max),
    }


def _frame_count(duration: float) -> int:
    return int(math.floor(duration * OUTPUT_RATE + 1e-9))


def run_strategy(
    strategy: ExposureStrategy,
    spec: ScenarioSpec,
    sensor: SensorConfig,
) -> StrategyRun:
    """Run one strategy over the full scenario, emitting the 15 Hz stream and log."""
    if isinstance(strategy, FixedExposure):
        return _run_fixed(strategy, spec, sensor)
    if isinstance(strategy, AutoFullFrame):
        return _run_auto(strategy, spec, sensor)
    if isinstance(strategy, (AdaptiveTriplet, AdaptiveTripletMerf)):
        return _run_adaptive(strategy, spec, sensor)
    raise TypeError(f"unknown strategy {strategy!r}")


def _run_fixed(strategy: FixedExposure, spec: ScenarioSpec, sensor: SensorConfig) -> StrategyRun:
    frames, rows = [], []
    for i in range(_frame_count(spec.duration)):
        t = i / OUTPUT_RATE
        frame = capture(spec, sensor, t, strategy.exposure_ms, stream="fixed")
        frames.append(frame)
        rows.append(_log_row(t, strategy.name, frame, spec, sensor.i_max))
    return StrategyRun(strategy.name, frames, rows)


def _run_auto(strategy: AutoFullFrame, spec: ScenarioSpec, sensor: SensorConfig) -> StrategyRun:
    # The single-stream camera is not bound by the triplet cadence, so its
    # ceiling is the full 15 fps slot.
    auto_sensor = replace(sensor, t_max=max(sensor.t_max, AUTO_T_MAX))
    exposure = min(max(strategy.initial_ms, sensor.t_min), AUTO_T_MAX)
    frames, rows = [], []
    for i in range(_frame_count(spec.duration)):
        t = i / OUTPUT_RATE
        frame = capture(spec, auto_sensor, t, exposure, stream="auto")
        frames.append(frame)
        rows.append(_log_row(t, strategy.name, frame, spec, sensor.i_max))
        exposure = next_exposure_auto(
            exposure,
            full_frame_mean(frame),
            strategy.target,
            strategy.step_gain,
            sensor.t_min,
            AUTO_T_MAX,
        )
    return StrategyRun(strategy.name, frames, rows)


def _run_adaptive(
    strategy: AdaptiveTriplet | AdaptiveTripletMerf,
    spec: ScenarioSpec,
    sensor: SensorConfig,
) -> StrategyRun:
    fused = isinstance(strategy, AdaptiveTripletMerf)
    config = strategy.controller
    state = ControllerState.initial(config)
    frames, rows, cycles = [], [], []
    for i in range(_frame_count(spec.duration)):
        t = 3.0 * i / spec.cycle_rate
        cycle, state = run_cycle(state, spec, sensor, config, t)
        cycles.append(cycle)
        frame = fuse(cycle.frame_low, cycle.frame_high, cycle.frame_opt, strategy.fusion) if fused else cycle.frame_opt
        frames.append(frame)
        rows.append(_log_row(frame.timestamp, strategy.name, frame, spec, sensor.i_max))
    return StrategyRun(strategy.name, frames, rows, cycles=cycles)
