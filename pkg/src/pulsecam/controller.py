"""Triplet-frame adaptive exposure control.

Each cycle spends two frames probing the scene at a short and a long exposure,
fits the locally linear exposure-to-intensity response, inverts it to land the
ROI mean on the target code, and captures the third frame at that optimum. The
probe bracket tracks the optimum multiplicatively so both samples stay in the
linear regime as the light changes.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .scene import ScenarioSpec
from .sensor import Frame, SensorConfig, capture, roi_mean


class FitError(ValueError):
    """Base class for unusable exposure-response fits."""


class DegenerateAbscissa(FitError):
    """All sample exposures coincide; the slope is undefined."""


class FlatResponse(FitError):
    """The fitted slope is too small to invert (saturated or dark samples)."""


@dataclass
class ExposureSample:
    exposure_ms: float
    intensity: float
    timestamp: float


@dataclass
class LinearFit:
    """Response model: intensity = slope * exposure_ms + intercept."""

    slope: float
    intercept: float

    def predict(self, exposure_ms: float) -> float:
        return self.slope * exposure_ms + self.intercept


@dataclass
class ControllerConfig:
    i_target: float = 140.0
    i_max: int = 255
    buffer_capacity: int = 2
    t_min: float = 0.1
    t_max: float = 1000.0 / 45.0
    bracket_low_factor: float = 0.5
    bracket_high_factor: float = 1.5
    bracket_low_range: tuple[float, float] = (5.0, 10.0)
    bracket_high_range: tuple[float, float] = (15.0, 22.0)
    slope_epsilon: float = 0.05
    outlier_residual: float = 20.0

    def __post_init__(self):
        if not 0 < self.i_target < self.i_max:
            raise ValueError("need 0 < i_target < i_max")
        if self.buffer_capacity < 2:
            raise ValueError("buffer capacity must be >= 2")
        if not self.bracket_low_factor < 1.0 < self.bracket_high_factor:
            raise ValueError("bracket factors must straddle 1")
        if self.t_min >= self.t_max:
            raise ValueError("need t_min < t_max")
        for lo, hi in (self.bracket_low_range, self.bracket_high_range):
            if lo > hi:
                raise ValueError("bracket ranges must be ordered")


@dataclass
class ControllerState:
    """Single-owner mutable controller state; one instance per camera stream."""

    bracket: tuple[float, float]
    buffer: deque[ExposureSample] = field(default_factory=deque)
    last_fit: LinearFit | None = None
    last_t_opt: float | None = None
    cycle_index: int = 0

    @classmethod
    def initial(cls, config: ControllerConfig) -> "ControllerState":
        low = 0.5 * (config.bracket_low_range[0] + config.bracket_low_range[1])
        high = 0.5 * (config.bracket_high_range[0] + config.bracket_high_range[1])
        return cls(bracket=(low, high))


@dataclass
class TripletCycle:
    """Everything produced by one low/high/optimal cycle, including the log row."""

    index: int
    t: float
    frame_low: Frame
    frame_high: Frame
    frame_opt: Frame
    i_low: float
    i_high: float
    fit: LinearFit | None
    t_opt: float
    mu_opt: float
    flags: tuple[str, ...] = ()

    def log_row(self) -> dict:
        return {
            "cycle_index": self.index,
            "t": self.t,
            "T_l": self.frame_low.exposure_ms,
            "I_l": self.i_low,
            "T_h": self.frame_high.exposure_ms,
            "I_h": self.i_high,
            "k": self.fit.slope if self.fit else math.nan,
            "b": self.fit.intercept if self.fit else math.nan,
            "T_opt": self.t_opt,
            "mu_opt": self.mu_opt,
            "flags": ";".join(self.flags),
        }


def fit_two_point(
    low: ExposureSample,
    high: ExposureSample,
    slope_epsilon: float = 0.05,
) -> LinearFit:
    """Direct two-sample fit of the linear response."""
    if low.exposure_ms == high.exposure_ms:
        raise DegenerateAbscissa("both samples share the same exposure")
    k = (high.intensity - low.intensity) / (high.exposure_ms - low.exposure_ms)
    if abs(k) < slope_epsilon:
        raise FlatResponse(f"slope {k:.4g} below epsilon {slope_epsilon}")
    return LinearFit(k, low.intensity - k * low.exposure_ms)


def fit_least_squares(
    samples: list[ExposureSample],
    slope_epsilon: float = 0.05,
) -> LinearFit:
    """Least-squares fit over the rolling sample buffer.

    With exactly two samples this defers to `fit_two_point` so the two paths
    agree bit for bit.
    """
    if len(samples) < 2:
        raise FitError("need at least two samples")
    if len(samples) == 2:
        return fit_two_point(samples[0], samples[1], slope_epsilon)
    n = float(len(samples))
    st = sum(s.exposure_ms for s in samples)
    si = sum(s.intensity for s in samples)
    stt = sum(s.exposure_ms * s.exposure_ms for s in samples)
    sti = sum(s.exposure_ms * s.intensity for s in samples)
    denom = n * stt - st * st
    if denom == 0.0:
        raise DegenerateAbscissa("all sample exposures coincide")
    k = (n * sti - st * si) / denom
    if abs(k) < slope_epsilon:
        raise FlatResponse(f"slope {k:.4g} below epsilon {slope_epsilon}")
    return LinearFit(k, (si - k * st) / n)


def compute_t_opt(fit: LinearFit, config: ControllerConfig) -> float:
    """Invert the fitted response for the target intensity, clamped to the sensor."""
    if fit.slope < config.slope_epsilon:
        raise FlatResponse(f"slope {fit.slope:.4g} unusable")
    raw = (config.i_target - fit.intercept) / fit.slope
    return min(max(raw, config.t_min), config.t_max)


def update_bracket(t_opt: float, config: ControllerConfig) -> tuple[float, float]:
    """Re-centre the probe bracket around the latest optimum."""
    lo_lo, lo_hi = config.bracket_low_range
    hi_lo, hi_hi = config.bracket_high_range
    low = min(max(config.bracket_low_factor * t_opt, lo_lo), lo_hi)
    high = min(max(config.bracket_high_factor * t_opt, hi_lo), hi_hi)
    if low >= high:
        mid = 0.5 * (low + high)
        low = max(config.t_min, mid - 1.0)
        high = min(config.t_max, mid + 1.0)
    return low, high


def purge_on_outlier(
    state: ControllerState,
    fit: LinearFit,
    latest: ExposureSample,
    config: ControllerConfig,
) -> ControllerState:
    """Drop stale history when the newest sample no longer matches the fit.

    A residual above the threshold means the scene has moved; keeping only the
    two newest samples lets the next fit re-learn the response immediately.
    """
    residual = abs(latest.intensity - fit.predict(latest.exposure_ms))
    if residual > config.outlier_residual and len(state.buffer) > 2:
        keep = list(state.buffer)[-2:]
        state.buffer.clear()
        state.buffer.extend(keep)
    return state


def _push(state: ControllerState, sample: ExposureSample, capacity: int) -> None:
    state.buffer.append(sample)
    while len(state.buffer) > capacity:
        state.buffer.popleft()


def _fallback_t_opt(
    state: ControllerState,
    config: ControllerConfig,
    i_low: float,
    i_high: float,
) -> tuple[float, list[str]]:
    """Exposure choice when the fit is unusable.

    A flat response with both probes pinned at the code ceiling means the scene
    jumped far brighter than the bracket; holding the previous exposure would
    stay saturated forever, so shrink geometrically using the saturation bound
    (the true response reaches the ceiling at or before T_l). A flat but dark
    response carries no directional information, so hold the previous optimum.
    """
    flags = ["flat_response"]
    if min(i_low, i_high) >= config.i_max - 1.0:
        t_l = state.bracket[0]
        t_opt = min(max(t_l * config.i_target / config.i_max, config.t_min), config.t_max)
        flags.append("saturation_backoff")
        return t_opt, flags
    if state.last_t_opt is not None:
        return state.last_t_opt, flags
    return 0.5 * (state.bracket[0] + state.bracket[1]), flags


def run_cycle(
    state: ControllerState,
    spec: ScenarioSpec,
    sensor: SensorConfig,
    config: ControllerConfig,
    t: float,
) -> tuple[TripletCycle, ControllerState]:
    """Execute one triplet cycle starting at time t.

    Captures the low and high probes one frame slot apart, refreshes the fit
    over the rolling buffer, captures the third frame at the computed optimum,
    and re-centres the bracket. The state is mutated in place and returned.
    """
    dt = 1.0 / spec.cycle_rate
    t_l, t_h = state.bracket

    frame_low = capture(spec, sensor, t, t_l, stream="low")
    frame_high = capture(spec, sensor, t + dt, t_h, stream="high")
    i_low = roi_mean(frame_low, spec.roi)
    i_high = roi_mean(frame_high, spec.roi)

    low_sample = ExposureSample(t_l, i_low, t)
    high_sample = ExposureSample(t_h, i_high, t + dt)
    _push(state, low_sample, config.buffer_capacity)
    _push(state, high_sample, config.buffer_capacity)

    flags: list[str] = []
    fit: LinearFit | None = None
    try:
        fit = fit_least_squares(list(state.buffer), config.slope_epsilon)
        before = len(state.buffer)
        purge_on_outlier(state, fit, high_sample, config)
        if len(state.buffer) < before:
            flags.append("outlier_purge")
            fit = fit_least_squares(list(state.buffer), config.slope_epsilon)
        t_opt = compute_t_opt(fit, config)
    except FitError:
        fit = None
        t_opt, fb_flags = _fallback_t_opt(state, config, i_low, i_high)
        flags.extend(fb_flags)

    frame_opt = capture(spec, sensor, t + 2.0 * dt, t_opt, stream="opt")
    mu_opt = roi_mean(frame_opt, spec.roi)

    if t_opt >= config.t_max - 1e-9 and mu_opt < config.i_target - 1.0:
        flags.append("underexposed_at_limit")

    state.bracket = update_bracket(t_opt, config)
    state.last_fit = fit if fit is not None else state.last_fit
    state.last_t_opt = t_opt
    cycle = TripletCycle(
        index=state.cycle_index,
        t=t,
        frame_low=frame_low,
        frame_high=frame_high,
        frame_opt=frame_opt,
        i_low=i_low,
        i_high=i_high,
        fit=fit,
        t_opt=t_opt,
        mu_opt=mu_opt,
        flags=tuple(flags),
    )
    state.cycle_index += 1
    return cycle, state
