"""Synthetic driving scene: incident light over time and space, plus pulsatile skin reflectance.

The scene is the ground-truth generator for everything downstream: it knows the
true incident illuminance L(x, y, t), the static skin reflectance R0, the tiny
pulsatile component riding on top of it, and the true heart-rate profile.
All evaluation is deterministic given the scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EVENT_KINDS = ("step", "ramp", "sinusoid", "shadow_flicker")
WAVEFORMS = ("sinusoid", "dicrotic")

# Two-harmonic pulse template with a dicrotic-notch-like bump, normalised to unit peak.
_DICROTIC_PHI = np.linspace(0.0, 2.0 * math.pi, 4096, endpoint=False)
_DICROTIC_PEAK = float(np.max(np.sin(_DICROTIC_PHI) + 0.35 * np.sin(2.0 * _DICROTIC_PHI - 0.9)))


def _wave_value(waveform: str, phi: float) -> float:
    if waveform == "sinusoid":
        return math.sin(phi)
    return (math.sin(phi) + 0.35 * math.sin(2.0 * phi - 0.9)) / _DICROTIC_PEAK


@dataclass
class IlluminationEvent:
    """One multiplicative disturbance of the ambient light level.

    kind:
        step           -- factor jumps to `magnitude` at `start`; reverts after
                          `duration` seconds, or never if duration is None.
        ramp           -- factor slews linearly from 1 to `magnitude` over
                          `duration` seconds and then holds (permanent level change).
        sinusoid       -- factor oscillates 1 + magnitude*sin(2*pi*(t-start)/period)
                          while active.
        shadow_flicker -- square wave: factor = `magnitude` for the first
                          `duty` fraction of each `period`, 1 otherwise.
    """

    kind: str
    start: float
    magnitude: float
    duration: float | None = None
    period: float = 0.5
    duty: float = 0.5

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.start < 0:
            raise ValueError("event start must be >= 0")
        if self.duration is not None and self.duration <= 0:
            raise ValueError("event duration must be positive (or None)")
        if self.kind == "ramp" and self.duration is None:
            raise ValueError("ramp events need a duration")
        if self.kind == "sinusoid":
            if abs(self.magnitude) > 1.0:
                raise ValueError("sinusoid magnitude must satisfy |m| <= 1 to keep L >= 0")
        elif self.magnitude < 0:
            raise ValueError("event magnitude must be >= 0")
        if self.period <= 0 or not 0.0 < self.duty < 1.0:
            raise ValueError("need period > 0 and 0 < duty < 1")

    @property
    def end(self) -> float:
        return math.inf if self.duration is None else self.start + self.duration

    def factor(self, t: float) -> float:
        if t < self.start:
            return 1.0
        if self.kind == "step":
            return self.magnitude if t < self.end else 1.0
        if self.kind == "ramp":
            u = min((t - self.start) / self.duration, 1.0)
            return 1.0 + (self.magnitude - 1.0) * u
        if t >= self.end:
            return 1.0
        if self.kind == "sinusoid":
            return 1.0 + self.magnitude * math.sin(2.0 * math.pi * (t - self.start) / self.period)
        phase = math.fmod(t - self.start, self.period) / self.period
        return self.magnitude if phase < self.duty else 1.0

    def breakpoints(self, t0: float, t1: float) -> list[float]:
        """Times in (t0, t1) where the factor is discontinuous or changes form."""
        pts = [p for p in (self.start, self.end) if t0 < p < t1]
        if self.kind == "ramp":
            pts = [p for p in (self.start, self.start + self.duration) if t0 < p < t1]
        elif self.kind == "shadow_flicker":
            lo = max(t0, self.start)
            hi = min(t1, self.end)
            if lo < hi:
                k0 = math.floor((lo - self.start) / self.period)
                k1 = math.ceil((hi - self.start) / self.period)
                for k in range(int(k0), int(k1) + 1):
                    for edge in (self.start + k * self.period,
                                 self.start + (k + self.duty) * self.period):
                        if t0 < edge < t1:
                            pts.append(edge)
        return pts

    def constant_on(self, t0: float, t1: float) -> bool:
        """Whether the factor is constant over (t0, t1), assuming no breakpoint inside."""
        mid = 0.5 * (t0 + t1)
        if self.kind == "ramp":
            return not (self.start < mid < self.start + self.duration)
        if self.kind == "sinusoid":
            return not (self.start < mid < self.end)
        return True


@dataclass
class SpatialPhase:
    """A per-patch gain grid active from `start` until the next phase takes over."""

    start: float
    gains: np.ndarray | None = None  # (rows, cols) >= 0; None means uniform gain 1

    def __post_init__(self):
        if self.gains is not None:
            self.gains = np.asarray(self.gains, dtype=float)
            if np.any(self.gains < 0):
                raise ValueError("spatial gains must be >= 0")


@dataclass
class IlluminationField:
    """Incident illuminance L(x, y, t) = base_level * event_factor(t) * g(x, y, t)."""

    base_level: float
    events: tuple[IlluminationEvent, ...] = ()
    spatial: tuple[SpatialPhase, ...] = ()

    def __post_init__(self):
        if self.base_level <= 0:
            raise ValueError("base_level must be > 0")
        self.events = tuple(self.events)
        self.spatial = tuple(sorted(self.spatial, key=lambda p: p.start))

    def factor(self, t: float) -> float:
        f = 1.0
        for ev in self.events:
            f *= ev.factor(t)
        return f

    def gain_grid(self, t: float, shape: tuple[int, int]) -> np.ndarray:
        active = None
        for phase in self.spatial:
            if phase.start <= t:
                active = phase
            else:
                break
        if active is None or active.gains is None:
            return np.ones(shape)
        return active.gains

    def level(self, x: int, y: int, t: float, shape: tuple[int, int]) -> float:
        return self.base_level * self.factor(t) * float(self.gain_grid(t, shape)[x, y])

    def breakpoints(self, t0: float, t1: float) -> list[float]:
        pts: list[float] = []
        for ev in self.events:
            pts.extend(ev.breakpoints(t0, t1))
        pts.extend(p.start for p in self.spatial if t0 < p.start < t1)
        return pts

    def factor_constant_on(self, t0: float, t1: float) -> bool:
        return all(ev.constant_on(t0, t1) for ev in self.events)


@dataclass
class HeartRateProfile:
    """Piecewise-linear heart-rate frequency profile f_hr(t) in Hz.

    A single knot gives a constant rate. Outside the knot range the nearest
    value is held. The pulse phase integral is evaluated in closed form
    (piecewise quadratic), so phase is exact at any t.
    """

    times: np.ndarray
    hz: np.ndarray

    def __post_init__(self):
        self.times = np.atleast_1d(np.asarray(self.times, dtype=float))
        self.hz = np.atleast_1d(np.asarray(self.hz, dtype=float))
        if self.times.shape != self.hz.shape or self.times.size == 0:
            raise ValueError("times and hz must be equal-length, non-empty")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("profile times must be strictly increasing")
        if np.any(self.hz <= 0):
            raise ValueError("heart-rate frequencies must be > 0")
        # Cumulative integral of f at each knot, anchored at t = 0.
        cum = [self.hz[0] * self.times[0]]
        for i in range(len(self.times) - 1):
            dt = self.times[i + 1] - self.times[i]
            cum.append(cum[-1] + 0.5 * (self.hz[i] + self.hz[i + 1]) * dt)
        self._cum = np.asarray(cum)

    @classmethod
    def constant(cls, bpm: float) -> "HeartRateProfile":
        return cls(np.array([0.0]), np.array([bpm / 60.0]))

    @classmethod
    def ramp(cls, points: list[tuple[float, float]]) -> "HeartRateProfile":
        """Build from (time_s, bpm) breakpoints."""
        ts = np.array([p[0] for p in points])
        return cls(ts, np.array([p[1] for p in points]) / 60.0)

    def freq(self, t: float) -> float:
        return float(np.interp(t, self.times, self.hz))

    def integral(self, t: float) -> float:
        """Exact integral of f_hr from 0 to t."""
        ts, fs = self.times, self.hz
        if t <= ts[0]:
            return float(fs[0] * t)
        i = int(np.searchsorted(ts, t, side="right")) - 1
        if i >= len(ts) - 1:
            return float(self._cum[-1] + fs[-1] * (t - ts[-1]))
        dt = t - ts[i]
        slope = (fs[i + 1] - fs[i]) / (ts[i + 1] - ts[i])
        return float(self._cum[i] + fs[i] * dt + 0.5 * slope * dt * dt)

    def phase(self, t: float) -> float:
        return 2.0 * math.pi * self.integral(t)

    def knots_in(self, t0: float, t1: float) -> list[float]:
        return [float(t) for t in self.times if t0 < t < t1]

    def constant_on(self, t0: float, t1: float) -> bool:
        """f_hr is constant over (t0, t1) (no knot inside, flat segment)."""
        mid = 0.5 * (t0 + t1)
        ts, fs = self.times, self.hz
        if mid <= ts[0] or mid >= ts[-1]:
            return True
        i = int(np.searchsorted(ts, mid, side="right")) - 1
        return fs[i + 1] == fs[i]


@dataclass
class SkinReflectanceField:
    """Static reflectance R0 plus the pulsatile component per colour channel.

    `pulse_amplitude` holds the per-channel relative amplitudes (a_R, a_G, a_B)
    as fractions of R0, so the instantaneous reflectance on skin patches is
    R_c(x, y, t) = R0(x, y) * (1 + a_c * s(phase(t))). The 0.1 cap keeps the
    pulsatile term small against the static one.
    """

    r0: np.ndarray
    pulse_amplitude: tuple[float, float, float] = (0.012, 0.04, 0.024)
    hr: HeartRateProfile = field(default_factory=lambda: HeartRateProfile.constant(72.0))
    waveform: str = "sinusoid"

    def __post_init__(self):
        self.r0 = np.asarray(self.r0, dtype=float)
        if np.any(self.r0 <= 0) or np.any(self.r0 > 1):
            raise ValueError("R0 must lie in (0, 1]")
        amps = tuple(float(a) for a in self.pulse_amplitude)
        if len(amps) != 3 or any(a < 0 or a > 0.1 for a in amps):
            raise ValueError("pulse amplitudes must be three values in [0, 0.1]")
        self.pulse_amplitude = amps
        if self.waveform not in WAVEFORMS:
            raise ValueError(f"unknown waveform {self.waveform!r}")

    def wave(self, phi: float) -> float:
        return _wave_value(self.waveform, phi)

    def reflectance(self, x: int, y: int, t: float, channel: int, on_skin: bool) -> float:
        r0 = float(self.r0[x, y])
        if not on_skin:
            return r0
        a = self.pulse_amplitude[channel]
        return r0 * (1.0 + a * self.wave(self.hr.phase(t)))


@dataclass
class ScenarioSpec:
    """Complete description of one synthetic capture session."""

    duration: float
    illumination: IlluminationField
    skin: SkinReflectanceField
    roi: np.ndarray
    cycle_rate: float = 45.0
    noise_seed: int = 0
    name: str = "scenario"

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        if self.cycle_rate <= 0:
            raise ValueError("cycle_rate must be > 0")
        self.roi = np.asarray(self.roi, dtype=bool)
        if self.roi.ndim != 2 or not self.roi.any():
            raise ValueError("roi must be a non-empty 2-D patch mask")
        if self.skin.r0.shape != self.roi.shape:
            raise ValueError("R0 map and roi mask must share the grid shape")
        for phase in self.illumination.spatial:
            if phase.gains is not None and phase.gains.shape != self.roi.shape:
                raise ValueError("spatial gain grids must match the patch grid")

    @property
    def grid(self) -> tuple[int, int]:
        return self.roi.shape

    def check_time(self, t: float) -> None:
        if not 0.0 <= t <= self.duration + 1e-9:
            raise ValueError(f"t={t} outside scenario duration [0, {self.duration}]")


def scene_radiance(spec: ScenarioSpec, x: int, y: int, t: float, channel: int = 1) -> float:
    """Instantaneous radiance L(x, y, t) * R(x, y, t) for one patch and channel."""
    spec.check_time(t)
    rows, cols = spec.grid
    if not (0 <= x < rows and 0 <= y < cols):
        raise ValueError(f"patch ({x}, {y}) outside grid {spec.grid}")
    if not 0 <= channel < 3:
        raise ValueError("channel must be 0, 1 or 2")
    lum = spec.illumination.level(x, y, t, spec.grid)
    refl = spec.skin.reflectance(x, y, t, channel, bool(spec.roi[x, y]))
    return lum * refl


def ground_truth_hr(spec: ScenarioSpec, t: float) -> float:
    """Reference heart rate in bpm at time t."""
    spec.check_time(t)
    return 60.0 * spec.skin.hr.freq(t)


def uniform_scene(
    rows: int = 8,
    cols: int = 8,
    roi_box: tuple[int, int, int, int] = (2, 6, 2, 6),
    r0_face: float = 0.5,
    r0_background: float = 0.06,
) -> tuple[np.ndarray, np.ndarray]:
    """Convenience builder: (r0 map, roi mask) with a rectangular face region.

    roi_box is (row0, row1, col0, col1), half-open.
    """
    roi = np.zeros((rows, cols), dtype=bool)
    r0_lo, r0_hi, c0, c1 = roi_box
    roi[r0_lo:r0_hi, c0:c1] = True
    r0 = np.where(roi, r0_face, r0_background)
    return r0, roi
