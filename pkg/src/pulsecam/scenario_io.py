"""Plain-text scenario files.

A scenario file is a list of `key: value` lines (order free, `#` comments,
blank lines ignored) describing the scene grid, the face region, the pulse, and
the illumination event list. Repeated `event:` and `spatial:` keys accumulate.
The exact schema is documented in the README; `load_scenario` reports parse
problems with file and line number.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .scene import (
    HeartRateProfile,
    IlluminationEvent,
    IlluminationField,
    ScenarioSpec,
    SkinReflectanceField,
    SpatialPhase,
)

_EVENT_KIND_ALIASES = {
    "step": "step",
    "ramp": "ramp",
    "sinusoid": "sinusoid",
    "flicker": "shadow_flicker",
    "shadow_flicker": "shadow_flicker",
}

_SPATIAL_KINDS = ("band_rows", "band_cols", "uniform", "identity")


class ScenarioFormatError(ValueError):
    def __init__(self, path: str | Path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


@dataclass
class ScenarioParams:
    """Parsed scenario description; `build()` turns it into a ScenarioSpec."""

    name: str = "scenario"
    duration: float = 60.0
    cycle_rate: float = 45.0
    grid: tuple[int, int] = (8, 8)
    roi_box: tuple[int, int, int, int] = (2, 6, 2, 6)
    seed: int = 0
    base_level: float = 100.0
    r0_face: float = 0.5
    r0_background: float = 0.06
    pulse_amplitude: float = 0.04
    channel_gains: tuple[float, float, float] = (0.3, 1.0, 0.6)
    waveform: str = "sinusoid"
    hr_points: list[tuple[float, float]] = field(default_factory=lambda: [(0.0, 72.0)])
    events: list[IlluminationEvent] = field(default_factory=list)
    spatial: list[tuple] = field(default_factory=list)  # (start, kind, *args)

    def build(self) -> ScenarioSpec:
        rows, cols = self.grid
        roi = np.zeros((rows, cols), dtype=bool)
        r0_, r1_, c0_, c1_ = self.roi_box
        roi[r0_:r1_, c0_:c1_] = True
        r0_map = np.where(roi, self.r0_face, self.r0_background)

        phases = []
        for entry in self.spatial:
            start, kind, *args = entry
            if kind == "identity":
                phases.append(SpatialPhase(start, None))
                continue
            gains = np.ones((rows, cols))
            if kind == "uniform":
                gains *= args[0]
            elif kind == "band_rows":
                a, b, g = int(args[0]), int(args[1]), args[2]
                gains[a:b, :] = g
            elif kind == "band_cols":
                a, b, g = int(args[0]), int(args[1]), args[2]
                gains[:, a:b] = g
            else:
                raise ValueError(f"unknown spatial kind {kind!r}")
            phases.append(SpatialPhase(start, gains))

        illum = IlluminationField(self.base_level, tuple(self.events), tuple(phases))
        if len(self.hr_points) == 1:
            hr = HeartRateProfile.constant(self.hr_points[0][1])
        else:
            hr = HeartRateProfile.ramp(self.hr_points)
        amps = tuple(self.pulse_amplitude * g for g in self.channel_gains)
        skin = SkinReflectanceField(r0_map, amps, hr, self.waveform)
        return ScenarioSpec(
            duration=self.duration,
            illumination=illum,
            skin=skin,
            roi=roi,
            cycle_rate=self.cycle_rate,
            noise_seed=self.seed,
            name=self.name,
        )


def _parse_event(value: str) -> IlluminationEvent:
    parts = value.split()
    if len(parts) < 3:
        raise ValueError("event needs: <kind> <start> <magnitude> [key=value ...]")
    kind = _EVENT_KIND_ALIASES.get(parts[0])
    if kind is None:
        raise ValueError(f"unknown event kind {parts[0]!r}")
    start, magnitude = float(parts[1]), float(parts[2])
    kwargs = {}
    for extra in parts[3:]:
        if "=" not in extra:
            raise ValueError(f"expected key=value, got {extra!r}")
        key, _, raw = extra.partition("=")
        if key not in ("duration", "period", "duty"):
            raise ValueError(f"unknown event option {key!r}")
        kwargs[key] = float(raw)
    return IlluminationEvent(kind, start, magnitude, **kwargs)


def _parse_spatial(value: str) -> tuple:
    parts = value.split()
    if len(parts) < 2:
        raise ValueError("spatial needs: <start> <kind> [args ...]")
    start = float(parts[0])
    kind = parts[1]
    if kind not in _SPATIAL_KINDS:
        raise ValueError(f"unknown spatial kind {kind!r}")
    if kind == "identity":
        return (start, kind)
    if kind == "uniform":
        if len(parts) != 3:
            raise ValueError("uniform needs one gain value")
        return (start, kind, float(parts[2]))
    if len(parts) != 5:
        raise ValueError(f"{kind} needs: <first> <last+1> <gain>")
    return (start, kind, int(parts[2]), int(parts[3]), float(parts[4]))


def _parse_hr(value: str) -> list[tuple[float, float]]:
    parts = value.split()
    if parts[0] == "constant":
        if len(parts) != 2:
            raise ValueError("hr constant needs one bpm value")
        return [(0.0, float(parts[1]))]
    if parts[0] == "ramp":
        vals = [float(p) for p in parts[1:]]
        if len(vals) < 4 or len(vals) % 2:
            raise ValueError("hr ramp needs (time bpm) pairs, at least two")
        return list(zip(vals[0::2], vals[1::2]))
    raise ValueError("hr must be 'constant <bpm>' or 'ramp <t0> <bpm0> <t1> <bpm1> ...'")


def loads_scenario(text: str, source: str | Path = "<string>") -> ScenarioParams:
    params = ScenarioParams()
    params.hr_points = []
    seen_hr = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ScenarioFormatError(source, line_no, "expected 'key: value'")
        key, _, value = line.partition(":")
        key, value = key.strip(), value.strip()
        try:
            if key == "name":
                params.name = value
            elif key == "duration":
                params.duration = float(value)
            elif key == "cycle_rate":
                params.cycle_rate = float(value)
            elif key == "grid":
                rows, cols = (int(v) for v in value.split())
                params.grid = (rows, cols)
            elif key == "roi":
                a, b, c, d = (int(v) for v in value.split())
                params.roi_box = (a, b, c, d)
            elif key == "seed":
                params.seed = int(value)
            elif key == "base_level":
                params.base_level = float(value)
            elif key == "r0_face":
                params.r0_face = float(value)
            elif key == "r0_background":
                params.r0_background = float(value)
            elif key == "pulse_amplitude":
                params.pulse_amplitude = float(value)
            elif key == "channel_gains":
                r, g, b = (float(v) for v in value.split())
                params.channel_gains = (r, g, b)
            elif key == "waveform":
                params.waveform = value
            elif key == "hr":
                params.hr_points = _parse_hr(value)
                seen_hr = True
            elif key == "event":
                params.events.append(_parse_event(value))
            elif key == "spatial":
                params.spatial.append(_parse_spatial(value))
            else:
                raise ValueError(f"unknown key {key!r}")
        except ScenarioFormatError:
            raise
        except (ValueError, TypeError) as exc:
            raise ScenarioFormatError(source, line_no, str(exc)) from exc
    if not seen_hr:
        params.hr_points = [(0.0, 72.0)]
    return params


def load_scenario(path: str | Path) -> ScenarioSpec:
    """Load and build a scenario file; raises ScenarioFormatError with file/line."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioFormatError(path, 0, f"cannot read file: {exc}") from exc
    params = loads_scenario(text, path)
    try:
        return params.build()
    except ValueError as exc:
        raise ScenarioFormatError(path, 0, f"invalid scenario: {exc}") from exc


def dumps_scenario(params: ScenarioParams) -> str:
    lines = [
        f"name: {params.name}",
        f"duration: {params.duration:g}",
        f"cycle_rate: {params.cycle_rate:g}",
        f"grid: {params.grid[0]} {params.grid[1]}",
        "roi: " + " ".join(str(v) for v in params.roi_box),
        f"seed: {params.seed}",
        f"base_level: {params.base_level:g}",
        f"r0_face: {params.r0_face:g}",
        f"r0_background: {params.r0_background:g}",
        f"pulse_amplitude: {params.pulse_amplitude:g}",
        "channel_gains: " + " ".join(f"{g:g}" for g in params.channel_gains),
        f"waveform: {params.waveform}",
    ]
    if len(params.hr_points) == 1:
        lines.append(f"hr: constant {params.hr_points[0][1]:g}")
    else:
        flat = " ".join(f"{t:g} {bpm:g}" for t, bpm in params.hr_points)
        lines.append(f"hr: ramp {flat}")
    for ev in params.events:
        kind = "flicker" if ev.kind == "shadow_flicker" else ev.kind
        entry = f"event: {kind} {ev.start:g} {ev.magnitude:g}"
        if ev.duration is not None:
            entry += f" duration={ev.duration:g}"
        if ev.kind in ("sinusoid", "shadow_flicker"):
            entry += f" period={ev.period:g}"
        if ev.kind == "shadow_flicker":
            entry += f" duty={ev.duty:g}"
        lines.append(entry)
    for entry in params.spatial:
        lines.append("spatial: " + " ".join(f"{v:g}" if isinstance(v, float) else str(v) for v in entry))
    return "\n".join(lines) + "\n"


def save_scenario(params: ScenarioParams, path: str | Path) -> None:
    Path(path).write_text(dumps_scenario(params))
