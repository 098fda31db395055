"""Built-in scenarios and weather-calibrated controller settings.

The four demo cases cover the qualitative regimes the controller has to
survive: rapid roadside shadow flicker, extreme glare requiring sub-bracket
compression, a low-light scene where the triplet cadence caps the exposure, and
a strong spatial gradient where region fusion recovers clipped patches.
Scenario magnitudes are chosen to land each regime, not calibrated field data.
"""

from __future__ import annotations

from dataclasses import dataclass

from .controller import ControllerConfig
from .fusion import FusionConfig
from .scenario_io import ScenarioParams
from .scene import IlluminationEvent
from .sensor import SensorConfig
from .strategies import (
    AdaptiveTriplet,
    AdaptiveTripletMerf,
    AutoFullFrame,
    ExposureStrategy,
    FixedExposure,
)

# Weather-specific probe exposure bounds. Overcast skies tolerate long probes;
# sunny scenes need room to compress the bracket far below the nominal floor.
OVERCAST_BOUNDS = ((5.0, 10.0), (15.0, 22.0))
SUNNY_BOUNDS = ((0.5, 8.0), (1.5, 16.0))
WIDE_BOUNDS = ((0.5, 10.0), (1.5, 22.0))

OVERCAST_FIXED = (8.0, 22.0)
SUNNY_FIXED = (5.0, 16.0)


def overcast_controller(**overrides) -> ControllerConfig:
    low, high = OVERCAST_BOUNDS
    return ControllerConfig(bracket_low_range=low, bracket_high_range=high, **overrides)


def sunny_controller(**overrides) -> ControllerConfig:
    low, high = SUNNY_BOUNDS
    return ControllerConfig(bracket_low_range=low, bracket_high_range=high, **overrides)


def wide_controller(**overrides) -> ControllerConfig:
    low, high = WIDE_BOUNDS
    return ControllerConfig(bracket_low_range=low, bracket_high_range=high, **overrides)


@dataclass
class CaseSetup:
    """One demo case: scenario parameters plus the strategy line-up to compare."""

    name: str
    params: ScenarioParams
    sensor: SensorConfig
    strategies: list[ExposureStrategy]
    note: str = ""


def _sensor(sigma: float = 1.0) -> SensorConfig:
    return SensorConfig(responsivity=1.0, read_noise_sigma=sigma)


def case_shadow_flicker(seed: int = 7) -> CaseSetup:
    """Typical driving: moderate light, tree-shadow flicker, two brightness steps."""
    params = ScenarioParams(
        name="shadow-flicker",
        duration=120.0,
        base_level=30.0,
        seed=seed,
        events=[
            IlluminationEvent("shadow_flicker", 10.0, 0.6, duration=100.0, period=0.5, duty=0.5),
            IlluminationEvent("step", 40.0, 2.2, duration=40.0),
        ],
    )
    strategies = [
        FixedExposure(OVERCAST_FIXED[0], name="fixed-short"),
        FixedExposure(OVERCAST_FIXED[1], name="fixed-long"),
        AutoFullFrame(),
        AdaptiveTriplet(overcast_controller()),
    ]
    return CaseSetup(
        "shadow-flicker", params, _sensor(), strategies,
        note="adaptive should track; the long exposure saturates outside the shadows",
    )


def case_extreme_glare(seed: int = 11) -> CaseSetup:
    """Direct sunlight: glare triples an already bright scene for over a minute."""
    params = ScenarioParams(
        name="extreme-glare",
        duration=120.0,
        base_level=50.0,
        seed=seed,
        events=[
            IlluminationEvent("ramp", 20.0, 3.0, duration=10.0),
            IlluminationEvent("ramp", 90.0, 1.0 / 3.0, duration=10.0),
        ],
    )
    strategies = [
        FixedExposure(SUNNY_FIXED[0], name="fixed-short"),
        FixedExposure(SUNNY_FIXED[1], name="fixed-long"),
        AutoFullFrame(),
        AdaptiveTriplet(sunny_controller()),
    ]
    return CaseSetup(
        "extreme-glare", params, _sensor(), strategies,
        note="only the adaptive bracket compresses far enough to dodge saturation",
    )


def case_low_light(seed: int = 13) -> CaseSetup:
    """Rainy dusk: even the full triplet exposure ceiling cannot reach the target."""
    params = ScenarioParams(
        name="low-light",
        duration=120.0,
        base_level=2.4,
        seed=seed,
    )
    strategies = [
        FixedExposure(OVERCAST_FIXED[0], name="fixed-short"),
        FixedExposure(OVERCAST_FIXED[1], name="fixed-long"),
        AutoFullFrame(),
        AdaptiveTriplet(overcast_controller()),
    ]
    return CaseSetup(
        "low-light", params, _sensor(sigma=2.0), strategies,
        note="the 45 fps cadence caps exposure; the single-stream auto camera wins here",
    )


def case_visor_gradient(seed: int = 17) -> CaseSetup:
    """Sun visor: deep shadow on the upper face, glare below; fusion recovers patches."""
    params = ScenarioParams(
        name="visor-gradient",
        duration=120.0,
        base_level=40.0,
        seed=seed,
        spatial=[(30.0, "band_rows", 2, 4, 0.1)],
    )
    strategies = [
        FixedExposure(OVERCAST_FIXED[0], name="fixed-short"),
        FixedExposure(OVERCAST_FIXED[1], name="fixed-long"),
        AutoFullFrame(),
        AdaptiveTriplet(overcast_controller()),
        AdaptiveTripletMerf(overcast_controller(), FusionConfig()),
    ]
    return CaseSetup(
        "visor-gradient", params, _sensor(sigma=3.0), strategies,
        note="region fusion swaps clipped lower-face patches for short-frame ones",
    )


def sunny_suite(seed: int = 23) -> list[CaseSetup]:
    """Bright-weather scenarios for the strategy-ordering comparison."""
    glare = ScenarioParams(
        name="sunny-glare",
        duration=120.0,
        base_level=50.0,
        seed=seed,
        events=[IlluminationEvent("step", 30.0, 3.0, duration=30.0)],
    )
    shade = ScenarioParams(
        name="sunny-shade",
        duration=120.0,
        base_level=50.0,
        seed=seed + 1,
        events=[
            IlluminationEvent("step", 30.0, 0.2, duration=20.0),
            IlluminationEvent("step", 70.0, 0.2, duration=20.0),
        ],
    )
    strategies = [
        FixedExposure(SUNNY_FIXED[0], name="fixed-short"),
        FixedExposure(SUNNY_FIXED[1], name="fixed-long"),
        AutoFullFrame(),
        AdaptiveTriplet(sunny_controller()),
    ]
    return [
        CaseSetup("sunny-glare", glare, _sensor(), list(strategies)),
        CaseSetup("sunny-shade", shade, _sensor(), list(strategies)),
    ]


def demo_cases() -> dict[str, CaseSetup]:
    cases = [
        case_shadow_flicker(),
        case_extreme_glare(),
        case_low_light(),
        case_visor_gradient(),
    ]
    return {c.name: c for c in cases}
