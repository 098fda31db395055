import numpy as np
import pytest

import pulsecam as pc


def build_scene(
    rate_per_ms: float = 10.0,
    rel_amp: float = 0.04,
    hr_bpm: float = 72.0,
    duration: float = 60.0,
    sigma: float = 0.0,
    seed: int = 0,
    events: tuple = (),
    spatial: tuple = (),
    grid: tuple[int, int] = (8, 8),
    roi_box: tuple[int, int, int, int] = (2, 6, 2, 6),
    r0_face: float = 0.5,
    r0_background: float = 0.06,
    base_level: float = 100.0,
    channel_gains: tuple[float, float, float] = (0.3, 1.0, 0.6),
    waveform: str = "sinusoid",
    hr: "pc.HeartRateProfile | None" = None,
    **sensor_kw,
):
    """Scene plus sensor tuned so face patches respond at `rate_per_ms` codes/ms.

    `rel_amp` is the green-channel pulse amplitude as a fraction of R0; the
    other channels are scaled by `channel_gains`.
    """
    rows, cols = grid
    roi = np.zeros(grid, dtype=bool)
    a, b, c, d = roi_box
    roi[a:b, c:d] = True
    r0 = np.where(roi, r0_face, r0_background)
    amps = tuple(rel_amp * g for g in channel_gains)
    profile = hr if hr is not None else pc.HeartRateProfile.constant(hr_bpm)
    spec = pc.ScenarioSpec(
        duration=duration,
        illumination=pc.IlluminationField(base_level, tuple(events), tuple(spatial)),
        skin=pc.SkinReflectanceField(r0, amps, profile, waveform),
        roi=roi,
        noise_seed=seed,
    )
    sensor = pc.SensorConfig(
        responsivity=rate_per_ms / (base_level * r0_face),
        read_noise_sigma=sigma,
        **sensor_kw,
    )
    return spec, sensor


@pytest.fixture
def static_scene():
    """Noiseless static scene, face rate 10 codes/ms, no pulse."""
    return build_scene(rate_per_ms=10.0, rel_amp=0.0)
