"""Camera sensor simulation: exposure integration, noise, quantisation, saturation.

A capture integrates scene radiance over the exposure interval, scales by the
responsivity, optionally adds Gaussian read noise, rounds half-away-from-zero
and clamps to the code range. The integral is evaluated in closed form when the
light level is piecewise constant and the pulse is sinusoidal with locally
constant frequency; otherwise it falls back to Gauss-Legendre quadrature on the
smooth pieces. Either way the result is deterministic given the scenario seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scene import ScenarioSpec

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


@dataclass
class SensorConfig:
    """Static camera parameters.

    responsivity is in codes per (radiance unit * ms); a scalar applies to all
    three channels, a 3-tuple sets them individually. The default exposure
    ceiling is the 45 fps frame slot (1000/45 ms).
    """

    responsivity: float | tuple[float, float, float] = 1.0
    bit_depth: int = 8
    t_min: float = 0.1
    t_max: float = 1000.0 / 45.0
    read_noise_sigma: float = 0.0
    quantize: bool = True

    def __post_init__(self):
        if self.t_min >= self.t_max:
            raise ValueError("need t_min < t_max")
        if self.bit_depth < 1:
            raise ValueError("bit_depth must be >= 1")
        k = self.k_per_channel()
        if np.any(k <= 0):
            raise ValueError("responsivity must be > 0")

    @property
    def i_max(self) -> int:
        return 2 ** self.bit_depth - 1

    def k_per_channel(self) -> np.ndarray:
        if np.isscalar(self.responsivity):
            return np.full(3, float(self.responsivity))
        k = np.asarray(self.responsivity, dtype=float)
        if k.shape != (3,):
            raise ValueError("responsivity must be a scalar or a 3-tuple")
        return k


@dataclass
class Frame:
    """One captured patch grid: codes of shape (rows, cols, 3) plus capture metadata."""

    intensities: np.ndarray
    exposure_ms: float
    timestamp: float
    stream: str = "opt"

    STREAMS = ("low", "high", "opt", "fused", "auto", "fixed")

    def __post_init__(self):
        self.intensities = np.asarray(self.intensities, dtype=float)
        if self.stream not in self.STREAMS:
            raise ValueError(f"unknown stream tag {self.stream!r}")

    @property
    def grid(self) -> tuple[int, int]:
        return self.intensities.shape[:2]


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round half away from zero (typical ADC behaviour, unlike banker's rounding)."""
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def _capture_rng(seed: int, t: float, exposure_ms: float) -> np.random.Generator:
    # Seed from the scenario seed plus the float bit patterns of (t, T) so every
    # capture is an independent but reproducible draw.
    tb = int(np.float64(t).view(np.uint64))
    eb = int(np.float64(exposure_ms).view(np.uint64))
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, tb, eb])


def _exposure_terms(spec: ScenarioSpec, t0: float, t1: float) -> list[tuple[np.ndarray, float, float]]:
    """Split [t0, t1] at scene breakpoints and integrate each smooth piece.

    Returns (gain_grid, dc, ac) per piece, where dc = integral of the temporal
    illumination factor and ac = integral of factor * s(phase), both in seconds.
    The spatial gain grid is constant within a piece by construction.
    """
    illum, skin = spec.illumination, spec.skin
    pts = illum.breakpoints(t0, t1) + skin.hr.knots_in(t0, t1)
    edges = sorted({t0, t1, *pts})
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0:
            continue
        mid = 0.5 * (a + b)
        gain = illum.gain_grid(mid, spec.grid)
        closed = (
            skin.waveform == "sinusoid"
            and illum.factor_constant_on(a, b)
            and skin.hr.constant_on(a, b)
        )
        if closed:
            fac = illum.factor(mid)
            f = skin.hr.freq(mid)
            delta = b - a
            dc = fac * delta
            # Integral of sin over a constant-frequency stretch: the sinc factor
            # attenuates the amplitude, the phase is taken at the window centre.
            ac = fac * delta * float(np.sinc(f * delta)) * math.sin(skin.hr.phase(mid))
        else:
            half = 0.5 * (b - a)
            nodes = 0.5 * (a + b) + half * _GL_NODES
            fac = np.array([illum.factor(x) for x in nodes])
            s = np.array([skin.wave(skin.hr.phase(x)) for x in nodes])
            dc = half * float(np.dot(_GL_WEIGHTS, fac))
            ac = half * float(np.dot(_GL_WEIGHTS, fac * s))
        out.append((gain, dc, ac))
    return out


def accumulate(spec: ScenarioSpec, sensor: SensorConfig, t: float, exposure_ms: float) -> np.ndarray:
    """Noiseless, unquantised accumulated codes of shape (rows, cols, 3).

    This is the exact exposure integral before the read-out chain; `capture`
    layers noise, rounding and clamping on top of it.
    """
    if not sensor.t_min <= exposure_ms <= sensor.t_max + 1e-9:
        raise ValueError(
            f"exposure {exposure_ms} ms outside sensor bounds "
            f"[{sensor.t_min}, {sensor.t_max}]"
        )
    if t < 0 or t + exposure_ms / 1000.0 > spec.duration + 1e-9:
        raise ValueError("exposure window extends outside the scenario")

    amps = np.asarray(spec.skin.pulse_amplitude)
    r0 = spec.skin.r0
    skin_mask = spec.roi.astype(float)
    total = np.zeros((*spec.grid, 3))
    for gain, dc, ac in _exposure_terms(spec, t, t + exposure_ms / 1000.0):
        dc_part = r0 * dc
        ac_part = (r0 * skin_mask)[:, :, None] * amps[None, None, :] * ac
        total += gain[:, :, None] * (dc_part[:, :, None] + ac_part)
    k = sensor.k_per_channel()
    # 1000x converts the seconds-domain integral to the per-ms responsivity units.
    return total * spec.illumination.base_level * k[None, None, :] * 1000.0


def capture(
    spec: ScenarioSpec,
    sensor: SensorConfig,
    t: float,
    exposure_ms: float,
    stream: str = "opt",
) -> Frame:
    """Capture one frame at time t with the given exposure."""
    raw = accumulate(spec, sensor, t, exposure_ms)
    if sensor.read_noise_sigma > 0:
        rng = _capture_rng(spec.noise_seed, t, exposure_ms)
        raw = raw + rng.normal(0.0, sensor.read_noise_sigma, raw.shape)
    if sensor.quantize:
        codes = np.clip(round_half_away(raw), 0.0, float(sensor.i_max))
    else:
        codes = np.clip(raw, 0.0, float(sensor.i_max))
    return Frame(codes, exposure_ms, t, stream)


def roi_mean(frame: Frame, roi: np.ndarray) -> float:
    """Mean code over the ROI patches (all channels)."""
    roi = np.asarray(roi, dtype=bool)
    if roi.shape != frame.grid:
        raise ValueError("roi mask does not match the frame grid")
    if not roi.any():
        raise ValueError("roi is empty")
    return float(frame.intensities[roi].mean())


def full_frame_mean(frame: Frame) -> float:
    return float(frame.intensities.mean())


def saturated_patch_count(frame: Frame, roi: np.ndarray, i_max: int) -> int:
    """ROI patches whose channel-mean sits at the code ceiling."""
    roi = np.asarray(roi, dtype=bool)
    patch_means = frame.intensities.mean(axis=2)
    return int(np.count_nonzero(patch_means[roi] >= i_max - 0.5))


def response_curve(
    spec: ScenarioSpec,
    sensor: SensorConfig,
    t: float,
    exposures: list[float],
) -> list[tuple[float, float]]:
    """Sample the exposure-to-ROI-intensity response at one instant."""
    exp = list(exposures)
    if any(b <= a for a, b in zip(exp, exp[1:])):
        raise ValueError("exposures must be strictly increasing")
    return [(T, roi_mean(capture(spec, sensor, t, T), spec.roi)) for T in exp]
