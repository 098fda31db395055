"""Multi-exposure region fusion.

Patches of the optimally exposed frame that fall outside the usable intensity
band are replaced by their counterparts from the short or long frame of the
same cycle: saturated patches take the short-exposure value, underexposed
patches the long-exposure one. Weights are one-hot in the default hard mode; a
smooth mode blends linearly around each threshold to soften seams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sensor import Frame, round_half_away


@dataclass
class FusionConfig:
    """Thresholds and blending behaviour for region fusion.

    `rescale_by_exposure` scales substituted patches by the exposure ratio
    (T_opt/T_source) so their brightness matches the optimal frame; off by
    default, since the raw substitution keeps the donor frame's linearity.
    """

    tau_low: float = 30.0
    tau_high: float = 220.0
    mode: str = "hard"
    smooth_width: float = 10.0
    i_max: int = 255
    rescale_by_exposure: bool = False

    def __post_init__(self):
        if not 0 < self.tau_low < self.tau_high < self.i_max:
            raise ValueError("need 0 < tau_low < tau_high < i_max")
        if self.mode not in ("hard", "smooth"):
            raise ValueError("mode must be 'hard' or 'smooth'")
        if self.mode == "smooth":
            if self.smooth_width <= 0:
                raise ValueError("smooth_width must be > 0")
            if self.tau_low + self.smooth_width / 2 >= self.tau_high - self.smooth_width / 2:
                raise ValueError("smooth bands around the two thresholds overlap")


@dataclass
class WeightTriple:
    w_low: float
    w_high: float
    w_opt: float

    def __post_init__(self):
        total = self.w_low + self.w_high + self.w_opt
        if abs(total - 1.0) > 1e-9:
            raise ValueError("fusion weights must sum to 1")


def fusion_weights(i_opt: float, config: FusionConfig) -> WeightTriple:
    """Per-patch source weights as a function of the optimal frame's intensity."""
    if config.mode == "hard":
        if i_opt < config.tau_low:
            return WeightTriple(0.0, 1.0, 0.0)
        if i_opt > config.tau_high:
            return WeightTriple(1.0, 0.0, 0.0)
        return WeightTriple(0.0, 0.0, 1.0)

    half = config.smooth_width / 2.0
    if i_opt <= config.tau_low - half:
        return WeightTriple(0.0, 1.0, 0.0)
    if i_opt < config.tau_low + half:
        u = (i_opt - (config.tau_low - half)) / config.smooth_width
        return WeightTriple(0.0, 1.0 - u, u)
    if i_opt <= config.tau_high - half:
        return WeightTriple(0.0, 0.0, 1.0)
    if i_opt < config.tau_high + half:
        u = (i_opt - (config.tau_high - half)) / config.smooth_width
        return WeightTriple(u, 0.0, 1.0 - u)
    return WeightTriple(1.0, 0.0, 0.0)


def _weight_maps(opt_patch_means: np.ndarray, config: FusionConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if config.mode == "hard":
        w_h = (opt_patch_means < config.tau_low).astype(float)
        w_l = (opt_patch_means > config.tau_high).astype(float)
        w_o = 1.0 - w_h - w_l
        return w_l, w_h, w_o
    shape = opt_patch_means.shape
    w_l = np.empty(shape)
    w_h = np.empty(shape)
    w_o = np.empty(shape)
    for idx in np.ndindex(shape):
        w = fusion_weights(float(opt_patch_means[idx]), config)
        w_l[idx], w_h[idx], w_o[idx] = w.w_low, w.w_high, w.w_opt
    return w_l, w_h, w_o


def fuse(frame_low: Frame, frame_high: Frame, frame_opt: Frame, config: FusionConfig) -> Frame:
    """Blend the three frames of one cycle into a locally well-exposed frame.

    Weights are decided per patch from the channel-mean of the optimal frame
    and applied to all channels of that patch. Substituted values keep their
    native exposure scale (no exposure-ratio rescaling).
    """
    if not (frame_low.grid == frame_high.grid == frame_opt.grid):
        raise ValueError("frames must share the same patch grid")
    opt_means = frame_opt.intensities.mean(axis=2)
    w_l, w_h, w_o = _weight_maps(opt_means, config)
    low_codes = frame_low.intensities
    high_codes = frame_high.intensities
    if config.rescale_by_exposure:
        low_codes = low_codes * (frame_opt.exposure_ms / frame_low.exposure_ms)
        high_codes = high_codes * (frame_opt.exposure_ms / frame_high.exposure_ms)
    blended = (
        w_l[:, :, None] * low_codes
        + w_h[:, :, None] * high_codes
        + w_o[:, :, None] * frame_opt.intensities
    )
    codes = np.clip(round_half_away(blended), 0.0, float(config.i_max))
    return Frame(codes, frame_opt.exposure_ms, frame_opt.timestamp, stream="fused")
