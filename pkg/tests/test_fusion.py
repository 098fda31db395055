import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import pulsecam as pc


def frame_of(values, exposure=10.0, t=0.0, stream="opt"):
    codes = np.asarray(values, dtype=float)
    if codes.ndim == 2:
        codes = np.repeat(codes[:, :, None], 3, axis=2)
    return pc.Frame(codes, exposure, t, stream)


class TestFusionWeights:
    def test_dark_patch_takes_long_frame(self):
        w = pc.fusion_weights(10.0, pc.FusionConfig())
        assert (w.w_low, w.w_high, w.w_opt) == (0.0, 1.0, 0.0)

    def test_saturated_patch_takes_short_frame(self):
        w = pc.fusion_weights(250.0, pc.FusionConfig())
        assert (w.w_low, w.w_high, w.w_opt) == (1.0, 0.0, 0.0)

    def test_well_exposed_patch_passes_through(self):
        w = pc.fusion_weights(100.0, pc.FusionConfig())
        assert (w.w_low, w.w_high, w.w_opt) == (0.0, 0.0, 1.0)

    @settings(max_examples=200, deadline=None)
    @given(i_opt=st.floats(0.0, 255.0))
    def test_hard_weights_are_one_hot(self, i_opt):
        w = pc.fusion_weights(i_opt, pc.FusionConfig())
        triple = (w.w_low, w.w_high, w.w_opt)
        assert sorted(triple) == [0.0, 0.0, 1.0]

    @settings(max_examples=200, deadline=None)
    @given(i_opt=st.floats(0.0, 255.0))
    def test_smooth_weights_sum_to_one(self, i_opt):
        w = pc.fusion_weights(i_opt, pc.FusionConfig(mode="smooth"))
        assert w.w_low + w.w_high + w.w_opt == pytest.approx(1.0)
        assert min(w.w_low, w.w_high, w.w_opt) >= 0.0

    def test_smooth_transition_is_linear(self):
        cfg = pc.FusionConfig(mode="smooth", smooth_width=10.0)
        w = pc.fusion_weights(220.0, cfg)  # centre of the high transition
        assert w.w_low == pytest.approx(0.5)
        assert w.w_opt == pytest.approx(0.5)


class TestFuse:
    def test_identity_on_well_exposed_frame(self):
        opt = frame_of(np.full((4, 4), 120.0))
        low = frame_of(np.full((4, 4), 60.0), stream="low")
        high = frame_of(np.full((4, 4), 240.0), stream="high")
        fused = pc.fuse(low, high, opt, pc.FusionConfig())
        assert np.array_equal(fused.intensities, opt.intensities)
        assert fused.stream == "fused"

    def test_uniformly_dark_cycle_returns_long_frame(self):
        opt = frame_of(np.full((4, 4), 20.0))
        low = frame_of(np.full((4, 4), 10.0), stream="low")
        high = frame_of(np.full((4, 4), 60.0), stream="high")
        fused = pc.fuse(low, high, opt, pc.FusionConfig())
        assert np.array_equal(fused.intensities, high.intensities)

    def test_visor_style_substitution(self):
        """Saturated lower half takes the short frame; fused ROI drops below tau_high."""
        opt = np.full((4, 4), 120.0)
        opt[2:, :] = 255.0  # clipped chin rows
        low = np.full((4, 4), 60.0)
        low[2:, :] = 150.0  # same patches at the short exposure, unsaturated
        high = np.full((4, 4), 240.0)
        fused = pc.fuse(
            frame_of(low, stream="low"),
            frame_of(high, stream="high"),
            frame_of(opt),
            pc.FusionConfig(),
        )
        assert np.all(fused.intensities[2:, :, :] == 150.0)
        assert np.all(fused.intensities[:2, :, :] == 120.0)
        assert fused.intensities.max() <= 220.0

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            pc.fuse(
                frame_of(np.zeros((4, 4))),
                frame_of(np.zeros((5, 4))),
                frame_of(np.zeros((4, 4))),
                pc.FusionConfig(),
            )

    @settings(max_examples=50, deadline=None)
    @given(
        opt=st.floats(0.0, 255.0),
        low=st.floats(0.0, 255.0),
        high=st.floats(0.0, 255.0),
    )
    def test_bound_preservation(self, opt, low, high):
        fused = pc.fuse(
            frame_of(np.full((2, 2), low), stream="low"),
            frame_of(np.full((2, 2), high), stream="high"),
            frame_of(np.full((2, 2), opt)),
            pc.FusionConfig(mode="smooth"),
        )
        assert fused.intensities.min() >= 0.0
        assert fused.intensities.max() <= 255.0

    def test_coverage_on_constructed_gradient(self):
        """If some source patch sits in [tau_low, tau_high], hard fusion lands there."""
        cfg = pc.FusionConfig()
        opt = np.array([[10.0, 120.0], [250.0, 40.0]])
        low = np.array([[5.0, 60.0], [125.0, 20.0]])
        high = np.array([[35.0, 240.0], [255.0, 120.0]])
        fused = pc.fuse(
            frame_of(low, stream="low"), frame_of(high, stream="high"), frame_of(opt), cfg
        ).intensities[:, :, 0]
        # patch (0,0): dark opt -> high value 35 (inside band)
        # patch (1,0): saturated opt -> low value 125 (inside band)
        # others: opt within band already
        for r in range(2):
            for c in range(2):
                assert cfg.tau_low <= fused[r, c] <= cfg.tau_high


class TestFusionConfig:
    def test_threshold_ordering_enforced(self):
        with pytest.raises(ValueError):
            pc.FusionConfig(tau_low=230.0, tau_high=220.0)

    def test_smooth_bands_must_not_overlap(self):
        with pytest.raises(ValueError):
            pc.FusionConfig(tau_low=100.0, tau_high=110.0, mode="smooth", smooth_width=30.0)

    def test_exposure_ratio_rescaling(self):
        # dark patch donated by the long frame, brought to T_opt brightness
        opt = frame_of(np.full((2, 2), 20.0), exposure=10.0)
        low = frame_of(np.full((2, 2), 10.0), exposure=5.0, stream="low")
        high = frame_of(np.full((2, 2), 60.0), exposure=20.0, stream="high")
        fused = pc.fuse(low, high, opt, pc.FusionConfig(rescale_by_exposure=True))
        assert np.all(fused.intensities == 30.0)  # 60 * (10/20)
