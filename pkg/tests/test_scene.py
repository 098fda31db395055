import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import pulsecam as pc
from conftest import build_scene


class TestSceneRadiance:
    def test_constant_scene_is_product_of_constants(self):
        spec, _ = build_scene(rel_amp=0.0)
        # L = 100, R0 = 0.5 on the face
        assert pc.scene_radiance(spec, 3, 3, 5.0) == pytest.approx(50.0)
        assert pc.scene_radiance(spec, 3, 3, 42.0) == pytest.approx(50.0)

    def test_pulse_zero_crossing_gives_exact_dc(self):
        spec, _ = build_scene(rel_amp=0.05, channel_gains=(1.0, 1.0, 1.0))
        # phase = 2*pi*f*t is a multiple of pi at t = k/(2f)
        f = spec.skin.hr.freq(0.0)
        t = 1.0 / (2.0 * f)
        assert pc.scene_radiance(spec, 3, 3, t) == pytest.approx(50.0, abs=1e-9)

    def test_step_event_scales_radiance(self):
        ev = pc.IlluminationEvent("step", 10.0, 4.0)
        spec, _ = build_scene(rel_amp=0.0, events=(ev,))
        before = pc.scene_radiance(spec, 3, 3, 10.0 - 1e-6)
        after = pc.scene_radiance(spec, 3, 3, 10.0 + 1e-6)
        assert after == pytest.approx(4.0 * before)

    def test_background_patch_has_no_pulse(self):
        spec, _ = build_scene(rel_amp=0.05)
        vals = {pc.scene_radiance(spec, 0, 0, t) for t in (0.1, 0.2, 0.3)}
        assert len(vals) == 1  # constant: no AC off the face

    def test_out_of_range_queries_raise(self):
        spec, _ = build_scene()
        with pytest.raises(ValueError):
            pc.scene_radiance(spec, 3, 3, -0.1)
        with pytest.raises(ValueError):
            pc.scene_radiance(spec, 3, 3, spec.duration + 1.0)
        with pytest.raises(ValueError):
            pc.scene_radiance(spec, 99, 0, 1.0)


class TestGroundTruthHR:
    def test_constant_profile(self):
        spec, _ = build_scene(hr_bpm=72.0)
        assert pc.ground_truth_hr(spec, 10.0) == pytest.approx(72.0)

    def test_linear_ramp_midpoint(self):
        hr = pc.HeartRateProfile(np.array([0.0, 60.0]), np.array([1.0, 1.5]))
        spec, _ = build_scene(duration=60.0, hr=hr)
        assert pc.ground_truth_hr(spec, 30.0) == pytest.approx(75.0)

    def test_defined_on_closed_interval(self):
        spec, _ = build_scene(duration=60.0)
        assert pc.ground_truth_hr(spec, 60.0) == pytest.approx(72.0)
        with pytest.raises(ValueError):
            pc.ground_truth_hr(spec, 60.1)


class TestEvents:
    def test_flicker_square_wave(self):
        ev = pc.IlluminationEvent("shadow_flicker", 0.0, 0.3, period=0.5, duty=0.5)
        assert ev.factor(0.1) == pytest.approx(0.3)
        assert ev.factor(0.3) == pytest.approx(1.0)
        assert ev.factor(0.6) == pytest.approx(0.3)

    def test_ramp_is_linear_then_holds(self):
        ev = pc.IlluminationEvent("ramp", 10.0, 3.0, duration=10.0)
        assert ev.factor(9.0) == pytest.approx(1.0)
        assert ev.factor(15.0) == pytest.approx(2.0)
        assert ev.factor(30.0) == pytest.approx(3.0)

    def test_sinusoid_magnitude_bound(self):
        with pytest.raises(ValueError):
            pc.IlluminationEvent("sinusoid", 0.0, 1.5)

    def test_step_with_duration_reverts(self):
        ev = pc.IlluminationEvent("step", 5.0, 2.0, duration=3.0)
        assert ev.factor(6.0) == pytest.approx(2.0)
        assert ev.factor(9.0) == pytest.approx(1.0)


class TestHeartRateProfile:
    def test_phase_integral_matches_quadrature(self):
        # Independent oracle: numerically integrate the interpolated frequency.
        from scipy.integrate import quad

        hr = pc.HeartRateProfile(np.array([5.0, 20.0, 40.0]), np.array([1.0, 1.5, 1.1]))
        for t in (0.0, 3.0, 12.5, 20.0, 33.3, 55.0):
            oracle = quad(hr.freq, 0.0, t, limit=200)[0]
            assert hr.integral(t) == pytest.approx(oracle, abs=1e-8)

    def test_constant_profile_phase(self):
        hr = pc.HeartRateProfile.constant(72.0)
        assert hr.phase(1.0) == pytest.approx(2.0 * math.pi * 1.2)


_event_strategy = st.one_of(
    st.builds(
        pc.IlluminationEvent,
        kind=st.just("step"),
        start=st.floats(0.0, 50.0),
        magnitude=st.floats(0.0, 10.0),
        duration=st.one_of(st.none(), st.floats(0.1, 30.0)),
    ),
    st.builds(
        pc.IlluminationEvent,
        kind=st.just("ramp"),
        start=st.floats(0.0, 50.0),
        magnitude=st.floats(0.0, 5.0),
        duration=st.floats(0.1, 30.0),
    ),
    st.builds(
        pc.IlluminationEvent,
        kind=st.just("sinusoid"),
        start=st.floats(0.0, 50.0),
        magnitude=st.floats(0.0, 1.0),
        duration=st.floats(0.1, 30.0),
        period=st.floats(0.1, 5.0),
    ),
    st.builds(
        pc.IlluminationEvent,
        kind=st.just("shadow_flicker"),
        start=st.floats(0.0, 50.0),
        magnitude=st.floats(0.0, 2.0),
        duration=st.floats(0.1, 30.0),
        period=st.floats(0.05, 2.0),
        duty=st.floats(0.1, 0.9),
    ),
)


class TestSceneInvariants:
    @settings(max_examples=100, deadline=None)
    @given(
        events=st.lists(_event_strategy, max_size=4),
        t=st.floats(0.0, 60.0),
        x=st.integers(0, 7),
        y=st.integers(0, 7),
    )
    def test_radiance_never_negative(self, events, t, x, y):
        spec, _ = build_scene(rel_amp=0.05, events=tuple(events))
        assert pc.scene_radiance(spec, x, y, t) >= 0.0

    @settings(max_examples=100, deadline=None)
    @given(
        r0=st.floats(0.05, 1.0),
        amp=st.floats(0.0, 0.1),
        t=st.floats(0.0, 60.0),
    )
    def test_reflectance_in_unit_band(self, r0, amp, t):
        spec, _ = build_scene(rel_amp=amp, r0_face=r0, channel_gains=(1.0, 1.0, 1.0))
        for ch in range(3):
            refl = spec.skin.reflectance(3, 3, t, ch, True)
            assert 0.0 < refl <= 1.1 + 1e-12

    def test_evaluation_is_bit_identical(self):
        ev = pc.IlluminationEvent("shadow_flicker", 1.0, 0.3, duration=40.0)
        spec1, _ = build_scene(rel_amp=0.05, events=(ev,), seed=5)
        spec2, _ = build_scene(rel_amp=0.05, events=(ev,), seed=5)
        ts = np.linspace(0.0, 59.9, 97)
        a = [pc.scene_radiance(spec1, 2, 3, t) for t in ts]
        b = [pc.scene_radiance(spec2, 2, 3, t) for t in ts]
        assert a == b


class TestValidation:
    def test_empty_roi_rejected(self):
        with pytest.raises(ValueError):
            pc.ScenarioSpec(
                duration=10.0,
                illumination=pc.IlluminationField(100.0),
                skin=pc.SkinReflectanceField(np.full((4, 4), 0.5)),
                roi=np.zeros((4, 4), dtype=bool),
            )

    def test_amplitude_cap_enforced(self):
        with pytest.raises(ValueError):
            pc.SkinReflectanceField(np.full((4, 4), 0.5), (0.2, 0.2, 0.2))

    def test_negative_base_level_rejected(self):
        with pytest.raises(ValueError):
            pc.IlluminationField(-1.0)
