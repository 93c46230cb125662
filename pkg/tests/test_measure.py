"""End-to-end track measurement on synthetic oracle frames."""

import numpy as np
import pytest

from trackscan import (
    DegenerateFit,
    Frame,
    NoPlatformSignal,
    SceneSpec,
    TrackSpec,
    calibrate_from_gauge,
    make_staircase_scenes,
    measure_track,
    render_frame,
    surface_height_um,
)
from trackscan.bench import staircase_calibration
from trackscan.measure import track_points


def test_noiseless_track_height_within_10um():
    scene = SceneSpec(
        width_px=160,
        height_px=120,
        platform_row=90.0,
        track=TrackSpec(center_x_px=80.0, width_um=300.0, height_um=150.0),
    )
    meas = measure_track(render_frame(scene))
    assert meas.found
    assert abs(meas.height_um - 150.0) <= 10.0
    assert abs(meas.width_um - 300.0) <= 2 * 3 * 10.0  # 2 x run_length px at 10 um/px


def test_zeros_frame_raises_no_platform():
    frame = Frame(intensities=np.zeros((32, 32)))
    with pytest.raises(NoPlatformSignal):
        measure_track(frame)


def test_no_track_short_circuits_ellipse():
    scene = SceneSpec(width_px=160, height_px=120, platform_row=90.0)
    meas = measure_track(render_frame(scene))
    assert not meas.found
    assert meas.ellipse is None
    assert meas.width_um is None
    assert meas.diffusion_um is None


def test_staircase_step_height_matches_ground_truth():
    calibration = staircase_calibration()
    for scene in make_staircase_scenes():
        frame = render_frame(scene)
        meas = measure_track(frame, calibration=calibration, with_ellipse=False)
        assert meas.found
        expected_mm = scene.plateau.height_mm
        assert abs(meas.height_um / 1000.0 - expected_mm) <= 0.010  # 1 px equivalent
        assert meas.ellipse is None


def test_plateau_with_ellipse_raises_degenerate():
    scene = make_staircase_scenes((2.0,))[0]
    frame = render_frame(scene)
    with pytest.raises(DegenerateFit):
        measure_track(frame, with_ellipse=True)


def test_track_points_exclude_baseline_columns():
    scene = SceneSpec(
        width_px=160,
        height_px=120,
        platform_row=90.0,
        track=TrackSpec(center_x_px=80.0, width_um=300.0, height_um=150.0),
    )
    meas = measure_track(render_frame(scene))
    pts = track_points(meas.profile, meas.baseline, meas.detection)
    assert pts[:, 0].min() >= meas.detection.left_edge
    assert pts[:, 0].max() <= meas.detection.right_edge


def test_ellipse_mirrors_track_geometry():
    scene = SceneSpec(
        width_px=200,
        height_px=120,
        platform_row=90.0,
        track=TrackSpec(center_x_px=100.0, width_um=600.0, height_um=200.0),
    )
    meas = measure_track(render_frame(scene), threshold_px=2.0)
    assert meas.found
    # noiseless: the fitted ellipse should be close to the generating one
    assert meas.ellipse.center_x == pytest.approx(100.0, abs=0.5)
    assert meas.ellipse.semi_axis_a == pytest.approx(30.0, abs=1.0)
    assert meas.ellipse.semi_axis_b == pytest.approx(20.0, abs=1.0)
    assert meas.diffusion_um < 2.0


def test_calibration_scales_output():
    scene = SceneSpec(
        width_px=160,
        height_px=120,
        platform_row=90.0,
        track=TrackSpec(center_x_px=80.0, width_um=300.0, height_um=150.0),
    )
    frame = render_frame(scene)
    cal = calibrate_from_gauge([400.0], [100.0], 6.0)  # 0.02 mm/px, double the pitch
    doubled = measure_track(frame, calibration=cal)
    nominal = measure_track(frame)
    assert doubled.height_um == pytest.approx(2.0 * nominal.height_um, rel=1e-9)
    assert doubled.width_um == pytest.approx(2.0 * nominal.width_um, rel=1e-9)


def test_accuracy_contract_sweep():
    # randomized noiseless scenes across the working envelope
    rng = np.random.default_rng(2718)
    for _ in range(60):
        width_um = rng.uniform(100.0, 300.0)
        height_um = rng.uniform(50.0, 200.0)
        center = 80.0 + rng.uniform(-3.0, 3.0)
        scene = SceneSpec(
            width_px=160,
            height_px=120,
            platform_row=90.0,
            track=TrackSpec(center_x_px=center, width_um=width_um, height_um=height_um),
        )
        meas = measure_track(render_frame(scene), threshold_px=1.0, with_ellipse=False)
        assert meas.found
        assert abs(meas.height_um - height_um) <= 10.0
        assert abs(meas.width_um - width_um) <= 2 * 3 * 10.0
