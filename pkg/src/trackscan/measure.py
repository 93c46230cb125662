"""One-call track measurement: extraction, platform, track, ellipse."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calibration import CalibrationMap, calibration_from_pixel_pitch
from .ellipse import EllipseFit, fit_ellipse
from .profile import (
    Frame,
    LaserProfile,
    PlatformBaseline,
    TrackDetection,
    detect_platform,
    detect_track,
    elevations_px,
    extract_laser_line,
)


@dataclass
class TrackMeasurement:
    """Calibrated track measurement plus its pixel-space intermediates.

    width/height/diffusion are None when no track was found; diffusion is
    also None when the ellipse step was skipped or found too few points.
    """

    frame_id: str
    found: bool
    profile: LaserProfile
    baseline: PlatformBaseline
    detection: TrackDetection
    ellipse: EllipseFit | None = None
    width_um: float | None = None
    height_um: float | None = None
    diffusion_um: float | None = None


def track_points(
    profile: LaserProfile, baseline: PlatformBaseline, detection: TrackDetection
) -> np.ndarray:
    """(column, elevation_px) pairs of the valid columns between the edges."""
    cols = np.arange(detection.left_edge, detection.right_edge + 1)
    cols = cols[profile.valid[cols]]
    elev = elevations_px(profile, baseline)[cols]
    return np.column_stack([cols.astype(float), elev])


def measure_track(
    frame: Frame,
    intensity_floor: float = 0.1,
    threshold_px: float = 3.0,
    calibration: CalibrationMap | None = None,
    run_length: int = 3,
    with_ellipse: bool = True,
) -> TrackMeasurement:
    """Run the full detection chain on one frame.

    Elevation outputs are converted to micrometres through the calibration
    (defaulting to the frame's nominal pixel pitch). The ellipse is fitted
    in pixel space to the valid profile columns between the track edges;
    its mean absolute geometric residual, converted to micrometres, is the
    diffusion error. NoPlatformSignal and DegenerateFit propagate;
    with_ellipse=False skips the fit (flat-topped artifacts such as gauge
    or staircase scans have collinear tops that admit no ellipse).
    """
    if calibration is None:
        calibration = calibration_from_pixel_pitch(frame.pixel_pitch_um)
    profile = extract_laser_line(frame, intensity_floor)
    baseline = detect_platform(profile)
    detection = detect_track(profile, baseline, threshold_px, run_length)
    meas = TrackMeasurement(
        frame_id=frame.frame_id,
        found=detection.found,
        profile=profile,
        baseline=baseline,
        detection=detection,
    )
    if not detection.found:
        return meas

    gain_um = calibration.gain_mm_per_px * 1000.0
    meas.width_um = detection.width_px * gain_um
    meas.height_um = (
        calibration.gain_mm_per_px * detection.height_px + calibration.offset_mm
    ) * 1000.0
    if with_ellipse:
        pts = track_points(profile, baseline, detection)
        meas.ellipse = fit_ellipse(pts)
        meas.diffusion_um = meas.ellipse.mean_abs_residual * gain_um
    return meas
