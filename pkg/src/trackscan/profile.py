"""Laser-line extraction and track detection on triangulation frames.

The measurement chain works column by column on a grayscale frame: find the
brightest pixel of each column, refine it to subpixel resolution with a
3-point parabola, take the platform level from the outer 1/8-width bands,
and locate the deposited track as the region where the line rises above the
platform by more than a threshold for a minimum run of columns.

Image rows increase downward, so a higher surface shows up at a *smaller*
row index. Elevations returned by this module count upward (positive above
the platform) regardless of that convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NoPlatformSignal(Exception):
    """A platform band contains no valid laser-line columns."""


# Image z-axis points down; elevation = baseline_row - line_row counts upward.
ROW_AXIS_DOWN = True

MIN_FRAME_SIDE = 16  # keeps both 1/8-width platform bands >= 2 columns


@dataclass
class Frame:
    """Grayscale sensor frame with intensities normalized to [0, 1].

    pixel_pitch_um is the size of one pixel in micrometres, assumed equal
    horizontally and vertically.
    """

    intensities: np.ndarray
    frame_id: str = ""
    pixel_pitch_um: float = 10.0

    def __post_init__(self):
        self.intensities = np.asarray(self.intensities, dtype=float)
        if self.intensities.ndim != 2:
            raise ValueError("frame intensities must be a 2-d array")
        h, w = self.intensities.shape
        if w < MIN_FRAME_SIDE or h < MIN_FRAME_SIDE:
            raise ValueError(
                f"frame must be at least {MIN_FRAME_SIDE}x{MIN_FRAME_SIDE} pixels, got {w}x{h}"
            )
        lo = self.intensities.min()
        hi = self.intensities.max()
        if not (np.isfinite(lo) and np.isfinite(hi)) or lo < 0.0 or hi > 1.0:
            raise ValueError("frame intensities must lie in [0, 1]")
        if not self.pixel_pitch_um > 0:
            raise ValueError("pixel_pitch_um must be positive")

    @property
    def width(self) -> int:
        return self.intensities.shape[1]

    @property
    def height(self) -> int:
        return self.intensities.shape[0]


@dataclass
class LaserProfile:
    """Per-column subpixel row position of the laser line.

    row_subpixel is NaN wherever valid is False.
    """

    row_subpixel: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        self.row_subpixel = np.asarray(self.row_subpixel, dtype=float)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.row_subpixel.shape != self.valid.shape or self.row_subpixel.ndim != 1:
            raise ValueError("row_subpixel and valid must be 1-d arrays of equal length")

    @property
    def columns(self) -> int:
        return self.row_subpixel.size


@dataclass
class PlatformBaseline:
    """Platform level anchored at the two 1/8-width band centers.

    baseline_at() interpolates linearly between the band centers and
    extrapolates with the same slope out to the frame edges.
    """

    left_median: float
    right_median: float
    left_center: float
    right_center: float

    def baseline_at(self, column):
        c = np.asarray(column, dtype=float)
        frac = (c - self.left_center) / (self.right_center - self.left_center)
        out = self.left_median + (self.right_median - self.left_median) * frac
        return float(out) if np.isscalar(column) else out


@dataclass
class TrackDetection:
    """Detected track edges and center height, all in pixel units."""

    found: bool
    left_edge: int | None = None
    right_edge: int | None = None
    center: int | None = None
    width_px: int | None = None
    height_px: float | None = None


def band_columns(width: int) -> tuple[slice, slice]:
    """Column slices of the left and right platform bands (edge to width/8)."""
    band = width // 8
    return slice(0, band), slice(width - band, width)


def band_centers(width: int) -> tuple[float, float]:
    """Center column of each platform band."""
    band = width // 8
    return (band - 1) / 2.0, (2 * width - band - 1) / 2.0


def extract_laser_line(frame: Frame, intensity_floor: float = 0.1) -> LaserProfile:
    """Locate the laser line at subpixel resolution, one sample per column.

    Each column takes the brightest pixel (ties broken toward the smaller
    row) and its two vertical neighbours, fits a parabola through the three
    intensities, and reports the vertex row. A column is invalid when its
    peak is not brighter than intensity_floor, sits on the first or last
    row, or the three samples are not strictly concave.

    The vertex depends only on intensity differences, so adding a constant
    to a column or scaling it by k > 0 does not move the result.
    """
    if not 0.0 <= intensity_floor < 1.0:
        raise ValueError("intensity_floor must lie in [0, 1)")
    inten = frame.intensities
    h, w = inten.shape
    cols = np.arange(w)
    r0 = np.argmax(inten, axis=0)  # argmax picks the first (smallest) row on ties
    peak = inten[r0, cols]
    interior = (r0 >= 1) & (r0 <= h - 2)
    rc = np.clip(r0, 1, h - 2)
    i_minus = inten[rc - 1, cols]
    i_zero = inten[rc, cols]
    i_plus = inten[rc + 1, cols]
    second_diff = i_minus - 2.0 * i_zero + i_plus
    valid = interior & (peak > intensity_floor) & (second_diff < 0.0)

    # vertex offset of the parabola through (-1, i_minus), (0, i_zero), (+1, i_plus)
    delta = np.zeros(w)
    np.divide(i_minus - i_plus, 2.0 * second_diff, out=delta, where=second_diff < 0.0)
    rows = np.where(valid, r0 + delta, np.nan)
    return LaserProfile(row_subpixel=rows, valid=valid)


def detect_platform(profile: LaserProfile) -> PlatformBaseline:
    """Platform level from the median line row of each 1/8-width edge band.

    Raises NoPlatformSignal when either band has no valid column. Medians
    of an even count are the mean of the two middle order statistics.
    """
    w = profile.columns
    left_sl, right_sl = band_columns(w)
    left_rows = profile.row_subpixel[left_sl][profile.valid[left_sl]]
    right_rows = profile.row_subpixel[right_sl][profile.valid[right_sl]]
    if left_rows.size == 0:
        raise NoPlatformSignal("no valid laser-line columns in the left platform band")
    if right_rows.size == 0:
        raise NoPlatformSignal("no valid laser-line columns in the right platform band")
    left_center, right_center = band_centers(w)
    return PlatformBaseline(
        left_median=float(np.median(left_rows)),
        right_median=float(np.median(right_rows)),
        left_center=left_center,
        right_center=right_center,
    )


def elevations_px(profile: LaserProfile, baseline: PlatformBaseline) -> np.ndarray:
    """Per-column elevation above the platform in pixels (NaN where invalid)."""
    return baseline.baseline_at(np.arange(profile.columns)) - profile.row_subpixel


def detect_track(
    profile: LaserProfile,
    baseline: PlatformBaseline,
    threshold_px: float = 3.0,
    run_length: int = 3,
) -> TrackDetection:
    """Find the deposited track as a run of columns elevated above the platform.

    A column qualifies when it is valid and its elevation strictly exceeds
    threshold_px. The left edge is the first column that starts a run of at
    least run_length consecutive qualifying columns; the right edge is the
    symmetric scan from the right. The height is the median elevation of
    the valid columns among {center-1, center, center+1}.

    Absence of a track is reported with found=False, never an exception.
    """
    if threshold_px <= 0:
        raise ValueError("threshold_px must be positive")
    if run_length < 1:
        raise ValueError("run_length must be >= 1")
    w = profile.columns
    elev = elevations_px(profile, baseline)
    qualifies = profile.valid & (elev > threshold_px)
    if run_length > w:
        return TrackDetection(found=False)
    window = np.convolve(qualifies.astype(int), np.ones(run_length, dtype=int), mode="valid")
    starts = np.flatnonzero(window == run_length)
    if starts.size == 0:
        return TrackDetection(found=False)
    left_edge = int(starts[0])
    right_edge = int(starts[-1]) + run_length - 1
    if left_edge >= right_edge:
        return TrackDetection(found=False)

    center = int(np.floor((left_edge + right_edge) / 2.0 + 0.5))  # half rounds up
    cand = np.unique(np.clip([center - 1, center, center + 1], 0, w - 1))
    cand = cand[profile.valid[cand]]
    if cand.size == 0:
        return TrackDetection(found=False)
    height = float(np.median(elev[cand]))
    return TrackDetection(
        found=True,
        left_edge=left_edge,
        right_edge=right_edge,
        center=center,
        width_px=right_edge - left_edge,
        height_px=height,
    )
