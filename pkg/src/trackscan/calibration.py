"""Gauge-based pixel-to-millimetre calibration and step-height reporting.

Calibration scans a rectangular gauge of known thickness and assumes the
whole working range maps linearly to pixels, anchored so the platform
itself reads exactly 0 mm and the gauge top exactly its thickness.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class ZeroSpan(Exception):
    """Platform and gauge medians coincide, so no scale can be derived."""


class LengthMismatch(Exception):
    """Measured and reference step lists differ in length."""


@dataclass
class CalibrationMap:
    """Linear pixel-elevation to millimetre mapping."""

    gain_mm_per_px: float
    offset_mm: float = 0.0
    gauge_mm: float | None = None

    def __post_init__(self):
        if not self.gain_mm_per_px > 0:
            raise ValueError("gain_mm_per_px must be positive")

    def apply(self, elevation_px):
        return apply_calibration(self, elevation_px)


def calibrate_from_gauge(
    platform_rows, gauge_rows, gauge_thickness_mm: float = 5.0
) -> CalibrationMap:
    """Build a CalibrationMap from laser-line rows on the platform and gauge top.

    gain = thickness / |median(platform rows) - median(gauge rows)|, offset 0,
    so heights are measured relative to the platform median and the two
    anchor points map exactly to 0 and the gauge thickness.
    """
    platform_rows = np.asarray(platform_rows, dtype=float)
    gauge_rows = np.asarray(gauge_rows, dtype=float)
    if platform_rows.size == 0 or gauge_rows.size == 0:
        raise ValueError("platform_rows and gauge_rows must be non-empty")
    if not gauge_thickness_mm > 0:
        raise ValueError("gauge_thickness_mm must be positive")
    span = abs(float(np.median(platform_rows)) - float(np.median(gauge_rows)))
    if span == 0.0:
        raise ZeroSpan("platform and gauge medians coincide")
    return CalibrationMap(
        gain_mm_per_px=gauge_thickness_mm / span,
        offset_mm=0.0,
        gauge_mm=gauge_thickness_mm,
    )


def apply_calibration(cal: CalibrationMap, elevation_px):
    """Millimetres for a pixel elevation above the platform (linear map)."""
    out = cal.gain_mm_per_px * np.asarray(elevation_px, dtype=float) + cal.offset_mm
    return float(out) if np.ndim(elevation_px) == 0 else out


def calibration_from_pixel_pitch(pixel_pitch_um: float) -> CalibrationMap:
    """Nominal calibration when no gauge scan is available."""
    return CalibrationMap(gain_mm_per_px=pixel_pitch_um / 1000.0, offset_mm=0.0)


def save_calibration(cal: CalibrationMap, path) -> None:
    payload = {
        "gain_mm_per_px": cal.gain_mm_per_px,
        "offset_mm": cal.offset_mm,
        "gauge_mm": cal.gauge_mm,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_calibration(path) -> CalibrationMap:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    known = {"gain_mm_per_px", "offset_mm", "gauge_mm"}
    unknown = set(payload) - known
    if unknown:
        raise ValueError(f"unknown calibration keys: {sorted(unknown)}")
    if "gain_mm_per_px" not in payload:
        raise ValueError("calibration file lacks gain_mm_per_px")
    return CalibrationMap(
        gain_mm_per_px=float(payload["gain_mm_per_px"]),
        offset_mm=float(payload.get("offset_mm", 0.0)),
        gauge_mm=None if payload.get("gauge_mm") is None else float(payload["gauge_mm"]),
    )


@dataclass
class StepReport:
    """Per-step comparison of measured against reference heights (mm)."""

    reference_mm: np.ndarray
    measured_mm: np.ndarray
    deviation_mm: np.ndarray
    max_abs_deviation_mm: float


def step_height_report(measured_heights_mm, reference_heights_mm) -> StepReport:
    """Deviation table measured - reference, plus the worst absolute deviation."""
    measured = np.asarray(measured_heights_mm, dtype=float)
    reference = np.asarray(reference_heights_mm, dtype=float)
    if measured.size == 0 or reference.size == 0:
        raise LengthMismatch("step lists must be non-empty")
    if measured.shape != reference.shape:
        raise LengthMismatch(
            f"measured has {measured.size} steps, reference has {reference.size}"
        )
    deviation = measured - reference
    return StepReport(
        reference_mm=reference,
        measured_mm=measured,
        deviation_mm=deviation,
        max_abs_deviation_mm=float(np.max(np.abs(deviation))),
    )


def write_step_report_csv(report: StepReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("step,reference_mm,measured_mm,deviation_mm\n")
        for i in range(report.reference_mm.size):
            fh.write(
                f"{i + 1},{float(report.reference_mm[i])!r},"
                f"{float(report.measured_mm[i])!r},{float(report.deviation_mm[i])!r}\n"
            )


def read_step_report_csv(path) -> StepReport:
    reference = []
    measured = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "step,reference_mm,measured_mm,deviation_mm":
            raise ValueError("unexpected step report CSV header")
        for line in fh:
            _, ref, mes, _ = line.rstrip("\n").split(",")
            reference.append(float(ref))
            measured.append(float(mes))
    return step_height_report(measured, reference)
