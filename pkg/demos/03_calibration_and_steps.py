"""Gauge calibration and the staircase validation report.

Scans a synthetic 5 mm gauge to fix the pixel-to-millimetre gain, then
measures a four-step staircase and prints the reference / measured /
deviation table.
"""

from trackscan import make_staircase_scenes, measure_track, render_frame, step_height_report
from trackscan.bench import staircase_calibration

cal = staircase_calibration()
print(f"calibration from 5 mm gauge: gain {cal.gain_mm_per_px:.6f} mm/px")

heights = [1.36, 2.28, 3.30, 4.28]
measured = []
for scene in make_staircase_scenes(heights):
    meas = measure_track(render_frame(scene), calibration=cal, with_ellipse=False)
    measured.append(meas.height_um / 1000.0)

report = step_height_report(measured, heights)
print(f"{'reference (mm)':>15s} {'measured (mm)':>15s} {'deviation (mm)':>15s}")
for ref, mes, dev in zip(report.reference_mm, report.measured_mm, report.deviation_mm):
    print(f"{ref:15.3f} {mes:15.3f} {dev:15.4f}")
print(f"max |deviation|: {report.max_abs_deviation_mm * 1000:.2f} um")
