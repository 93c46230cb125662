"""Synthetic reproduction benchmarks for the measurement pipeline.

Each benchmark renders scenes with exactly known ground truth, runs the
full measurement chain on them, and reports measured-versus-target rows
with a pass/fail verdict per tolerance:

* diffusion: seven materials, injected per-column line displacement, the
  recovered mean-absolute ellipse residual must stay within +-15% per
  material and the seven-material mean within +-10% of 8.55 um;
* staircase: step heights 1.36/2.28/3.30/4.28 mm plus the 5 mm gauge used
  for calibration, each measured to within 10 um (one pixel equivalent);
* R&R: 100 seeded pin-measurement grids, total R&R inside [40, 60] um for
  at least 90% of the seeds.

The diffusion scene uses a wide, flat bead (1800 x 300 um) rather than the
narrowest printable track: more arc samples and a gentler slope keep the
ellipse fit well conditioned, and the audited quantity is the ratio of
recovered to injected displacement, which does not depend on bead size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calibration import calibrate_from_gauge, step_height_report
from .grr import grr_study
from .measure import measure_track
from .profile import band_columns, detect_platform, detect_track, extract_laser_line
from .synth import (
    DEFAULT_STEP_HEIGHTS_MM,
    SceneSpec,
    TrackSpec,
    grr_dataset,
    make_staircase_scenes,
    material_table,
    render_frame,
    staircase_base_scene,
)

DIFFUSION_FRAMES_PER_MATERIAL = 200
DIFFUSION_MATERIAL_RTOL = 0.15
DIFFUSION_MEAN_TARGET_UM = 8.55
DIFFUSION_MEAN_RTOL = 0.10

STAIRCASE_TOL_MM = 0.010  # one pixel at the default 10 um pitch

GRR_SEEDS = 100
GRR_BAND_UM = (40.0, 60.0)
GRR_MIN_FRACTION = 0.9

_DIFFUSION_SCENE = dict(
    width_px=280,
    height_px=140,
    pixel_pitch_um=10.0,
    platform_row=105.0,
    laser_psf_sigma_px=1.2,
    sensor_noise_sigma=0.005,
)
_DIFFUSION_TRACK = dict(center_x_px=140.0, width_um=1800.0, height_um=300.0)
_DIFFUSION_THRESHOLD_PX = 18.0


@dataclass
class BenchRow:
    label: str
    target: float
    measured: float
    deviation: float
    passed: bool


@dataclass
class BenchReport:
    name: str
    rows: list[BenchRow]
    passed: bool
    notes: str = ""


def run_diffusion_bench(
    seed: int = 0, frames_per_material: int = DIFFUSION_FRAMES_PER_MATERIAL
) -> BenchReport:
    """Recover the per-material diffusion magnitudes from rendered frames."""
    rows = []
    recovered_all = []
    for mi, mat in enumerate(material_table()):
        values = []
        for i in range(frames_per_material):
            scene = SceneSpec(
                track=TrackSpec(**_DIFFUSION_TRACK),
                diffusion_mean_abs_um=mat.diffusion_mean_abs_um,
                rng_seed=seed * 1_000_003 + mi * 10_007 + i,
                **_DIFFUSION_SCENE,
            )
            meas = measure_track(render_frame(scene), threshold_px=_DIFFUSION_THRESHOLD_PX)
            if meas.found and meas.diffusion_um is not None:
                values.append(meas.diffusion_um)
        recovered = float(np.mean(values))
        recovered_all.append(recovered)
        deviation = recovered / mat.diffusion_mean_abs_um - 1.0
        rows.append(
            BenchRow(
                label=mat.name,
                target=mat.diffusion_mean_abs_um,
                measured=recovered,
                deviation=deviation,
                passed=abs(deviation) <= DIFFUSION_MATERIAL_RTOL,
            )
        )
    mean_recovered = float(np.mean(recovered_all))
    mean_dev = mean_recovered / DIFFUSION_MEAN_TARGET_UM - 1.0
    rows.append(
        BenchRow(
            label="mean of 7 materials",
            target=DIFFUSION_MEAN_TARGET_UM,
            measured=mean_recovered,
            deviation=mean_dev,
            passed=abs(mean_dev) <= DIFFUSION_MEAN_RTOL,
        )
    )
    return BenchReport(
        name="diffusion",
        rows=rows,
        passed=all(r.passed for r in rows),
        notes=f"{frames_per_material} frames per material, values in um",
    )


def staircase_calibration(seed: int = 0):
    """CalibrationMap from a rendered scan of the 5 mm gauge plateau."""
    base = staircase_base_scene()
    gauge_scene = make_staircase_scenes((5.0,), base=base)[0]
    gauge_scene.rng_seed = seed
    frame = render_frame(gauge_scene, frame_id="gauge-5mm")
    profile = extract_laser_line(frame)
    left_sl, right_sl = band_columns(profile.columns)
    platform_rows = np.concatenate(
        [
            profile.row_subpixel[left_sl][profile.valid[left_sl]],
            profile.row_subpixel[right_sl][profile.valid[right_sl]],
        ]
    )
    baseline = detect_platform(profile)
    det = detect_track(profile, baseline, threshold_px=3.0)
    cols = np.arange(det.left_edge, det.right_edge + 1)
    gauge_rows = profile.row_subpixel[cols][profile.valid[cols]]
    return calibrate_from_gauge(platform_rows, gauge_rows, gauge_thickness_mm=5.0)


def run_staircase_bench(seed: int = 0) -> BenchReport:
    """Measure the benchmark staircase against its synthetic ground truth."""
    calibration = staircase_calibration(seed)
    heights = list(DEFAULT_STEP_HEIGHTS_MM) + [5.0]
    scenes = make_staircase_scenes(DEFAULT_STEP_HEIGHTS_MM) + make_staircase_scenes((5.0,))
    measured = []
    for scene, h in zip(scenes, heights):
        scene.rng_seed = seed
        frame = render_frame(scene, frame_id=f"step-{h}")
        meas = measure_track(
            frame, threshold_px=3.0, calibration=calibration, with_ellipse=False
        )
        measured.append(meas.height_um / 1000.0 if meas.found else float("nan"))
    report = step_height_report(measured, heights)
    rows = [
        BenchRow(
            label=f"step {heights[i]:.2f} mm",
            target=heights[i],
            measured=float(report.measured_mm[i]),
            deviation=float(report.deviation_mm[i]),
            passed=abs(report.deviation_mm[i]) <= STAIRCASE_TOL_MM,
        )
        for i in range(len(heights))
    ]
    return BenchReport(
        name="staircase",
        rows=rows,
        passed=all(r.passed for r in rows),
        notes="heights in mm, tolerance 0.010 mm",
    )


def run_grr_bench(seed: int = 0, n_seeds: int = GRR_SEEDS) -> BenchReport:
    """Total R&R of seeded synthetic pin studies against the [40, 60] um band."""
    lo, hi = GRR_BAND_UM
    in_band = 0
    values = []
    for k in range(n_seeds):
        data = grr_dataset(seed=seed + k)
        result = grr_study(data)
        rr = result.total_rr
        values.append(rr)
        if lo <= rr <= hi:
            in_band += 1
        ev, av, pv = result.repeatability_ev, result.reproducibility_av, result.part_variation_pv
        if abs(rr**2 - (ev**2 + av**2)) > 1e-9 * max(rr**2, 1.0):
            raise AssertionError("R&R variance decomposition identity violated")
        if abs(result.total_variation**2 - (rr**2 + pv**2)) > 1e-9 * max(
            result.total_variation**2, 1.0
        ):
            raise AssertionError("total variation identity violated")
    values = np.asarray(values)
    fraction = in_band / n_seeds
    rows = [
        BenchRow(
            label=f"seeds in [{lo:.0f}, {hi:.0f}] um",
            target=GRR_MIN_FRACTION,
            measured=fraction,
            deviation=fraction - GRR_MIN_FRACTION,
            passed=fraction >= GRR_MIN_FRACTION,
        ),
        BenchRow(
            label="median total R&R (um)",
            target=50.0,
            measured=float(np.median(values)),
            deviation=float(np.median(values)) - 50.0,
            passed=True,
        ),
    ]
    return BenchReport(
        name="grr",
        rows=rows,
        passed=all(r.passed for r in rows),
        notes=f"{n_seeds} seeds, dataset defaults (20 parts x 3 operators x 3 trials)",
    )


def format_report(report: BenchReport) -> str:
    lines = [f"benchmark: {report.name} ({report.notes})"]
    lines.append(f"{'case':34s} {'target':>12s} {'measured':>12s} {'deviation':>12s}  verdict")
    for row in report.rows:
        verdict = "PASS" if row.passed else "FAIL"
        lines.append(
            f"{row.label:34s} {row.target:12.4f} {row.measured:12.4f} "
            f"{row.deviation:+12.4f}  {verdict}"
        )
    lines.append(f"overall: {'PASS' if report.passed else 'FAIL'}")
    return "\n".join(lines)


def write_report_csv(report: BenchReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("case,target,measured,deviation,passed\n")
        for row in report.rows:
            fh.write(
                f"{row.label},{float(row.target)!r},{float(row.measured)!r},"
                f"{float(row.deviation)!r},{'true' if row.passed else 'false'}\n"
            )
