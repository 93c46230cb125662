"""Acceptance gate: every contract of the toolkit, one test per criterion.

Each test prints a single PASS/FAIL line so a bare `pytest -s
tests/test_acceptance.py` reads as a checklist. The synthetic scenes play
the role of the physical rig: every expected value is either analytic
ground truth or an independently computed oracle.
"""

import os
import time

import numpy as np
import pytest

from trackscan import (
    GrrMeasurementSet,
    LaserProfile,
    ProcessModel,
    SceneSpec,
    TrackSpec,
    detect_platform,
    detect_track,
    extract_laser_line,
    fit_ellipse,
    grr_dataset,
    grr_study,
    measure_track,
    render_frame,
    run_simulation,
    sample_ellipse,
    standard_disturbance_model,
)
from trackscan.bench import run_diffusion_bench, run_grr_bench, run_staircase_bench
from trackscan.cli import main
from trackscan.profile import band_columns
from trackscan.synth import save_scene

from oracles import (
    anova_oracle,
    dense_vertex_oracle,
    edge_scan_oracle,
    median_oracle,
    proportional_recurrence_oracle,
)


def report(index, label, passed, detail=""):
    verdict = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {index} {label}: {verdict}{suffix}")
    assert passed, f"criterion {index} failed: {label} {suffix}"


def test_criterion_1_diffusion_table_reproduction():
    t0 = time.perf_counter()
    bench = run_diffusion_bench(seed=0, frames_per_material=200)
    elapsed = time.perf_counter() - t0
    per_material = bench.rows[:-1]
    mean_row = bench.rows[-1]
    ok = (
        all(abs(r.deviation) <= 0.15 for r in per_material)
        and abs(mean_row.deviation) <= 0.10
        and elapsed < 60.0
    )
    worst = max(abs(r.deviation) for r in per_material)
    report(
        1,
        "material diffusion recovery (7 materials, ±15%, mean ±10%)",
        ok,
        f"worst material {worst * 100:+.1f}%, mean {mean_row.deviation * 100:+.1f}%, {elapsed:.1f}s",
    )


def test_criterion_2_staircase_reproduction():
    t0 = time.perf_counter()
    bench = run_staircase_bench(seed=0)
    elapsed = time.perf_counter() - t0
    deviations = {row.target: abs(row.deviation) for row in bench.rows}
    ok = (
        all(d <= 0.010 for d in deviations.values())
        and deviations[5.0] < 1e-6  # calibration step exact by construction
        and elapsed < 10.0
    )
    worst = max(deviations.values())
    report(
        2,
        "staircase step heights within 10 um",
        ok,
        f"worst |dev| {worst * 1000:.3f} um, calibration step {deviations[5.0] * 1000:.2e} um, {elapsed:.1f}s",
    )


def test_criterion_3_grr_band():
    t0 = time.perf_counter()
    rrs = []
    for seed in range(100):
        result = grr_study(grr_dataset(seed=seed))
        rrs.append(result.total_rr)
        # decomposition identities on every run
        assert result.total_rr**2 == pytest.approx(
            result.repeatability_ev**2 + result.reproducibility_av**2, rel=1e-9, abs=1e-12
        )
        assert result.total_variation**2 == pytest.approx(
            result.total_rr**2 + result.part_variation_pv**2, rel=1e-9, abs=1e-12
        )
    elapsed = time.perf_counter() - t0
    in_band = sum(1 for rr in rrs if 40.0 <= rr <= 60.0)
    ok = in_band >= 90 and elapsed < 30.0
    report(
        3,
        "total R&R in [40, 60] um for >= 90% of 100 seeds",
        ok,
        f"{in_band}/100 in band, median {np.median(rrs):.1f} um, {elapsed:.1f}s",
    )


def test_criterion_4_accuracy_contract():
    rng = np.random.default_rng(31415)
    run_length = 3
    worst_h = 0.0
    worst_w = 0.0
    failures = 0
    for _ in range(500):
        width_um = float(rng.uniform(100.0, 300.0))
        height_um = float(rng.uniform(50.0, 200.0))
        center = float(80.0 + rng.uniform(-4.0, 4.0))
        scene = SceneSpec(
            width_px=160,
            height_px=120,
            platform_row=90.0,
            track=TrackSpec(center_x_px=center, width_um=width_um, height_um=height_um),
        )
        meas = measure_track(
            render_frame(scene),
            threshold_px=1.0,
            run_length=run_length,
            with_ellipse=False,
        )
        if not meas.found:
            failures += 1
            continue
        err_h = abs(meas.height_um - height_um)
        err_w = abs(meas.width_um - width_um) / 10.0  # px at 10 um pitch
        worst_h = max(worst_h, err_h)
        worst_w = max(worst_w, err_w)
        if err_h > 10.0 or err_w > 2 * run_length:
            failures += 1
    ok = failures == 0
    report(
        4,
        "height within 10 um and width within 2*run_length px on 500 scenes",
        ok,
        f"worst height err {worst_h:.2f} um, worst width err {worst_w:.2f} px, {failures} failures",
    )


def test_criterion_5_throughput(tmp_path):
    frames_dir = tmp_path / "frames"
    scene = SceneSpec(
        width_px=640,
        height_px=480,
        platform_row=400.0,
        track=TrackSpec(center_x_px=320.0, width_um=300.0, height_um=150.0),
        sensor_noise_sigma=0.01,
        diffusion_mean_abs_um=6.0,
    )
    scene_path = tmp_path / "scene.json"
    save_scene(scene, scene_path)
    n_frames = 500
    assert (
        main(
            [
                "synth",
                str(scene_path),
                "--out",
                str(frames_dir),
                "--frames",
                str(n_frames),
                "--maxval",
                "255",
            ]
        )
        == 0
    )
    out_csv = tmp_path / "meas.csv"
    t0 = time.perf_counter()
    code = main(["extract", str(frames_dir), "--out", str(out_csv)])
    elapsed = time.perf_counter() - t0
    fps = n_frames / elapsed
    ok = code == 0 and fps >= 50.0
    report(
        5,
        "extract sustains >= 50 frames/s on 640x480",
        ok,
        f"{fps:.0f} frames/s over {n_frames} frames",
    )


def test_criterion_6_control_goal():
    nominal = 200.0
    strategies_ok = {}
    for strategy in ("proportional", "addskip", "reslice"):
        violations = 0
        for seed in range(100):
            result = run_simulation(
                100, nominal, strategy, standard_disturbance_model(), seed=seed
            )
            if result.max_abs_error_um > nominal:
                violations += 1
        strategies_ok[strategy] = violations
    open_loop_hits = sum(
        run_simulation(100, nominal, "none", standard_disturbance_model(), seed=s).max_abs_error_um
        > nominal
        for s in range(100)
    )
    ok = all(v == 0 for v in strategies_ok.values()) and open_loop_hits == 100
    report(
        6,
        "all three strategies hold |z-error| <= one layer in 100/100 seeds",
        ok,
        f"violations {strategies_ok}, open loop exceeding {open_loop_hits}/100",
    )


def test_criterion_7_oracle_equivalence():
    rng = np.random.default_rng(271828)

    # parabola vertex: closed form vs dense rational zoom and vs polyfit
    for _ in range(10):
        i0 = float(rng.uniform(0.5, 1.0))
        im = float(rng.uniform(0.0, i0 - 0.05))
        ip = float(rng.uniform(0.0, i0 - 0.05))
        delta = (im - ip) / (2.0 * (im - 2.0 * i0 + ip))
        assert abs(delta - dense_vertex_oracle(im, i0, ip)) <= 1e-9
    for _ in range(1000):
        i0 = float(rng.uniform(0.5, 1.0))
        im = float(rng.uniform(0.0, i0 - 1e-3))
        ip = float(rng.uniform(0.0, i0 - 1e-3))
        delta = (im - ip) / (2.0 * (im - 2.0 * i0 + ip))
        coeff = np.polyfit([-1.0, 0.0, 1.0], [im, i0, ip], 2)
        assert abs(delta - (-coeff[1] / (2 * coeff[0]))) <= 1e-9

    # platform medians vs sort-and-pick on 1000 random profiles
    for _ in range(1000):
        w = int(rng.integers(16, 64))
        rows = rng.uniform(0.0, 100.0, w)
        valid = rng.random(w) < 0.8
        left_sl, right_sl = band_columns(w)
        valid[int(rng.integers(0, max(1, w // 8)))] = True
        valid[w - 1 - int(rng.integers(0, max(1, w // 8)))] = True
        profile = LaserProfile(row_subpixel=rows, valid=valid)
        baseline = detect_platform(profile)
        assert baseline.left_median == pytest.approx(
            median_oracle(rows[left_sl][valid[left_sl]]), abs=1e-12
        )
        assert baseline.right_median == pytest.approx(
            median_oracle(rows[right_sl][valid[right_sl]]), abs=1e-12
        )

    # edge scans vs brute force on 1000 random elevation sequences
    for _ in range(1000):
        w = int(rng.integers(16, 80))
        run_length = int(rng.integers(1, 5))
        rows = np.full(w, 50.0)
        bump = rng.random(w) < 0.35
        rows[bump] -= rng.uniform(3.5, 9.0, int(bump.sum()))
        left_sl, right_sl = band_columns(w)
        rows[left_sl] = 50.0
        rows[right_sl] = 50.0
        profile = LaserProfile(row_subpixel=rows, valid=np.ones(w, dtype=bool))
        baseline = detect_platform(profile)
        det = detect_track(profile, baseline, threshold_px=3.0, run_length=run_length)
        qualifies = list(50.0 - rows > 3.0)
        left, right = edge_scan_oracle(qualifies, run_length)
        if left is None or right is None or left >= right:
            assert not det.found
        elif det.found:
            assert (det.left_edge, det.right_edge) == (left, right)

    # ANOVA vs explicit sums of squares on every p, o <= 4, r in [2, 4]
    for p in range(1, 5):
        for o in range(1, 5):
            for r in range(2, 5):
                values = rng.normal(50.0, 3.0, (p, o, r)) + rng.normal(0.0, 2.0, (p, 1, 1))
                mine = grr_study(GrrMeasurementSet(values))
                ev, av, pv, rr, tv = anova_oracle(values)
                assert mine.repeatability_ev == pytest.approx(ev, rel=1e-9, abs=1e-12)
                assert mine.reproducibility_av == pytest.approx(av, rel=1e-9, abs=1e-12)
                assert mine.part_variation_pv == pytest.approx(pv, rel=1e-9, abs=1e-12)
                assert mine.total_rr == pytest.approx(rr, rel=1e-9, abs=1e-12)
                assert mine.total_variation == pytest.approx(tv, rel=1e-9, abs=1e-12)

    # ellipse round trip on 1000 random ellipses
    for _ in range(1000):
        a = float(rng.uniform(5.0, 80.0))
        b = float(rng.uniform(2.0, a / 1.1))
        cx, cz = (float(v) for v in rng.uniform(-100.0, 100.0, 2))
        rot = float(rng.uniform(0.0, np.pi))
        fit = fit_ellipse(sample_ellipse(cx, cz, a, b, rot, int(rng.integers(8, 32))))
        assert fit.center_x == pytest.approx(cx, rel=1e-6, abs=1e-6)
        assert fit.center_z == pytest.approx(cz, rel=1e-6, abs=1e-6)
        assert fit.semi_axis_a == pytest.approx(a, rel=1e-6)
        assert fit.semi_axis_b == pytest.approx(b, rel=1e-6)
        rot_diff = (fit.rotation - rot) % np.pi
        assert min(rot_diff, np.pi - rot_diff) < 1e-6

    # proportional control trace vs the closed-form recurrence
    for kp in (0.5, 1.0, 1.5):
        model = ProcessModel(thickness_gain=1.0, thickness_bias_um=10.0)
        result = run_simulation(60, 200.0, "proportional", model, seed=0, kp=kp)
        closed = proportional_recurrence_oracle(kp, 10.0, 60)
        for row, expected in zip(result.trace, closed):
            assert row.z_error_um == pytest.approx(expected, rel=1e-9, abs=1e-9)

    report(7, "all brute-force oracle equivalences hold", True)


def test_criterion_8_determinism(tmp_path):
    scene = SceneSpec(
        width_px=160,
        height_px=120,
        platform_row=90.0,
        track=TrackSpec(center_x_px=80.0, width_um=300.0, height_um=150.0),
        diffusion_mean_abs_um=6.0,
        sensor_noise_sigma=0.01,
    )
    scene_path = tmp_path / "scene.json"
    save_scene(scene, scene_path)
    gauge_scene = SceneSpec(width_px=192, height_px=576, platform_row=540.0)
    from trackscan import PlateauSpec

    gauge_scene.plateau = PlateauSpec(center_x_px=96.0, width_um=800.0, height_mm=5.0)
    gauge_path = tmp_path / "gauge.json"
    save_scene(gauge_scene, gauge_path)

    def run_everything(root):
        os.makedirs(root)
        frames = os.path.join(root, "frames")
        assert main(["synth", str(scene_path), "--out", frames, "--frames", "3", "--seed", "8"]) == 0
        gauge_dir = os.path.join(root, "gauge")
        assert main(["synth", str(gauge_path), "--out", gauge_dir, "--frames", "1"]) == 0
        assert (
            main(
                [
                    "calibrate",
                    os.path.join(gauge_dir, "frame_0000.pgm"),
                    "--out",
                    os.path.join(root, "cal.json"),
                ]
            )
            == 0
        )
        assert (
            main(
                [
                    "extract",
                    frames,
                    "--out",
                    os.path.join(root, "meas.csv"),
                    "--calibration",
                    os.path.join(root, "cal.json"),
                    "--profiles",
                    os.path.join(root, "profiles"),
                ]
            )
            == 0
        )
        assert main(["grr", "--synthetic", "--seed", "5", "--out", os.path.join(root, "rr.json")]) == 0
        assert main(["bench", "--grr", "--seed", "1", "--out", os.path.join(root, "bench_grr.csv")]) == 0
        assert main(["bench", "--table1", "--out", os.path.join(root, "bench_t1.csv")]) == 0
        assert (
            main(
                [
                    "control",
                    "--strategy",
                    "reslice",
                    "--layers",
                    "60",
                    "--seed",
                    "3",
                    "--out-trace",
                    os.path.join(root, "trace.csv"),
                    "--out-summary",
                    os.path.join(root, "summary.json"),
                ]
            )
            == 0
        )

    def tree_bytes(root):
        out = {}
        for dirpath, _, files in os.walk(root):
            for name in files:
                path = os.path.join(dirpath, name)
                with open(path, "rb") as fh:
                    out[os.path.relpath(path, root)] = fh.read()
        return out

    run_everything(str(tmp_path / "run1"))
    run_everything(str(tmp_path / "run2"))
    first = tree_bytes(tmp_path / "run1")
    second = tree_bytes(tmp_path / "run2")
    ok = first == second and len(first) > 10
    report(
        8,
        "all commands produce byte-identical outputs on rerun",
        ok,
        f"{len(first)} files compared",
    )
