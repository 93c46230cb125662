"""Command-line interface: extract | synth | bench | control | calibrate | grr.

Every command is deterministic for a given set of flags and seed: output
CSV/JSON/PGM files are byte-identical across reruns. Timing and progress
go to stderr only. Exit codes: 0 success, 1 configuration error, 2 data
error, 3 controller divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .bench import format_report, run_diffusion_bench, run_grr_bench, run_staircase_bench, write_report_csv
from .calibration import (
    calibrate_from_gauge,
    load_calibration,
    calibration_from_pixel_pitch,
    save_calibration,
    ZeroSpan,
)
from .control import (
    LayerBudgetExhausted,
    ProcessModel,
    SimulationResult,
    STRATEGIES,
    run_simulation,
    standard_disturbance_model,
)
from .ellipse import DegenerateFit
from .grr import grr_study, read_grr_csv, write_grr_csv
from .imageio import read_image, write_pgm, write_profile_csv
from .measure import measure_track
from .profile import NoPlatformSignal, band_columns, detect_platform, detect_track, extract_laser_line
from .synth import grr_dataset, ground_truth_dict, load_scene, make_staircase_scenes, render_frame

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_DIVERGED = 3

IMAGE_EXTENSIONS = (".pgm", ".png")


class ConfigError(Exception):
    pass


def _fmt(value) -> str:
    """Lossless CSV field: repr for floats round-trips exactly."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def read_measurements_csv(path) -> list[dict]:
    """Rows of an extract CSV with floats restored exactly (None for blanks)."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "frame_id,width_um,height_um,diffusion_um,found":
            raise ValueError("unexpected measurement CSV header")
        for line in fh:
            frame_id, width, height, diffusion, found = line.rstrip("\n").split(",")
            rows.append(
                {
                    "frame_id": frame_id,
                    "width_um": float(width) if width else None,
                    "height_um": float(height) if height else None,
                    "diffusion_um": float(diffusion) if diffusion else None,
                    "found": found == "true",
                }
            )
    return rows


def read_trace_csv(path) -> list[dict]:
    """Rows of a control trace CSV with floats restored exactly."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "layer,commanded_um,actual_um,measured_z_um,z_error_um,action":
            raise ValueError("unexpected trace CSV header")
        for line in fh:
            layer, commanded, actual, measured, z_error, action = line.rstrip("\n").split(",")
            rows.append(
                {
                    "layer": int(layer),
                    "commanded_um": float(commanded),
                    "actual_um": float(actual),
                    "measured_z_um": float(measured),
                    "z_error_um": float(z_error),
                    "action": action,
                }
            )
    return rows


def _collect_inputs(paths: list[str]) -> list[str]:
    """Expand files/directories into a sorted list of image paths."""
    out = []
    for p in paths:
        if os.path.isdir(p):
            for name in sorted(os.listdir(p)):
                if os.path.splitext(name)[1].lower() in IMAGE_EXTENSIONS:
                    out.append(os.path.join(p, name))
        elif os.path.isfile(p):
            out.append(p)
        else:
            raise ConfigError(f"input path does not exist: {p}")
    if not out:
        raise ConfigError("no input images found")
    return out


def _load_json_config(path, known_keys: set, label: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {label} file {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"{label} file must contain a JSON object")
    version = payload.pop("schema_version", 1)
    if version != 1:
        raise ConfigError(f"unsupported {label} schema_version {version}")
    unknown = set(payload) - known_keys
    if unknown:
        raise ConfigError(f"unknown keys in {label} file: {sorted(unknown)}")
    return payload


def _write_json(payload: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


# --- extract ------------------------------------------------------------------


def cmd_extract(args) -> int:
    try:
        inputs = _collect_inputs(args.inputs)
        calibration = (
            load_calibration(args.calibration)
            if args.calibration
            else calibration_from_pixel_pitch(args.pixel_pitch_um)
        )
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.profiles:
        os.makedirs(args.profiles, exist_ok=True)

    n_errors = 0
    n_found = 0
    n_done = 0
    t0 = time.perf_counter()
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("frame_id,width_um,height_um,diffusion_um,found\n")
        for path in inputs:
            frame_id = os.path.splitext(os.path.basename(path))[0]
            try:
                frame = read_image(path, pixel_pitch_um=args.pixel_pitch_um)
                meas = measure_track(
                    frame,
                    intensity_floor=args.floor,
                    threshold_px=args.threshold,
                    calibration=calibration,
                    run_length=args.run_length,
                    with_ellipse=not args.no_ellipse,
                )
            except (ValueError, OSError, NoPlatformSignal, DegenerateFit) as exc:
                print(f"error: {path}: {exc}", file=sys.stderr)
                fh.write(f"{frame_id},,,,false\n")
                n_errors += 1
                continue
            fh.write(
                f"{frame_id},{_fmt(meas.width_um)},{_fmt(meas.height_um)},"
                f"{_fmt(meas.diffusion_um)},{_fmt(meas.found)}\n"
            )
            if args.profiles:
                write_profile_csv(meas.profile, os.path.join(args.profiles, frame_id + ".csv"))
            n_done += 1
            n_found += int(meas.found)
    elapsed = time.perf_counter() - t0
    fps = n_done / elapsed if elapsed > 0 else float("inf")
    if args.summary:
        _write_json(
            {
                "frames_total": len(inputs),
                "frames_measured": n_done,
                "frames_with_errors": n_errors,
                "tracks_found": n_found,
            },
            args.summary,
        )
    print(f"processed {n_done}/{len(inputs)} frames in {elapsed:.2f} s ({fps:.1f} frames/s)", file=sys.stderr)
    return EXIT_DATA if n_errors else EXIT_OK


# --- synth --------------------------------------------------------------------


def cmd_synth(args) -> int:
    if args.staircase:
        scenes = make_staircase_scenes()
        os.makedirs(args.out, exist_ok=True)
        for i, scene in enumerate(scenes):
            scene.rng_seed = args.seed + i
            name = f"{args.prefix}_{i:04d}"
            frame = render_frame(scene, frame_id=name)
            write_pgm(frame, os.path.join(args.out, name + ".pgm"), maxval=args.maxval)
            _write_json(ground_truth_dict(scene), os.path.join(args.out, name + ".json"))
        print(f"wrote {len(scenes)} staircase frame(s) to {args.out}", file=sys.stderr)
        return EXIT_OK
    if not args.scene:
        print("error: provide a scene JSON or --staircase", file=sys.stderr)
        return EXIT_CONFIG
    try:
        scene = load_scene(args.scene)
    except (OSError, ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"error: invalid scene: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(args.out, exist_ok=True)
    for i in range(args.frames):
        scene.rng_seed = args.seed + i
        name = f"{args.prefix}_{i:04d}"
        frame = render_frame(scene, frame_id=name)
        write_pgm(frame, os.path.join(args.out, name + ".pgm"), maxval=args.maxval)
        _write_json(ground_truth_dict(scene), os.path.join(args.out, name + ".json"))
    print(f"wrote {args.frames} frame(s) to {args.out}", file=sys.stderr)
    return EXIT_OK


# --- calibrate ------------------------------------------------------------------


def cmd_calibrate(args) -> int:
    if not os.path.isfile(args.image):
        print(f"error: input path does not exist: {args.image}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        frame = read_image(args.image, pixel_pitch_um=args.pixel_pitch_um)
        profile = extract_laser_line(frame, args.floor)
        baseline = detect_platform(profile)
        det = detect_track(profile, baseline, args.threshold)
        if not det.found:
            print("error: no gauge detected above the platform", file=sys.stderr)
            return EXIT_DATA
        left_sl, right_sl = band_columns(profile.columns)
        platform_rows = np.concatenate(
            [
                profile.row_subpixel[left_sl][profile.valid[left_sl]],
                profile.row_subpixel[right_sl][profile.valid[right_sl]],
            ]
        )
        cols = np.arange(det.left_edge, det.right_edge + 1)
        gauge_rows = profile.row_subpixel[cols][profile.valid[cols]]
        cal = calibrate_from_gauge(platform_rows, gauge_rows, args.gauge_mm)
    except (ValueError, OSError, NoPlatformSignal, ZeroSpan) as exc:
        print(f"error: {args.image}: {exc}", file=sys.stderr)
        return EXIT_DATA
    save_calibration(cal, args.out)
    print(
        f"gain {cal.gain_mm_per_px!r} mm/px from {args.gauge_mm} mm gauge -> {args.out}",
        file=sys.stderr,
    )
    return EXIT_OK


# --- grr ------------------------------------------------------------------------


def cmd_grr(args) -> int:
    try:
        if args.synthetic:
            data = grr_dataset(
                parts=args.parts,
                operators=args.operators,
                trials=args.trials,
                seed=args.seed,
                carrier_roll_um=args.carrier_roll_um,
                trial_noise_um=args.trial_noise_um,
            )
            if args.save_csv:
                write_grr_csv(data, args.save_csv)
        elif args.data:
            if not os.path.isfile(args.data):
                print(f"error: input path does not exist: {args.data}", file=sys.stderr)
                return EXIT_CONFIG
            data = read_grr_csv(args.data)
        else:
            print("error: provide a data CSV or --synthetic", file=sys.stderr)
            return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    result = grr_study(data)
    payload = {
        "unit": result.unit,
        "repeatability_ev": result.repeatability_ev,
        "reproducibility_av": result.reproducibility_av,
        "part_variation_pv": result.part_variation_pv,
        "total_rr": result.total_rr,
        "total_variation": result.total_variation,
        "percent_rr": result.percent_rr,
        "parts": data.parts,
        "operators": data.operators,
        "trials": data.trials,
    }
    if args.out:
        _write_json(payload, args.out)
    print(
        f"EV {result.repeatability_ev:.3f}  AV {result.reproducibility_av:.3f}  "
        f"PV {result.part_variation_pv:.3f}  R&R {result.total_rr:.3f} {result.unit}  "
        f"({result.percent_rr:.1f}% of total variation)"
    )
    return EXIT_OK


# --- bench ----------------------------------------------------------------------


def cmd_bench(args) -> int:
    if args.table1:
        report = run_staircase_bench(seed=args.seed)
    elif args.table2:
        report = run_diffusion_bench(seed=args.seed)
    else:
        report = run_grr_bench(seed=args.seed)
    print(format_report(report))
    if args.out:
        write_report_csv(report, args.out)
    return EXIT_OK


# --- control --------------------------------------------------------------------


_MODEL_KEYS = {
    "thickness_gain",
    "thickness_bias_um",
    "process_noise_sigma_um",
    "measurement_noise_sigma_um",
    "seed",
}


def _write_trace_csv(result: SimulationResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("layer,commanded_um,actual_um,measured_z_um,z_error_um,action\n")
        for row in result.trace:
            fh.write(
                f"{row.layer},{_fmt(row.commanded_um)},{_fmt(row.actual_um)},"
                f"{_fmt(row.measured_z_um)},{_fmt(row.z_error_um)},{row.action}\n"
            )


def cmd_control(args) -> int:
    if args.model:
        try:
            payload = _load_json_config(args.model, _MODEL_KEYS, "model")
            model = ProcessModel(**payload)
        except (ConfigError, TypeError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        model = standard_disturbance_model()

    diverged = False
    try:
        result = run_simulation(
            n_layers=args.layers,
            nominal_um=args.nominal_um,
            strategy=args.strategy,
            model=model,
            seed=args.seed,
            kp=args.kp,
        )
    except LayerBudgetExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        result = exc.result
        diverged = True

    if args.out_trace:
        _write_trace_csv(result, args.out_trace)
    goal = result.nominal_um
    summary = {
        "strategy": result.strategy,
        "n_layers": result.n_layers,
        "nominal_um": result.nominal_um,
        "plan_height_um": result.plan_height_um,
        "seed": args.seed,
        "total_layers_deposited": result.total_layers_deposited,
        "final_abs_error_um": result.final_abs_error_um,
        "max_abs_error_um": result.max_abs_error_um,
        "goal_max_error_um": goal,
        "goal_met": (not diverged) and result.max_abs_error_um <= goal,
        "diverged": diverged,
    }
    if args.out_summary:
        _write_json(summary, args.out_summary)
    print(
        f"{result.strategy}: {result.total_layers_deposited} layers, "
        f"max |z-error| {result.max_abs_error_um:.2f} um, final {result.final_abs_error_um:.2f} um, "
        f"goal {'met' if summary['goal_met'] else 'NOT met'}"
    )
    return EXIT_DIVERGED if diverged else EXIT_OK


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trackscan",
        description="Laser-triangulation track metrology and layer-control toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="measure tracks in PGM/PNG frames")
    p.add_argument("inputs", nargs="+", help="image files or directories")
    p.add_argument("--out", required=True, help="measurement CSV path")
    p.add_argument("--floor", type=float, default=0.1, help="intensity floor (default 0.1)")
    p.add_argument("--threshold", type=float, default=3.0, help="track threshold in px (default 3)")
    p.add_argument("--run-length", type=int, default=3, help="edge run length (default 3)")
    p.add_argument("--calibration", help="calibration JSON (default: pixel pitch)")
    p.add_argument("--pixel-pitch-um", type=float, default=10.0, help="um per pixel (default 10)")
    p.add_argument("--profiles", help="directory for per-frame profile CSVs")
    p.add_argument("--no-ellipse", action="store_true", help="skip the ellipse fit")
    p.add_argument("--summary", help="run summary JSON path")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("synth", help="render synthetic frames with ground truth")
    p.add_argument("scene", nargs="?", help="scene JSON file")
    p.add_argument("--staircase", action="store_true", help="render the benchmark staircase")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--frames", type=int, default=1, help="number of frames (default 1)")
    p.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    p.add_argument("--prefix", default="frame", help="output name prefix (default 'frame')")
    p.add_argument("--maxval", type=int, default=65535, choices=(255, 65535), help="PGM maxval")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("calibrate", help="derive a calibration from a gauge scan")
    p.add_argument("image", help="gauge scan (PGM/PNG)")
    p.add_argument("--out", required=True, help="calibration JSON path")
    p.add_argument("--gauge-mm", type=float, default=5.0, help="gauge thickness (default 5)")
    p.add_argument("--floor", type=float, default=0.1)
    p.add_argument("--threshold", type=float, default=3.0)
    p.add_argument("--pixel-pitch-um", type=float, default=10.0)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("grr", help="gage R&R study from CSV or synthetic data")
    p.add_argument("data", nargs="?", help="CSV with header part,operator,trial,value")
    p.add_argument("--synthetic", action="store_true", help="use the synthetic pin dataset")
    p.add_argument("--parts", type=int, default=20)
    p.add_argument("--operators", type=int, default=3)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--carrier-roll-um", type=float, default=20.0)
    p.add_argument("--trial-noise-um", type=float, default=5.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--save-csv", help="also write the synthetic grid as CSV")
    p.add_argument("--out", help="result JSON path")
    p.set_defaults(func=cmd_grr)

    p = sub.add_parser("bench", help="synthetic reproduction benchmarks")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--table1", action="store_true", help="staircase step heights")
    group.add_argument("--table2", action="store_true", help="material diffusion recovery")
    group.add_argument("--grr", action="store_true", help="R&R band over 100 seeds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="report CSV path")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("control", help="closed-loop layer simulation")
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.add_argument("--layers", type=int, default=100)
    p.add_argument("--nominal-um", type=float, default=200.0)
    p.add_argument("--kp", type=float, default=1.0)
    p.add_argument("--model", help="process model JSON (default: standard disturbance)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-trace", help="trace CSV path")
    p.add_argument("--out-summary", help="summary JSON path")
    p.set_defaults(func=cmd_control)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags; map to the configuration error code
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    return args.func(args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
