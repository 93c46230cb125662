"""Laser-triangulation profilometry toolkit for extrusion 3D printing.

Subpackages cover the full measurement pipeline (subpixel laser-line
extraction, platform and track detection, ellipse fitting with geometric
residuals), gauge calibration and gage R&R statistics, a synthetic scene
generator that serves as the ground-truth oracle, and a closed-loop
layer-thickness control simulator.
"""

__version__ = "0.1.0"

from .calibration import (
    CalibrationMap,
    LengthMismatch,
    StepReport,
    ZeroSpan,
    apply_calibration,
    calibrate_from_gauge,
    calibration_from_pixel_pitch,
    load_calibration,
    save_calibration,
    step_height_report,
)
from .control import (
    ControlDecision,
    LayerBudgetExhausted,
    LayerState,
    NoPreviousLayer,
    ProcessModel,
    SimulationResult,
    TargetReached,
    control_add_skip,
    control_proportional,
    control_reslice,
    deposit_layer,
    run_simulation,
    standard_disturbance_model,
)
from .ellipse import DegenerateFit, EllipseFit, ellipse_residuals, fit_ellipse, sample_ellipse
from .grr import (
    GrrMeasurementSet,
    GrrResult,
    InsufficientTrials,
    grr_study,
    read_grr_csv,
    write_grr_csv,
)
from .imageio import read_image, read_pgm, read_profile_csv, write_pgm, write_profile_csv
from .measure import TrackMeasurement, measure_track, track_points
from .profile import (
    Frame,
    LaserProfile,
    NoPlatformSignal,
    PlatformBaseline,
    TrackDetection,
    detect_platform,
    detect_track,
    elevations_px,
    extract_laser_line,
)
from .synth import (
    MaterialModel,
    PlateauSpec,
    SceneSpec,
    TrackSpec,
    grr_dataset,
    load_scene,
    make_staircase_scenes,
    material_by_name,
    material_table,
    render_frame,
    save_scene,
    surface_height_um,
    true_line_rows,
)
