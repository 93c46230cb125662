"""Synthetic ground-truth scenes for the triangulation pipeline.

Scenes describe a platform (optionally rolled), an elliptic track or a
rectangular plateau on top of it, and the optical chain: a vertical
Gaussian laser stripe, per-column diffusion displacement of the stripe
inside translucent material, and white sensor noise. Rendering is a pure
function of (scene, seed), which makes every rendered frame usable as an
oracle with exactly known geometry.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace

import numpy as np

from .grr import GrrMeasurementSet
from .profile import Frame, band_centers


@dataclass
class TrackSpec:
    """Half-elliptic track cross-section resting on the platform."""

    center_x_px: float
    width_um: float
    height_um: float

    def __post_init__(self):
        if not (self.width_um > 0 and self.height_um > 0):
            raise ValueError("track width_um and height_um must be positive")


@dataclass
class PlateauSpec:
    """Rectangular plateau (benchmark step or calibration gauge)."""

    center_x_px: float
    width_um: float
    height_mm: float

    def __post_init__(self):
        if not (self.width_um > 0 and self.height_mm > 0):
            raise ValueError("plateau width_um and height_mm must be positive")


@dataclass
class SceneSpec:
    """Full description of one synthetic frame.

    platform_roll_um is the height change between the two platform-band
    centers; positive roll lowers the surface toward the right band (rows
    grow to the right). diffusion_mean_abs_um sets the mean absolute value
    of the per-column line displacement; the displacement itself is normal
    with sigma = mean_abs * sqrt(pi/2).
    """

    width_px: int = 160
    height_px: int = 120
    pixel_pitch_um: float = 10.0
    platform_row: float = 90.0
    platform_roll_um: float = 0.0
    track: TrackSpec | None = None
    plateau: PlateauSpec | None = None
    laser_psf_sigma_px: float = 1.2
    diffusion_mean_abs_um: float = 0.0
    sensor_noise_sigma: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.width_px < 16 or self.height_px < 16:
            raise ValueError("scene frame must be at least 16x16 pixels")
        if not self.pixel_pitch_um > 0:
            raise ValueError("pixel_pitch_um must be positive")
        if not self.laser_psf_sigma_px > 0:
            raise ValueError("laser_psf_sigma_px must be positive")
        if self.diffusion_mean_abs_um < 0 or self.sensor_noise_sigma < 0:
            raise ValueError("noise magnitudes must be non-negative")


@dataclass
class MaterialModel:
    """Material with its mean absolute laser-diffusion displacement."""

    name: str
    diffusion_mean_abs_um: float

    def __post_init__(self):
        if not self.diffusion_mean_abs_um > 0:
            raise ValueError("diffusion_mean_abs_um must be positive")


_MATERIALS = (
    ("PLA - red", 8.42),
    ("PLA - green - translucent", 7.11),
    ("PLA - dark brown - translucent", 4.43),
    ("ABS - red", 8.65),
    ("ABS - green", 11.20),
    ("ABS - gray", 6.15),
    ("ABS - white - translucent", 13.86),
)


def material_table() -> list[MaterialModel]:
    """The seven stock materials with their diffusion magnitudes (um)."""
    return [MaterialModel(name, value) for name, value in _MATERIALS]


def material_by_name(name: str) -> MaterialModel | None:
    for mat_name, value in _MATERIALS:
        if mat_name == name:
            return MaterialModel(mat_name, value)
    return None


def surface_height_um(scene: SceneSpec, column) -> np.ndarray | float:
    """True surface height above the nominal platform at the given columns.

    Sums the platform roll (linear in column, anchored 0 at the left band
    center, -platform_roll_um at the right band center) with the track
    half-ellipse or plateau rectangle where present.
    """
    c = np.asarray(column, dtype=float)
    left_c, right_c = band_centers(scene.width_px)
    height = -scene.platform_roll_um * (c - left_c) / (right_c - left_c)

    if scene.track is not None:
        a_px = scene.track.width_um / 2.0 / scene.pixel_pitch_um
        u = (c - scene.track.center_x_px) / a_px
        bump = scene.track.height_um * np.sqrt(np.clip(1.0 - u * u, 0.0, None))
        height = height + np.where(np.abs(u) <= 1.0, bump, 0.0)

    if scene.plateau is not None:
        half_px = scene.plateau.width_um / 2.0 / scene.pixel_pitch_um
        inside = np.abs(c - scene.plateau.center_x_px) <= half_px
        height = height + np.where(inside, scene.plateau.height_mm * 1000.0, 0.0)

    return float(height) if np.ndim(column) == 0 else height


def true_line_rows(scene: SceneSpec) -> np.ndarray:
    """Noise-free laser-line row per column implied by the scene geometry."""
    cols = np.arange(scene.width_px)
    return scene.platform_row - surface_height_um(scene, cols) / scene.pixel_pitch_um


def render_frame(scene: SceneSpec, frame_id: str | None = None) -> Frame:
    """Render the scene into a Frame; bit-identical for identical seeds.

    Per column: displace the true surface row by the diffusion draw, paint
    a vertical Gaussian stripe (peak 0.9) centered on the displaced row,
    add white sensor noise, clamp to [0, 1].
    """
    rng = np.random.default_rng(scene.rng_seed)
    rows_line = true_line_rows(scene)
    if scene.diffusion_mean_abs_um > 0:
        sigma_px = scene.diffusion_mean_abs_um * np.sqrt(np.pi / 2.0) / scene.pixel_pitch_um
        rows_line = rows_line + rng.normal(0.0, sigma_px, scene.width_px)

    rows = np.arange(scene.height_px, dtype=float)[:, None]
    img = 0.9 * np.exp(-((rows - rows_line[None, :]) ** 2) / (2.0 * scene.laser_psf_sigma_px**2))
    if scene.sensor_noise_sigma > 0:
        img += rng.normal(0.0, scene.sensor_noise_sigma, img.shape)
    np.clip(img, 0.0, 1.0, out=img)
    return Frame(
        intensities=img,
        frame_id=frame_id if frame_id is not None else f"synth-{scene.rng_seed}",
        pixel_pitch_um=scene.pixel_pitch_um,
    )


DEFAULT_STEP_HEIGHTS_MM = (1.36, 2.28, 3.30, 4.28)

_STAIRCASE_BASE = dict(
    width_px=192,
    height_px=576,
    pixel_pitch_um=10.0,
    platform_row=540.0,
    laser_psf_sigma_px=1.2,
)


def staircase_base_scene() -> SceneSpec:
    """Frame geometry shared by the benchmark staircase and gauge scans."""
    return SceneSpec(**_STAIRCASE_BASE)


def make_staircase_scenes(
    step_heights_mm=DEFAULT_STEP_HEIGHTS_MM,
    base: SceneSpec | None = None,
    plateau_width_um: float = 800.0,
) -> list[SceneSpec]:
    """One plateau scene per step height, replacing any track in the base."""
    heights = [float(h) for h in step_heights_mm]
    if any(h <= 0 for h in heights):
        raise ValueError("step heights must be positive")
    if any(b >= a for a, b in zip(heights[1:], heights)):
        raise ValueError("step heights must be strictly increasing")
    if base is None:
        base = staircase_base_scene()
    scenes = []
    for i, h in enumerate(heights):
        plateau = PlateauSpec(
            center_x_px=base.width_px / 2.0,
            width_um=plateau_width_um,
            height_mm=h,
        )
        scenes.append(replace(base, track=None, plateau=plateau, rng_seed=base.rng_seed + i))
    return scenes


def grr_dataset(
    parts: int = 20,
    operators: int = 3,
    trials: int = 3,
    seed: int = 0,
    pin_diameter_mm: float = 3.0,
    carrier_roll_um: float = 20.0,
    trial_noise_um: float = 5.2,
) -> GrrMeasurementSet:
    """Simulated pin-height R&R grid in micrometres.

    Every (part, operator) mounting draws a roll offset uniform over
    +-carrier_roll_um/2; every trial adds normal subpixel noise with sigma
    trial_noise_um. The default trial noise puts the repeatability spread
    6*sigma(EV) near 30 um.
    """
    if min(parts, operators) < 1 or trials < 2:
        raise ValueError("need parts >= 1, operators >= 1, trials >= 2")
    if carrier_roll_um < 0 or trial_noise_um < 0:
        raise ValueError("noise magnitudes must be non-negative")
    rng = np.random.default_rng(seed)
    base = pin_diameter_mm * 1000.0
    half = carrier_roll_um / 2.0
    mounting = rng.uniform(-half, half, (parts, operators)) if half > 0 else np.zeros((parts, operators))
    noise = rng.normal(0.0, trial_noise_um, (parts, operators, trials))
    values = base + mounting[:, :, None] + noise
    return GrrMeasurementSet(values=values, unit="um")


# --- scene (de)serialization -------------------------------------------------

_SCENE_KEYS = {
    "width_px",
    "height_px",
    "pixel_pitch_um",
    "platform_row",
    "platform_roll_um",
    "track",
    "plateau",
    "laser_psf_sigma_px",
    "diffusion_mean_abs_um",
    "sensor_noise_sigma",
    "rng_seed",
}


def scene_to_dict(scene: SceneSpec) -> dict:
    payload = asdict(scene)
    payload["schema_version"] = 1
    return payload


def scene_from_dict(payload: dict) -> SceneSpec:
    data = dict(payload)
    version = data.pop("schema_version", 1)
    if version != 1:
        raise ValueError(f"unsupported scene schema_version {version}")
    unknown = set(data) - _SCENE_KEYS
    if unknown:
        raise ValueError(f"unknown scene keys: {sorted(unknown)}")
    track = data.pop("track", None)
    plateau = data.pop("plateau", None)
    scene = SceneSpec(**data)
    if track is not None:
        scene.track = TrackSpec(**track)
    if plateau is not None:
        scene.plateau = PlateauSpec(**plateau)
    return scene


def save_scene(scene: SceneSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scene_to_dict(scene), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_scene(path) -> SceneSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return scene_from_dict(json.load(fh))


def ground_truth_dict(scene: SceneSpec) -> dict:
    """Sidecar payload with the analytic geometry of a rendered frame."""
    truth = {
        "schema_version": 1,
        "scene": scene_to_dict(scene),
        "platform_row_px": scene.platform_row,
        "row_true_px": [float(r) for r in true_line_rows(scene)],
    }
    if scene.track is not None:
        truth["track_width_um"] = scene.track.width_um
        truth["track_height_um"] = scene.track.height_um
    if scene.plateau is not None:
        truth["plateau_height_mm"] = scene.plateau.height_mm
        truth["plateau_width_um"] = scene.plateau.width_um
    return truth
