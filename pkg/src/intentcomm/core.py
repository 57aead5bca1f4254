"""Shared domain types, input-file parsing, and validation.

Positions are stored in meters (robot base frame) and only converted to
centimeters when rendered into text. Per-interval force profiles, when
present, are authoritative for segmentation and force coloring; otherwise an
interval's force is the mean of the setpoints at its two endpoint waypoints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

# Canonical landmark vocabulary. Prompts embed these names verbatim, so
# unknown names are rejected at load time.
LANDMARK_SIDES: dict[str, str] = {
    "nose": "center",
    "mouth": "center",
    "left eye": "left",
    "right eye": "right",
    "left ear": "left",
    "right ear": "right",
    "left shoulder": "left",
    "right shoulder": "right",
    "left elbow": "left",
    "right elbow": "right",
    "left wrist": "left",
    "right wrist": "right",
    "left hip": "left",
    "right hip": "right",
    "left knee": "left",
    "right knee": "right",
    "left ankle": "left",
    "right ankle": "right",
}

FACIAL_NAMES = frozenset({"nose", "mouth", "left eye", "right eye"})

FORCE_EPSILON_N = 1e-6


class ParseError(ValueError):
    """A scene or trajectory file could not be parsed."""


class ValidationError(ValueError):
    """A parsed object violates one or more domain invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Waypoint:
    """One sampled point of the planned end-effector path.

    ``force_n`` is the contact-force setpoint at the waypoint; between-waypoint
    forces live in :class:`IntervalForceProfile`.
    """

    index: int
    timestamp_s: float
    position_m: tuple[float, float, float]
    gripper_closed: bool
    speed_mps: float
    force_n: float


@dataclass(frozen=True)
class IntervalForceProfile:
    """Ordered force samples over the interval from_index -> from_index + 1.

    The first and last samples correspond to the interval's endpoints.
    """

    from_index: int
    samples_n: tuple[float, ...]


@dataclass(frozen=True)
class Trajectory:
    """An ordered list of waypoints plus optional per-interval force profiles."""

    waypoints: tuple[Waypoint, ...]
    force_profiles: tuple[IntervalForceProfile, ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self,
            "_profiles_by_interval",
            {p.from_index: p for p in self.force_profiles},
        )

    @property
    def n_waypoints(self) -> int:
        return len(self.waypoints)

    def waypoint(self, index: int) -> Waypoint:
        """Return the waypoint with 1-based ``index``."""
        return self.waypoints[index - 1]

    def profile_for(self, interval: int) -> IntervalForceProfile | None:
        return self._profiles_by_interval.get(interval)

    def interval_force_n(self, interval: int) -> float:
        """Scalar force for interval ``j -> j+1``: profile mean if present,
        else the mean of the endpoint setpoints."""
        profile = self.profile_for(interval)
        if profile is not None:
            return float(sum(profile.samples_n) / len(profile.samples_n))
        a = self.waypoint(interval).force_n
        b = self.waypoint(interval + 1).force_n
        return (a + b) / 2.0

    def interval_is_forceful(self, interval: int, epsilon: float = FORCE_EPSILON_N) -> bool:
        """An interval is forceful iff any profile sample, or its derived mean
        force, exceeds ``epsilon``."""
        profile = self.profile_for(interval)
        if profile is not None:
            return any(s > epsilon for s in profile.samples_n)
        return self.interval_force_n(interval) > epsilon


@dataclass(frozen=True)
class Landmark:
    name: str
    side: str
    position_m: tuple[float, float, float]
    pixel: tuple[float, float]
    facial: bool = False
    visible: bool = True


@dataclass(frozen=True)
class BodyLandmarkSet:
    entries: tuple[Landmark, ...]

    @property
    def facial_entries(self) -> tuple[Landmark, ...]:
        return tuple(e for e in self.entries if e.facial)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.entries)

    def get(self, name: str) -> Landmark:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera: 3x3 intrinsics plus a rigid base-to-camera transform."""

    intrinsics: tuple[tuple[float, float, float], ...]
    extrinsics_base_to_camera: tuple[tuple[float, float, float, float], ...]
    image_size: tuple[int, int]

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.intrinsics, dtype=float)

    @property
    def base_to_camera(self) -> np.ndarray:
        return np.asarray(self.extrinsics_base_to_camera, dtype=float)

    @property
    def fx(self) -> float:
        return float(self.intrinsics[0][0])

    @property
    def fy(self) -> float:
        return float(self.intrinsics[1][1])

    @property
    def cx(self) -> float:
        return float(self.intrinsics[0][2])

    @property
    def cy(self) -> float:
        return float(self.intrinsics[1][2])


@dataclass(frozen=True, eq=False)
class SceneBundle:
    """Everything needed to build the annotated view: environment image,
    optional wrist image, landmarks, and the camera model."""

    environment_image: np.ndarray
    wrist_image: np.ndarray | None
    landmarks: BodyLandmarkSet
    camera: CameraModel
    source_path: Path | None = field(default=None, compare=False)


def validate_trajectory(trajectory: Trajectory) -> list[str]:
    """Return every invariant violation in ``trajectory`` (empty list if valid)."""
    violations: list[str] = []
    wps = trajectory.waypoints
    n = len(wps)
    if n < 2:
        violations.append("trajectory must contain at least 2 waypoints")
    for k, wp in enumerate(wps, start=1):
        if wp.index != k:
            violations.append(f"waypoint indices not contiguous: expected {k}, found {wp.index}")
    for prev, cur in zip(wps, wps[1:]):
        if cur.timestamp_s <= prev.timestamp_s:
            violations.append(f"timestamps not strictly increasing at index {cur.index}")
    for wp in wps:
        if wp.speed_mps < 0:
            violations.append(f"negative speed at index {wp.index}")
        if wp.force_n < 0:
            violations.append(f"negative force at index {wp.index}")
    seen_intervals: set[int] = set()
    for profile in trajectory.force_profiles:
        j = profile.from_index
        if not 1 <= j <= n - 1:
            violations.append(f"force profile from_index {j} outside [1, {n - 1}]")
        if j in seen_intervals:
            violations.append(f"duplicate force profile for interval {j}")
        seen_intervals.add(j)
        if len(profile.samples_n) == 0:
            violations.append(f"empty force profile for interval {j}")
        for s, value in enumerate(profile.samples_n, start=1):
            if value < 0:
                violations.append(f"negative force sample at interval {j}, sample {s}")
    return violations


def validate_landmarks(landmarks: BodyLandmarkSet, image_size: tuple[int, int]) -> list[str]:
    """Return every landmark-set violation against the canonical vocabulary."""
    violations: list[str] = []
    width, height = image_size
    seen: set[str] = set()
    for lm in landmarks.entries:
        if lm.name not in LANDMARK_SIDES:
            violations.append(f"unknown landmark name: '{lm.name}'")
            continue
        if lm.name in seen:
            violations.append(f"duplicate landmark name: '{lm.name}'")
        seen.add(lm.name)
        if lm.side != LANDMARK_SIDES[lm.name]:
            violations.append(f"side '{lm.side}' inconsistent with name '{lm.name}'")
        if lm.facial != (lm.name in FACIAL_NAMES):
            violations.append(f"facial flag inconsistent for '{lm.name}'")
        if lm.visible:
            u, v = lm.pixel
            if not (0 <= u < width and 0 <= v < height):
                violations.append(
                    f"pixel ({u}, {v}) out of image bounds for visible landmark '{lm.name}'"
                )
    return violations


def validate_camera(camera: CameraModel) -> list[str]:
    violations: list[str] = []
    if camera.fx <= 0 or camera.fy <= 0:
        violations.append("camera focal lengths must be positive")
    t = camera.base_to_camera
    if t.shape != (4, 4):
        violations.append("extrinsics must be a 4x4 matrix")
        return violations
    rot = t[:3, :3]
    if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-6):
        violations.append("extrinsics rotation block is not orthonormal within 1e-6")
    if not np.allclose(t[3], [0.0, 0.0, 0.0, 1.0], atol=1e-9):
        violations.append("extrinsics bottom row must be [0, 0, 0, 1]")
    return violations


def _require(condition: bool, message: str):
    if not condition:
        raise ParseError(message)


def _as_vec3(value, context: str) -> tuple[float, float, float]:
    _require(isinstance(value, (list, tuple)) and len(value) == 3, f"{context} must be a 3-vector")
    return (float(value[0]), float(value[1]), float(value[2]))


def trajectory_from_dict(data: dict) -> Trajectory:
    """Build a Trajectory from the documented JSON structure (no validation)."""
    _require(isinstance(data, dict), "trajectory document must be an object")
    _require("waypoints" in data, "trajectory document missing 'waypoints'")
    waypoints = []
    for entry in data["waypoints"]:
        _require(isinstance(entry, dict), "waypoint entries must be objects")
        try:
            waypoints.append(
                Waypoint(
                    index=int(entry["index"]),
                    timestamp_s=float(entry["t"]),
                    position_m=_as_vec3(entry["p"], "waypoint position"),
                    gripper_closed=bool(entry["gripper_closed"]),
                    speed_mps=float(entry["v"]),
                    force_n=float(entry["f"]),
                )
            )
        except KeyError as exc:
            raise ParseError(f"waypoint entry missing field {exc}") from exc
    profiles = []
    for entry in data.get("force_profiles", []):
        try:
            profiles.append(
                IntervalForceProfile(
                    from_index=int(entry["from_index"]),
                    samples_n=tuple(float(s) for s in entry["samples"]),
                )
            )
        except KeyError as exc:
            raise ParseError(f"force profile entry missing field {exc}") from exc
    return Trajectory(waypoints=tuple(waypoints), force_profiles=tuple(profiles))


def trajectory_to_dict(trajectory: Trajectory) -> dict:
    return {
        "waypoints": [
            {
                "index": wp.index,
                "t": wp.timestamp_s,
                "p": list(wp.position_m),
                "gripper_closed": wp.gripper_closed,
                "v": wp.speed_mps,
                "f": wp.force_n,
            }
            for wp in trajectory.waypoints
        ],
        "force_profiles": [
            {"from_index": p.from_index, "samples": list(p.samples_n)}
            for p in trajectory.force_profiles
        ],
    }


def load_trajectory(path: str | Path) -> Trajectory:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed trajectory file {path}: {exc}") from exc
    trajectory = trajectory_from_dict(data)
    violations = validate_trajectory(trajectory)
    if violations:
        raise ValidationError(violations)
    return trajectory


def save_trajectory(trajectory: Trajectory, path: str | Path):
    Path(path).write_text(json.dumps(trajectory_to_dict(trajectory), indent=2), encoding="utf-8")


def _load_image(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def landmarks_from_list(entries: list) -> BodyLandmarkSet:
    landmarks = []
    for entry in entries:
        _require(isinstance(entry, dict), "landmark entries must be objects")
        try:
            landmarks.append(
                Landmark(
                    name=str(entry["name"]),
                    side=str(entry["side"]),
                    position_m=_as_vec3(entry["position_m"], "landmark position"),
                    pixel=(float(entry["pixel"][0]), float(entry["pixel"][1])),
                    facial=bool(entry.get("facial", False)),
                    visible=bool(entry.get("visible", True)),
                )
            )
        except KeyError as exc:
            raise ParseError(f"landmark entry missing field {exc}") from exc
    return BodyLandmarkSet(entries=tuple(landmarks))


def scene_from_dict(data: dict, base_dir: Path) -> SceneBundle:
    _require(isinstance(data, dict), "scene document must be an object")
    for key in ("environment_image", "camera", "landmarks"):
        _require(key in data, f"scene document missing '{key}'")
    cam = data["camera"]
    try:
        camera = CameraModel(
            intrinsics=tuple(tuple(float(x) for x in row) for row in cam["intrinsics"]),
            extrinsics_base_to_camera=tuple(
                tuple(float(x) for x in row) for row in cam["extrinsics_base_to_camera"]
            ),
            image_size=(int(cam["image_size"][0]), int(cam["image_size"][1])),
        )
    except KeyError as exc:
        raise ParseError(f"camera block missing field {exc}") from exc
    env_path = base_dir / data["environment_image"]
    _require(env_path.exists(), f"environment image not found: {env_path}")
    environment = _load_image(env_path)
    wrist = None
    if data.get("wrist_image"):
        wrist_path = base_dir / data["wrist_image"]
        _require(wrist_path.exists(), f"wrist image not found: {wrist_path}")
        wrist = _load_image(wrist_path)
    landmarks = landmarks_from_list(data["landmarks"])
    return SceneBundle(
        environment_image=environment,
        wrist_image=wrist,
        landmarks=landmarks,
        camera=camera,
    )


def scene_to_dict(scene: SceneBundle, environment_image: str, wrist_image: str | None) -> dict:
    data = {
        "environment_image": environment_image,
        "camera": {
            "intrinsics": [list(row) for row in scene.camera.intrinsics],
            "extrinsics_base_to_camera": [list(row) for row in scene.camera.extrinsics_base_to_camera],
            "image_size": list(scene.camera.image_size),
        },
        "landmarks": [
            {
                "name": lm.name,
                "side": lm.side,
                "position_m": list(lm.position_m),
                "pixel": list(lm.pixel),
                "facial": lm.facial,
                "visible": lm.visible,
            }
            for lm in scene.landmarks.entries
        ],
    }
    if wrist_image is not None:
        data["wrist_image"] = wrist_image
    return data


def load_scene(path: str | Path) -> SceneBundle:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed scene file {path}: {exc}") from exc
    scene = scene_from_dict(data, path.parent)
    if scene.environment_image.size == 0:
        raise ValidationError(["environment image is empty"])
    height, width = scene.environment_image.shape[:2]
    violations = validate_camera(scene.camera)
    if (width, height) != scene.camera.image_size:
        violations.append(
            f"camera image_size {scene.camera.image_size} does not match "
            f"environment image ({width}, {height})"
        )
    violations.extend(validate_landmarks(scene.landmarks, scene.camera.image_size))
    if violations:
        raise ValidationError(violations)
    return SceneBundle(
        environment_image=scene.environment_image,
        wrist_image=scene.wrist_image,
        landmarks=scene.landmarks,
        camera=scene.camera,
        source_path=path,
    )


def load_scene_and_trajectory(
    scene_path: str | Path, trajectory_path: str | Path
) -> tuple[SceneBundle, Trajectory]:
    """Load and fully validate both input files."""
    return load_scene(scene_path), load_trajectory(trajectory_path)
