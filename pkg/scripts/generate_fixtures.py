"""Regenerate the fixture corpus: synthetic scenes, trajectories, and images
for the bathing, shaving, and feeding demos and tests.

The bathing trajectory is pinned to the reference numbers used throughout the
test suite (waypoint 1 at (-4.3, -39.1, 79.3) cm, force ramp 1.00 -> 3.16 N on
intervals 9..38, and so on); the script asserts those before writing anything.

Usage: python scripts/generate_fixtures.py [--root fixtures]
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from intentcomm.core import load_scene_and_trajectory  # noqa: E402
from intentcomm.kinematics import format_fixed, nearest_landmark  # noqa: E402
from intentcomm.rendering import project_points  # noqa: E402
from intentcomm.segmentation import segment_trajectory  # noqa: E402

IMAGE_SIZE = (640, 480)
FOCAL_PX = 560.0
PROFILE_SAMPLES = 45


def look_at_extrinsics(eye_m, target_m) -> np.ndarray:
    """Base-to-camera transform for a camera at ``eye_m`` looking at
    ``target_m`` (OpenCV convention: x right, y down, z forward)."""
    eye = np.asarray(eye_m, dtype=float)
    forward = np.asarray(target_m, dtype=float) - eye
    forward /= np.linalg.norm(forward)
    right = np.cross(forward, np.array([0.0, 0.0, 1.0]))
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    rotation = np.stack([right, down, forward])
    transform = np.eye(4)
    transform[:3, :3] = rotation
    transform[:3, 3] = -rotation @ eye
    return transform


def chain_cm(start, first_delta, end, count) -> list[np.ndarray]:
    """``count`` waypoints from start to end (cm): one explicit first interval,
    then equal steps."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    second = start + np.asarray(first_delta, dtype=float)
    rest = count - 2
    pts = [start, second]
    pts += [second + (end - second) * (i / rest) for i in range(1, rest + 1)]
    return pts


def timestamps_from_speeds(positions_cm, speeds_cm_s, pause_dt: dict[int, float]) -> list[float]:
    """Integrate per-interval speeds into timestamps; ``pause_dt`` overrides the
    time gap for zero-length intervals (1-based interval index)."""
    t = [0.0]
    for j, speed in enumerate(speeds_cm_s, start=1):
        if j in pause_dt:
            t.append(t[-1] + pause_dt[j])
            continue
        dist = float(np.linalg.norm(positions_cm[j] - positions_cm[j - 1]))
        t.append(t[-1] + dist / speed)
    return t


def trajectory_dict(positions_cm, speeds_cm_s, profiles, gripper_closed=True, pause_dt=None):
    positions_cm = [np.asarray(p, dtype=float) for p in positions_cm]
    pause_dt = pause_dt or {}
    times = timestamps_from_speeds(positions_cm, speeds_cm_s, pause_dt)
    n = len(positions_cm)
    waypoints = []
    for i in range(n):
        speed = speeds_cm_s[i] if i < n - 1 else speeds_cm_s[-1]
        waypoints.append(
            {
                "index": i + 1,
                "t": times[i],
                "p": [c / 100.0 for c in positions_cm[i]],
                "gripper_closed": gripper_closed,
                "v": speed / 100.0,
                "f": 0.0,
            }
        )
    return {
        "waypoints": waypoints,
        "force_profiles": [
            {"from_index": j, "samples": [float(s) for s in samples]} for j, samples in profiles
        ],
    }


def ramp_profiles(anchors: dict[int, float], first: int, last: int) -> list[tuple[int, list[float]]]:
    """Per-interval force profiles linearly ramping between per-waypoint anchor
    forces (linear between anchor waypoints)."""
    keys = sorted(anchors)

    def force_at(w: int) -> float:
        for a, b in zip(keys, keys[1:]):
            if a <= w <= b:
                return anchors[a] + (anchors[b] - anchors[a]) * (w - a) / (b - a)
        raise ValueError(w)

    return [
        (j, list(np.linspace(force_at(j), force_at(j + 1), PROFILE_SAMPLES)))
        for j in range(first, last + 1)
    ]


# --- scenes -----------------------------------------------------------------

STRETCH_LANDMARKS_CM = [
    ("left wrist", (-16.0, -49.2, 74.2)),
    ("left elbow", (-40.3, -52.8, 84.8)),
    ("left shoulder", (-57.0, -49.0, 98.0)),
    ("right wrist", (-40.0, -10.0, 76.0)),
    ("right elbow", (-52.0, -8.0, 85.0)),
    ("right shoulder", (-60.0, -16.0, 99.0)),
    ("nose", (-57.0, -32.0, 118.0)),
    ("left eye", (-60.0, -36.0, 122.0)),
    ("right eye", (-61.0, -28.0, 122.0)),
    ("mouth", (-57.0, -32.0, 113.0)),
]
STRETCH_EYE_M = (0.50, -0.10, 1.55)

XARM_LANDMARKS_CM = [
    ("mouth", (62.0, 2.0, 38.0)),
    ("nose", (62.0, 2.0, 43.0)),
    ("left eye", (60.0, 7.0, 47.0)),
    ("right eye", (60.0, -3.0, 47.0)),
    ("left shoulder", (68.0, 22.0, 25.0)),
    ("right shoulder", (68.0, -18.0, 25.0)),
    ("left elbow", (62.0, 26.0, 8.0)),
    ("right elbow", (62.0, -22.0, 8.0)),
    ("left wrist", (50.0, 22.0, 2.0)),
    ("right wrist", (50.0, -18.0, 2.0)),
]
XARM_EYE_M = (-0.25, 0.0, 0.55)

FACIAL = {"nose", "mouth", "left eye", "right eye"}
SIDE = lambda name: name.split(" ")[0] if name.startswith(("left ", "right ")) else "center"  # noqa: E731


def build_camera(landmarks_cm, extra_points_cm, eye_m):
    anchors = [np.asarray(p, dtype=float) / 100.0 for _, p in landmarks_cm]
    anchors += [np.asarray(p, dtype=float) / 100.0 for p in extra_points_cm]
    target = np.mean(anchors, axis=0)
    extrinsics = look_at_extrinsics(eye_m, target)
    intrinsics = [
        [FOCAL_PX, 0.0, IMAGE_SIZE[0] / 2.0],
        [0.0, FOCAL_PX, IMAGE_SIZE[1] / 2.0],
        [0.0, 0.0, 1.0],
    ]
    return intrinsics, [list(row) for row in extrinsics]


class SimpleCamera:
    def __init__(self, intrinsics, extrinsics):
        self.k = np.asarray(intrinsics)
        self.t = np.asarray(extrinsics)

    def project(self, points_m) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points_m, dtype=float))
        cam = pts @ self.t[:3, :3].T + self.t[:3, 3]
        assert np.all(cam[:, 2] > 0.05), "point behind fixture camera"
        return np.stack(
            [
                self.k[0, 0] * cam[:, 0] / cam[:, 2] + self.k[0, 2],
                self.k[1, 1] * cam[:, 1] / cam[:, 2] + self.k[1, 2],
            ],
            axis=1,
        )


def draw_person_scene(camera: SimpleCamera, landmarks_cm, background, torso_color) -> Image.Image:
    """Crude but deterministic environment photo: wall gradient, furniture
    band, and a person whose limbs connect the projected landmark pixels."""
    width, height = IMAGE_SIZE
    img = Image.new("RGB", IMAGE_SIZE)
    draw = ImageDraw.Draw(img)
    top, bottom = background
    for y in range(height):
        f = y / (height - 1)
        color = tuple(int(t + f * (b - t)) for t, b in zip(top, bottom))
        draw.line((0, y, width, y), fill=color)
    draw.rectangle((0, int(height * 0.72), width, height), fill=(150, 128, 104))

    pos = {name: np.asarray(p, dtype=float) / 100.0 for name, p in landmarks_cm}
    px = {name: tuple(camera.project([p])[0]) for name, p in pos.items()}

    def limb(a, b, widthpx, color):
        if a in px and b in px:
            draw.line((*px[a], *px[b]), fill=color, width=widthpx)

    ls, rs = px.get("left shoulder"), px.get("right shoulder")
    if ls and rs:
        mid = ((ls[0] + rs[0]) / 2, (ls[1] + rs[1]) / 2)
        half = abs(ls[0] - rs[0]) / 2 + 26
        draw.polygon(
            [(mid[0] - half, ls[1] - 8), (mid[0] + half, rs[1] - 8),
             (mid[0] + half * 0.9, mid[1] + 150), (mid[0] - half * 0.9, mid[1] + 150)],
            fill=torso_color,
        )
    limb("left shoulder", "left elbow", 22, torso_color)
    limb("left elbow", "left wrist", 18, (224, 188, 160))
    limb("right shoulder", "right elbow", 22, torso_color)
    limb("right elbow", "right wrist", 18, (224, 188, 160))
    if "nose" in px:
        cxp, cyp = px["nose"]
        draw.ellipse((cxp - 42, cyp - 46, cxp + 42, cyp + 50), fill=(226, 190, 162))
        for eye in ("left eye", "right eye"):
            if eye in px:
                ex, ey = px[eye]
                draw.ellipse((ex - 5, ey - 4, ex + 5, ey + 4), fill=(60, 44, 36))
        if "mouth" in px:
            mx, my = px["mouth"]
            draw.line((mx - 12, my, mx + 12, my), fill=(130, 60, 60), width=4)
    return img


def draw_wrist_image(tool: str) -> Image.Image:
    img = Image.new("RGB", (320, 240), (92, 96, 102))
    draw = ImageDraw.Draw(img)
    draw.rectangle((30, 40, 70, 200), fill=(40, 40, 44))
    draw.rectangle((250, 40, 290, 200), fill=(40, 40, 44))
    if tool == "towel":
        draw.ellipse((85, 60, 235, 190), fill=(235, 235, 230))
        draw.arc((100, 80, 220, 170), 200, 340, fill=(200, 200, 195), width=6)
    elif tool == "clipper":
        draw.rectangle((110, 70, 210, 180), fill=(210, 210, 215))
        draw.rectangle((120, 50, 200, 70), fill=(90, 90, 95))
    else:  # spoon
        draw.ellipse((120, 60, 200, 120), fill=(205, 205, 210))
        draw.rectangle((150, 120, 170, 200), fill=(205, 205, 210))
    return img


def scene_dict(landmarks_cm, camera: SimpleCamera, intrinsics, extrinsics, wrist_name):
    entries = []
    for name, p_cm in landmarks_cm:
        p_m = [c / 100.0 for c in p_cm]
        u, v = camera.project([p_m])[0]
        entries.append(
            {
                "name": name,
                "side": SIDE(name),
                "position_m": p_m,
                "pixel": [float(u), float(v)],
                "facial": name in FACIAL,
                "visible": True,
            }
        )
    return {
        "environment_image": "scene.png",
        "wrist_image": wrist_name,
        "camera": {
            "intrinsics": intrinsics,
            "extrinsics_base_to_camera": extrinsics,
            "image_size": list(IMAGE_SIZE),
        },
        "landmarks": entries,
    }


# --- trajectories -----------------------------------------------------------

BATHING_A = (-4.3, -39.1, 79.3)
BATHING_B = (-16.0, -49.2, 74.2)   # left wrist
BATHING_C = (-39.3, -52.8, 84.8)   # 1 cm from left elbow


def bathing_trajectory_1():
    seg1 = chain_cm(BATHING_A, (-2.0, -1.7, -0.2), BATHING_B, 9)
    seg2 = chain_cm(BATHING_B, (0.6, 1.1, 1.6), BATHING_C, 31)
    seg3 = chain_cm(BATHING_C, (0.0, 0.1, 1.8), BATHING_A, 25)
    positions = seg1 + seg2[1:] + seg3[1:]
    speeds = list(np.linspace(3.0, 2.0, 8)) + [1.0] * 30 + list(np.linspace(2.0, 4.0, 24))
    profiles = ramp_profiles({9: 1.00, 10: 1.15, 38: 3.09, 39: 3.16}, 9, 38)
    return trajectory_dict(positions, speeds, profiles)


def bathing_trajectory_2():
    shoulder_stop = (-56.0, -48.5, 97.0)  # 1.5 cm from left shoulder
    seg1 = chain_cm(BATHING_A, (-2.0, -1.7, -0.2), BATHING_B, 9)
    leg_a = chain_cm(BATHING_B, (0.6, 1.1, 1.6), BATHING_C, 19)
    leg_b = chain_cm(BATHING_C, (-1.0, 0.3, 0.9), shoulder_stop, 19)
    seg3 = chain_cm(shoulder_stop, (0.0, 0.5, 2.0), BATHING_A, 19)
    positions = seg1 + leg_a[1:] + leg_b[1:] + seg3[1:]
    speeds = (
        list(np.linspace(3.0, 2.0, 8))
        + [1.0] * 18
        + [2.2] * 18
        + list(np.linspace(1.5, 5.0, 18))
    )
    profiles = ramp_profiles({9: 1.5, 45: 1.5}, 9, 44)
    return trajectory_dict(positions, speeds, profiles)


SHAVING_HOME = (-12.0, -42.0, 82.0)
SHAVING_ELBOW_STOP = (-40.0, -52.8, 86.3)
SHAVING_WRIST_STOP = (-16.5, -49.0, 74.8)
SHAVING_END = (-12.0, -41.0, 83.0)


def shaving_trajectory_1():
    seg1 = chain_cm(SHAVING_HOME, (-3.0, -1.2, 0.6), SHAVING_ELBOW_STOP, 12)
    seg2 = chain_cm(SHAVING_ELBOW_STOP, (1.4, 0.2, -0.7), SHAVING_WRIST_STOP, 19)
    seg3 = chain_cm(SHAVING_WRIST_STOP, (0.3, 0.4, 2.2), SHAVING_END, 11)
    positions = seg1 + seg2[1:] + seg3[1:]
    speeds = list(np.linspace(2.5, 1.2, 11)) + [1.0] * 18 + list(np.linspace(1.5, 5.0, 10))
    profiles = ramp_profiles({12: 2.0, 30: 2.0}, 12, 29)
    return trajectory_dict(positions, speeds, profiles)


def shaving_trajectory_2():
    seg1 = chain_cm(SHAVING_HOME, (-3.0, -1.2, 0.6), SHAVING_ELBOW_STOP, 12)
    base = chain_cm(SHAVING_ELBOW_STOP, (1.2, 0.2, -0.6), SHAVING_WRIST_STOP, 21)
    zigzag = [
        p + np.array([0.0, 1.5 if i % 2 else -1.5, 0.0]) if 0 < i < len(base) - 1 else p
        for i, p in enumerate(base)
    ]
    seg3 = chain_cm(SHAVING_WRIST_STOP, (0.0, 0.3, 2.4), SHAVING_END, 11)
    positions = seg1 + zigzag[1:] + seg3[1:]
    speeds = list(np.linspace(2.5, 1.2, 11)) + [1.0] * 20 + list(np.linspace(1.5, 5.0, 10))
    profiles = ramp_profiles({12: 2.0, 32: 2.0}, 12, 31)
    return trajectory_dict(positions, speeds, profiles)


FEEDING_START = (35.0, 0.0, 12.0)
FEEDING_MOUTH = (62.0, 2.0, 38.0)
FEEDING_TABLE = (38.0, -2.0, 10.0)


def feeding_trajectory_1():
    seg1 = chain_cm(FEEDING_START, (3.2, 0.3, 2.4), (62.0, 2.0, 33.5), 11) + [
        np.asarray(FEEDING_MOUTH)
    ]
    seg2 = chain_cm(FEEDING_MOUTH, (-2.0, -0.4, -1.2), FEEDING_TABLE, 9)
    positions = seg1 + [np.asarray(FEEDING_MOUTH)] + seg2[1:]
    speeds = list(np.linspace(4.0, 1.5, 11)) + [0.0] + list(np.linspace(2.0, 6.0, 8))
    return trajectory_dict(positions, speeds, [], pause_dt={12: 3.0})


def feeding_trajectory_2():
    near_mouth = (60.5, 2.0, 37.5)
    seg1 = chain_cm(FEEDING_START, (3.0, 0.2, 2.8), near_mouth, 12)
    seg2 = chain_cm(near_mouth, (-2.2, -0.3, -1.0), FEEDING_TABLE, 9)
    positions = seg1 + [np.asarray(near_mouth)] + seg2[1:]
    speeds = [3.0] * 11 + [0.0] + list(np.linspace(2.5, 6.5, 8))
    return trajectory_dict(positions, speeds, [], pause_dt={12: 2.6})


# --- checks and output ------------------------------------------------------


def check_fixture(root: Path, name: str, expected_boundaries, expected_reasons):
    scene, trajectory = load_scene_and_trajectory(
        root / name / "scene.json", root / name / "trajectory.json"
    )
    seg = segment_trajectory(trajectory)
    assert seg.boundary_indices == expected_boundaries, (name, seg.boundary_indices)
    assert tuple(r for b in seg.boundaries for r in b.reasons) == expected_reasons, name
    pixels = project_points(scene.camera, [wp.position_m for wp in trajectory.waypoints])
    width, height = scene.camera.image_size
    assert np.all(pixels[:, 0] > 8) and np.all(pixels[:, 0] < width - 8), name
    assert np.all(pixels[:, 1] > 8) and np.all(pixels[:, 1] < height - 8), name


def check_bathing_reference_values(root: Path):
    _, trajectory = load_scene_and_trajectory(
        root / "bathing_1" / "scene.json", root / "bathing_1" / "trajectory.json"
    )
    scene, _ = load_scene_and_trajectory(
        root / "bathing_1" / "scene.json", root / "bathing_1" / "trajectory.json"
    )
    assert trajectory.n_waypoints == 63
    assert len(trajectory.force_profiles) == 30
    cm = lambda i: tuple(format_fixed(c * 100, 1) for c in trajectory.waypoint(i).position_m)  # noqa: E731
    assert cm(1) == ("-4.3", "-39.1", "79.3"), cm(1)
    assert cm(9) == ("-16.0", "-49.2", "74.2"), cm(9)
    assert cm(39) == ("-39.3", "-52.8", "84.8"), cm(39)
    assert cm(63) == ("-4.3", "-39.1", "79.3"), cm(63)
    name, dist = nearest_landmark(trajectory.waypoint(1).position_m, scene.landmarks)
    assert (name, format_fixed(dist, 1)) == ("left wrist", "16.3"), (name, dist)
    name, dist = nearest_landmark(trajectory.waypoint(39).position_m, scene.landmarks)
    assert (name, format_fixed(dist, 1)) == ("left elbow", "1.0"), (name, dist)
    first = trajectory.profile_for(9).samples_n
    last = trajectory.profile_for(38).samples_n
    assert (format_fixed(first[0], 2), format_fixed(first[-1], 2)) == ("1.00", "1.15")
    assert (format_fixed(last[0], 2), format_fixed(last[-1], 2)) == ("3.09", "3.16")


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--root", default=str(Path(__file__).resolve().parent.parent / "fixtures"))
    args = parser.parse_args()
    root = Path(args.root)

    stretch_extra = [BATHING_A, BATHING_B, BATHING_C, SHAVING_HOME]
    s_intr, s_extr = build_camera(STRETCH_LANDMARKS_CM, stretch_extra, STRETCH_EYE_M)
    stretch_cam = SimpleCamera(s_intr, s_extr)
    stretch_img = draw_person_scene(
        stretch_cam, STRETCH_LANDMARKS_CM, ((232, 228, 220), (180, 174, 166)), (112, 24, 44)
    )

    xarm_extra = [FEEDING_START, FEEDING_MOUTH, FEEDING_TABLE]
    x_intr, x_extr = build_camera(XARM_LANDMARKS_CM, xarm_extra, XARM_EYE_M)
    xarm_cam = SimpleCamera(x_intr, x_extr)
    xarm_img = draw_person_scene(
        xarm_cam, XARM_LANDMARKS_CM, ((226, 230, 234), (172, 176, 182)), (36, 72, 120)
    )

    fixtures = {
        "bathing_1": (stretch_cam, s_intr, s_extr, STRETCH_LANDMARKS_CM, stretch_img, "towel", bathing_trajectory_1()),
        "bathing_2": (stretch_cam, s_intr, s_extr, STRETCH_LANDMARKS_CM, stretch_img, "towel", bathing_trajectory_2()),
        "shaving_1": (stretch_cam, s_intr, s_extr, STRETCH_LANDMARKS_CM, stretch_img, "clipper", shaving_trajectory_1()),
        "shaving_2": (stretch_cam, s_intr, s_extr, STRETCH_LANDMARKS_CM, stretch_img, "clipper", shaving_trajectory_2()),
        "feeding_1": (xarm_cam, x_intr, x_extr, XARM_LANDMARKS_CM, xarm_img, "spoon", feeding_trajectory_1()),
        "feeding_2": (xarm_cam, x_intr, x_extr, XARM_LANDMARKS_CM, xarm_img, "spoon", feeding_trajectory_2()),
    }
    for name, (cam, intr, extr, lms, img, tool, traj) in fixtures.items():
        out = root / name
        out.mkdir(parents=True, exist_ok=True)
        img.save(out / "scene.png")
        draw_wrist_image(tool).save(out / "wrist.png")
        (out / "scene.json").write_text(
            json.dumps(scene_dict(lms, cam, intr, extr, "wrist.png"), indent=2), encoding="utf-8"
        )
        (out / "trajectory.json").write_text(json.dumps(traj, indent=2), encoding="utf-8")

    check_fixture(root, "bathing_1", (9, 39), ("force_onset", "force_termination"))
    check_fixture(root, "bathing_2", (9, 45), ("force_onset", "force_termination"))
    check_fixture(root, "shaving_1", (12, 30), ("force_onset", "force_termination"))
    check_fixture(root, "shaving_2", (12, 32), ("force_onset", "force_termination"))
    check_fixture(root, "feeding_1", (12,), ("pause",))
    check_fixture(root, "feeding_2", (12,), ("pause",))
    check_bathing_reference_values(root)
    print(f"fixtures written to {root}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
