"""Textual kinematic descriptions embedded in the trajectory prompts.

All numbers are rendered in centimeters (one decimal), centimeters per second
(one decimal), or Newtons (two decimals), rounding ties away from zero.
Interval velocities are recomputed from positions and timestamps; the stored
per-waypoint speed feeds only the overlay coloring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .core import BodyLandmarkSet, Trajectory

NO_FORCE_SENTENCE = "There is no external force planned during this section."

TIE_EPSILON_M = 1e-12


def format_fixed(value: float, decimals: int) -> str:
    """Fixed-point formatting with ties rounded away from zero; never '-0.0'."""
    quantum = Decimal(1).scaleb(-decimals)
    result = Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP)
    if result == 0:
        result = abs(result)
    return f"{result:f}"


def format_cm(value_m: float) -> str:
    return format_fixed(value_m * 100.0, 1)


def format_newton(value_n: float) -> str:
    return format_fixed(value_n, 2)


def _cm_triplet(position_m: tuple[float, float, float]) -> str:
    return "({}, {}, {})".format(*(format_cm(c) for c in position_m))


@dataclass(frozen=True)
class SegmentKinematicReport:
    segment_index: int
    gripper_line: str
    position_lines: str
    velocity_lines: str
    force_lines: str
    landmark_lines: str
    nearest_start: tuple[str, float]
    nearest_end: tuple[str, float]


def nearest_landmark(
    position_m: tuple[float, float, float], landmarks: BodyLandmarkSet
) -> tuple[str, float]:
    """Euclidean nearest landmark in the base frame; ties (within 1e-12 m) go
    to the first canonical name in lexicographic order. Distance is returned
    in centimeters."""
    if not landmarks.entries:
        raise ValueError("landmark set is empty")
    distances = [
        (math.dist(position_m, lm.position_m), lm.name) for lm in landmarks.entries
    ]
    best = min(d for d, _ in distances)
    name = min(name for d, name in distances if d - best <= TIE_EPSILON_M)
    return name, best * 100.0


def render_kinematic_report(
    trajectory: Trajectory,
    segment_range: tuple[int, int],
    landmarks: BodyLandmarkSet,
    segment_index: int,
) -> SegmentKinematicReport:
    """Build the per-segment text blocks for the trajectory prompt.

    ``segment_range`` is a closed waypoint index range [start, end];
    ``segment_index`` is the 1-based image number used in the wording.
    """
    start, end = segment_range
    if not (1 <= start < end <= trajectory.n_waypoints):
        raise ValueError(f"invalid segment range [{start}, {end}]")

    gripper_state = "closed" if trajectory.waypoint(start).gripper_closed else "open"
    gripper_line = f"At the start of image {segment_index}, the gripper is {gripper_state}."

    position_parts: list[str] = []
    velocity_parts: list[str] = []
    for i in range(start, end):
        a = trajectory.waypoint(i)
        b = trajectory.waypoint(i + 1)
        position_parts.append(
            f"At waypoint {i}, the position of the gripper center is at {_cm_triplet(a.position_m)}."
        )
        delta = tuple(pb - pa for pa, pb in zip(a.position_m, b.position_m))
        position_parts.append(
            f"From waypoint {i} to waypoint {i + 1}, the general motion of the robot is "
            f"{_cm_triplet(delta)} centimeters."
        )
        speed_cm_s = math.dist(a.position_m, b.position_m) * 100.0 / (b.timestamp_s - a.timestamp_s)
        velocity_parts.append(
            f"From waypoint {i} to waypoint {i + 1}, the average velocity of the robot is "
            f"{format_fixed(speed_cm_s, 1)} centimeters per second."
        )
    position_parts.append(
        f"At waypoint {end}, the position of the gripper center is at "
        f"{_cm_triplet(trajectory.waypoint(end).position_m)}."
    )

    force_parts: list[str] = []
    for j in range(start, end):
        if not trajectory.interval_is_forceful(j):
            continue
        profile = trajectory.profile_for(j)
        if profile is not None:
            samples = profile.samples_n
        else:
            samples = (trajectory.waypoint(j).force_n, trajectory.waypoint(j + 1).force_n)
        rendered = ", ".join(format_newton(s) for s in samples)
        force_parts.append(
            f"From waypoint {j} to waypoint {j + 1}, the force magnitude of the robot "
            f"end-effector is: [{rendered}]."
        )
    force_lines = " ".join(force_parts) if force_parts else NO_FORCE_SENTENCE

    landmark_list = ", ".join(
        f"{lm.name}: {_cm_triplet(lm.position_m)} centimeters" for lm in landmarks.entries
    )
    nearest_start = nearest_landmark(trajectory.waypoint(start).position_m, landmarks)
    nearest_end = nearest_landmark(trajectory.waypoint(end).position_m, landmarks)
    landmark_lines = (
        "The following are the positions for each of the detected body landmarks in the image: "
        f"{landmark_list}.\n"
        f"The first waypoint in this segment is closest to the {nearest_start[0]} at a distance "
        f"of {format_fixed(nearest_start[1], 1)} centimeters. The last waypoint in this segment "
        f"is closest to the {nearest_end[0]} at a distance of {format_fixed(nearest_end[1], 1)} "
        "centimeters."
    )

    return SegmentKinematicReport(
        segment_index=segment_index,
        gripper_line=gripper_line,
        position_lines=" ".join(position_parts),
        velocity_lines=" ".join(velocity_parts),
        force_lines=force_lines,
        landmark_lines=landmark_lines,
        nearest_start=nearest_start,
        nearest_end=nearest_end,
    )
