"""Split a trajectory into interaction-aware segments.

A boundary is placed at an interior waypoint w (2 <= w <= N-1) when any of
three criteria fires:

- gripper_change: the gripper state differs between waypoints w-1 and w
  (boundary at the later waypoint of the changing pair);
- force_onset / force_termination: the forceful status of intervals w-1 and w
  differs (boundary at the waypoint the two intervals share);
- pause: the position is unchanged from w to w+1 and the time gap exceeds the
  pause threshold (boundary at the earlier waypoint of the pause interval).

Segments are the boundary-sharing decomposition: consecutive ranges share
their boundary waypoint, so range k+1 starts at the waypoint range k ends on.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import FORCE_EPSILON_N, Trajectory

GRIPPER_CHANGE = "gripper_change"
FORCE_ONSET = "force_onset"
FORCE_TERMINATION = "force_termination"
PAUSE = "pause"

DEFAULT_PAUSE_THRESHOLD_S = 2.0


@dataclass(frozen=True)
class SegmentBoundary:
    index: int
    reasons: tuple[str, ...]


@dataclass(frozen=True)
class SegmentationResult:
    boundaries: tuple[SegmentBoundary, ...]
    ranges: tuple[tuple[int, int], ...]

    @property
    def boundary_indices(self) -> tuple[int, ...]:
        return tuple(b.index for b in self.boundaries)

    @property
    def segment_count(self) -> int:
        return len(self.ranges)


def segment_trajectory(
    trajectory: Trajectory,
    pause_threshold_s: float = DEFAULT_PAUSE_THRESHOLD_S,
    force_epsilon: float = FORCE_EPSILON_N,
) -> SegmentationResult:
    """Segment ``trajectory`` at gripper changes, force onset/termination, and pauses.

    Boundaries are restricted to interior waypoints so every segment carries at
    least one interval; simultaneous criteria at one waypoint merge into a
    single boundary with multiple reasons.
    """
    wps = trajectory.waypoints
    n = len(wps)
    if n < 2:
        raise ValueError("cannot segment a trajectory with fewer than 2 waypoints")

    boundaries: list[SegmentBoundary] = []
    for w in range(2, n):
        reasons: list[str] = []
        if wps[w - 2].gripper_closed != wps[w - 1].gripper_closed:
            reasons.append(GRIPPER_CHANGE)
        prev_forceful = trajectory.interval_is_forceful(w - 1, force_epsilon)
        next_forceful = trajectory.interval_is_forceful(w, force_epsilon)
        if prev_forceful != next_forceful:
            reasons.append(FORCE_ONSET if next_forceful else FORCE_TERMINATION)
        if (
            wps[w - 1].position_m == wps[w].position_m
            and wps[w].timestamp_s - wps[w - 1].timestamp_s > pause_threshold_s
        ):
            reasons.append(PAUSE)
        if reasons:
            boundaries.append(SegmentBoundary(index=w, reasons=tuple(reasons)))

    edges = [1] + [b.index for b in boundaries] + [n]
    ranges = tuple((edges[i], edges[i + 1]) for i in range(len(edges) - 1))
    return SegmentationResult(boundaries=tuple(boundaries), ranges=ranges)
