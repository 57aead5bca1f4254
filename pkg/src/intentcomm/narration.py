"""Speech-motion timing: when each statement should start so that, from the
second segment on, motion begins halfway through its statement.

The unified timeline starts at 0 when the first statement begins; segment 1's
motion starts only after that statement completes. Motion is never paused for
speech, so statements that would collide are floored to the previous
statement's end with a logged warning.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

from .core import Trajectory
from .prompts import CommunicationPlan
from .segmentation import SegmentationResult

logger = logging.getLogger(__name__)

DEFAULT_RATE_WPM = 150.0


@dataclass(frozen=True)
class NarrationItem:
    segment_index: int
    statement: str
    speech_duration_s: float
    speech_start_s: float
    motion_start_s: float
    floored: bool = False


def estimate_speech_duration(statement: str, rate_wpm: float = DEFAULT_RATE_WPM) -> float:
    """Word count over speaking rate, in seconds. Callers with measured audio
    durations should pass those to the scheduler instead."""
    if rate_wpm <= 0:
        raise ValueError("rate_wpm must be positive")
    words = len(statement.split())
    return words / rate_wpm * 60.0


def schedule_narration(
    plan: CommunicationPlan,
    trajectory: Trajectory,
    segmentation: SegmentationResult,
    durations_s: list[float] | None = None,
) -> list[NarrationItem]:
    """Compute speech and motion start times for every statement.

    For k >= 2, speech_start = motion_start - 0.5 * duration, floored at the
    previous statement's end so no two speech intervals overlap.
    """
    statements = plan.statements
    if len(statements) != segmentation.segment_count:
        raise ValueError(
            f"plan has {len(statements)} statements for {segmentation.segment_count} segments"
        )
    if durations_s is None:
        durations = [estimate_speech_duration(s) for s in statements]
    else:
        if len(durations_s) != len(statements):
            raise ValueError("durations_s length must match statement count")
        durations = list(durations_s)

    # Shift the motion timeline so segment 1 begins right when statement 1 ends.
    shift = durations[0] - trajectory.waypoint(segmentation.ranges[0][0]).timestamp_s

    items = [
        NarrationItem(
            segment_index=1,
            statement=statements[0],
            speech_duration_s=durations[0],
            speech_start_s=0.0,
            motion_start_s=durations[0],
        )
    ]
    for k in range(2, len(statements) + 1):
        start_waypoint = segmentation.ranges[k - 1][0]
        motion_start = trajectory.waypoint(start_waypoint).timestamp_s + shift
        speech_start = motion_start - 0.5 * durations[k - 1]
        floored = False
        previous_end = items[-1].speech_start_s + items[-1].speech_duration_s
        if speech_start < previous_end:
            logger.warning(
                "statement %d (%.1f s) overlaps statement %d; flooring start %.2f -> %.2f",
                k, durations[k - 1], k - 1, speech_start, previous_end,
            )
            speech_start = previous_end
            floored = True
        items.append(
            NarrationItem(
                segment_index=k,
                statement=statements[k - 1],
                speech_duration_s=durations[k - 1],
                speech_start_s=speech_start,
                motion_start_s=motion_start,
                floored=floored,
            )
        )
    return items


def schedule_to_dict(items: list[NarrationItem]) -> dict:
    return {
        "items": [
            {
                "k": item.segment_index,
                "statement": item.statement,
                "speech_start_s": item.speech_start_s,
                "motion_start_s": item.motion_start_s,
                "speech_duration_s": item.speech_duration_s,
            }
            for item in items
        ]
    }


def save_schedule(items: list[NarrationItem], path) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(schedule_to_dict(items), fp, indent=2)


def _timestamp(seconds: float) -> str:
    millis = int(round(seconds * 1000))
    h, rem = divmod(millis, 3_600_000)
    m, rem = divmod(rem, 60_000)
    s, ms = divmod(rem, 1000)
    return f"{h:02d}:{m:02d}:{s:02d},{ms:03d}"


def format_subtitles(items: list[NarrationItem]) -> str:
    """SRT-style export for reviewing the schedule."""
    blocks = []
    for i, item in enumerate(items, start=1):
        start = _timestamp(item.speech_start_s)
        end = _timestamp(item.speech_start_s + item.speech_duration_s)
        blocks.append(f"{i}\n{start} --> {end}\n{item.statement}\n")
    return "\n".join(blocks)
