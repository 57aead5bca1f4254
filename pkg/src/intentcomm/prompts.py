"""Three-stage prompt protocol: environment comprehension, per-segment
trajectory comprehension (one cumulative vision-model conversation), and a
final single-turn communication-generation query to a reasoning model.

Static prompt text lives in template files with ``{{slot}}`` placeholders;
the only dynamic content is the per-segment kinematic report and the
conditional blocks (wrist-image wording, held-object questions, final-segment
addendum).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .annotation import AnnotatedScene, annotate_person
from .core import SceneBundle, Trajectory
from .kinematics import SegmentKinematicReport, render_kinematic_report
from .llm import ChatSession, Transport
from .rendering import DEFAULT_STYLE, RenderStyle, RenderedSegmentView, render_segment_views
from .segmentation import SegmentationResult, segment_trajectory

logger = logging.getLogger(__name__)

IMAGE_INTRO_TWO_VIEWS = (
    "You are given two base images of what you currently see, with the first one being a "
    "big-picture view, and the second one from a camera mounted at the wrist of the gripper, "
    "capturing the content held by the gripper. "
)
IMAGE_INTRO_SINGLE_VIEW = (
    "You are given a base image of what you currently see, giving a big-picture view. "
)
HELD_OBJECT_QUESTIONS = (
    "\nWhat is the robot holding in between its grippers?\n"
    "Use your most likely guess for what the thing is, and don't infer beyond what you see. "
    "Suppose the robot does not let go of what it's holding. Then what function could this "
    "thing serve, in the context?"
)

SEGMENT_DESCRIPTION_HEADING = "Segment description"
OVERALL_INTENTION_HEADING = "Overall intention"
USER_COOPERATION_HEADING = "User cooperation"


class MissingHeadingError(ValueError):
    def __init__(self, heading: str, response: str):
        self.heading = heading
        self.response = response
        super().__init__(f"missing heading: '## {heading}'")


class StatementParseError(ValueError):
    def __init__(self, message: str, found_markers: list[int], response: str):
        self.found_markers = found_markers
        self.response = response
        super().__init__(f"{message} (found markers: {found_markers})")


class PipelineStageError(RuntimeError):
    def __init__(self, stage: str, segment_index: int | None, message: str, response: str = ""):
        self.stage = stage
        self.segment_index = segment_index
        self.response = response
        where = f"{stage}" + (f" (segment {segment_index})" if segment_index else "")
        super().__init__(f"{where}: {message}")


def load_template(name: str) -> str:
    return resources.files("intentcomm.templates").joinpath(f"{name}.txt").read_text("utf-8")


def _fill(template: str, slots: dict[str, str]) -> str:
    out = template
    for key, value in slots.items():
        out = out.replace("{{" + key + "}}", value)
    return out


@dataclass(frozen=True, eq=False)
class Prompt:
    text: str
    images: tuple[np.ndarray, ...] = ()


@dataclass(frozen=True)
class StageOutputs:
    environment_summary: str
    held_object_description: str | None
    segment_descriptions: tuple[str, ...]
    overall_intention: str
    user_cooperation: tuple[str, ...]


@dataclass(frozen=True)
class CommunicationPlan:
    statements: tuple[str, ...]
    overall_intention: str
    source_outputs: StageOutputs
    retry_count: int = 0


@dataclass(frozen=True)
class PipelineConfig:
    vlm_model: str = "gpt-4o"
    reasoning_model: str = "o3-mini"
    retry_limit: int = 2
    pause_threshold_s: float = 2.0
    margin_fraction: float = 0.6
    render_style: RenderStyle = DEFAULT_STYLE


@dataclass
class TraceEvent:
    stage: str
    segment_index: int | None
    model_id: str
    prompt: str
    response: str
    image_count: int


@dataclass
class PipelineArtifacts:
    """Optional sink for everything a run produces besides the plan."""

    annotated: AnnotatedScene | None = None
    segmentation: SegmentationResult | None = None
    views: list[RenderedSegmentView] = field(default_factory=list)
    reports: list[SegmentKinematicReport] = field(default_factory=list)
    events: list[TraceEvent] = field(default_factory=list)


def build_environment_prompt(
    annotated: AnnotatedScene,
    wrist_image: np.ndarray | None,
    gripper_closed_at_start: bool,
) -> Prompt:
    """Stage-1 prompt. Held-object questions appear only when the gripper is
    closed at the start; the single-image wording is used without a wrist view."""
    intro = IMAGE_INTRO_TWO_VIEWS if wrist_image is not None else IMAGE_INTRO_SINGLE_VIEW
    held = HELD_OBJECT_QUESTIONS if gripper_closed_at_start else ""
    text = _fill(
        load_template("environment"),
        {"image_intro": intro, "held_object_questions": held},
    ).rstrip("\n")
    images: tuple[np.ndarray, ...] = (annotated.annotated_image,)
    if wrist_image is not None:
        images = images + (wrist_image,)
    return Prompt(text=text, images=images)


def kinematic_section(report: SegmentKinematicReport) -> str:
    return (
        f"# Kinematic description for image {report.segment_index}\n"
        f"{report.gripper_line}\n"
        "## Position descriptions\n"
        f"{report.position_lines}\n"
        "## Velocity descriptions\n"
        f"{report.velocity_lines}\n"
        "## Force descriptions\n"
        f"{report.force_lines}\n"
        "## Human body landmark positions\n"
        f"{report.landmark_lines}"
    )


def build_segment_prompt(
    segment_index: int,
    report: SegmentKinematicReport,
    is_last: bool,
    images: tuple[np.ndarray, ...] = (),
) -> Prompt:
    """Stage-2 prompt for one segment: fixed preamble, dynamic kinematic
    section, fixed question battery, plus the intention/cooperation addendum
    on the last segment."""
    parts = [
        load_template("trajectory_preamble").rstrip("\n"),
        kinematic_section(report),
        load_template("task_questions").rstrip("\n"),
    ]
    if is_last:
        parts.append(load_template("final_addendum").rstrip("\n"))
    return Prompt(text="\n\n".join(parts), images=images)


def build_generation_prompt(outputs: StageOutputs) -> str:
    """Stage-3 prompt for the reasoning model, built only from extracted text."""
    segment_block = "\n".join(
        f"- Segment {k}: {desc}" for k, desc in enumerate(outputs.segment_descriptions, start=1)
    )
    cooperation_block = "\n".join(
        f"- Segment {k}: {coop}" for k, coop in enumerate(outputs.user_cooperation, start=1)
    )
    return _fill(
        load_template("generation"),
        {
            "environment_text": outputs.environment_summary,
            "segment_descriptions": segment_block,
            "overall_intention": outputs.overall_intention,
            "user_cooperation": cooperation_block,
        },
    ).rstrip("\n")


_HEADING_LINE = r"^[ \t]{0,3}#{1,6}[ \t]*{target}[ \t]*:?[ \t]*$"


def extract_section(response: str, heading: str) -> str:
    """Body between the first (case-insensitive) ``## heading`` line and the
    next ``#``-prefixed heading or end of text, trimmed.

    An empty body under a present heading is valid and returns the empty
    string; an absent heading raises :class:`MissingHeadingError`.
    """
    pattern = re.compile(
        _HEADING_LINE.format(target=re.escape(heading)), re.IGNORECASE | re.MULTILINE
    )
    match = pattern.search(response)
    if match is None:
        raise MissingHeadingError(heading, response)
    body_start = match.end()
    next_heading = re.compile(r"^[ \t]{0,3}#{1,6}[ \t]", re.MULTILINE)
    following = next_heading.search(response, body_start)
    body_end = following.start() if following else len(response)
    return response[body_start:body_end].strip()


_STATEMENT_MARKER = re.compile(r"Statement\s+(\d+)\s*:")


def parse_statements(response: str, expected_count: int) -> list[str]:
    """Extract the sentence after each ``Statement k:`` marker, k = 1..expected."""
    if expected_count < 1:
        raise ValueError("expected_count must be >= 1")
    markers = list(_STATEMENT_MARKER.finditer(response))
    numbers = [int(m.group(1)) for m in markers]
    if numbers != list(range(1, expected_count + 1)):
        raise StatementParseError(
            f"expected markers 1..{expected_count} in order", numbers, response
        )
    statements = []
    for i, match in enumerate(markers):
        end = markers[i + 1].start() if i + 1 < len(markers) else len(response)
        statement = response[match.end() : end].strip()
        if not statement:
            raise StatementParseError(f"statement {numbers[i]} is empty", numbers, response)
        statements.append(statement)
    return statements


def _parse_cooperation(section: str, segment_count: int) -> list[str]:
    entries = {
        int(m.group(1)): m.group(2).strip()
        for m in re.finditer(r"^-\s*Segment\s+(\d+)\s*:\s*(.+)$", section, re.MULTILINE)
    }
    return [entries.get(k, "none") for k in range(1, segment_count + 1)]


class _RetryingExtractor:
    """Extracts headed sections from a session's latest response, issuing
    corrective turns when a required heading is missing."""

    def __init__(self, session: ChatSession, retry_limit: int):
        self.session = session
        self.retry_limit = retry_limit
        self.retries_used = 0

    def extract(self, response: str, headings: list[str], stage: str, segment: int | None) -> dict[str, str]:
        values: dict[str, str] = {}
        attempts = 0
        while True:
            missing = []
            for heading in headings:
                if heading in values:
                    continue
                try:
                    values[heading] = extract_section(response, heading)
                except MissingHeadingError:
                    missing.append(heading)
            if not missing:
                return values
            if attempts >= self.retry_limit:
                raise PipelineStageError(
                    stage, segment,
                    f"missing heading(s) {missing} after {attempts} retries",
                    response,
                )
            attempts += 1
            self.retries_used += 1
            corrective = (
                "Your previous response was missing the required heading/format: "
                + ", ".join(f'"## {h}"' for h in missing)
                + ". Answer again and keep the required content under "
                + ("these exact headings." if len(missing) > 1 else "this exact heading.")
            )
            logger.info("%s: corrective retry %d for %s", stage, attempts, missing)
            response = self.session.send_turn(corrective)


def run_pipeline(
    scene: SceneBundle,
    trajectory: Trajectory,
    transport: Transport,
    config: PipelineConfig = PipelineConfig(),
    artifacts: PipelineArtifacts | None = None,
) -> CommunicationPlan:
    """Execute annotation, segmentation, rendering, the cumulative vision
    conversation, and the final reasoning query; return the parsed plan.

    Only de-identified rasters (the annotated image, overlay views, and the
    wrist image) are ever attached to outgoing prompts.
    """
    annotated = annotate_person(scene, config.margin_fraction)
    segmentation = segment_trajectory(trajectory, config.pause_threshold_s)
    views = render_segment_views(
        annotated, trajectory, segmentation, scene.camera, config.render_style
    )
    reports = [
        render_kinematic_report(trajectory, rng, scene.landmarks, k)
        for k, rng in enumerate(segmentation.ranges, start=1)
    ]
    if artifacts is not None:
        artifacts.annotated = annotated
        artifacts.segmentation = segmentation
        artifacts.views = views
        artifacts.reports = reports

    def record(stage: str, segment: int | None, model: str, prompt: Prompt | str, response: str):
        if artifacts is None:
            return
        text = prompt.text if isinstance(prompt, Prompt) else prompt
        count = len(prompt.images) if isinstance(prompt, Prompt) else 0
        artifacts.events.append(TraceEvent(stage, segment, model, text, response, count))

    vlm = ChatSession(config.vlm_model, transport)
    extractor = _RetryingExtractor(vlm, config.retry_limit)

    env_prompt = build_environment_prompt(
        annotated, scene.wrist_image, trajectory.waypoints[0].gripper_closed
    )
    env_response = vlm.send_turn(env_prompt.text, env_prompt.images)
    record("environment", None, config.vlm_model, env_prompt, env_response)

    try:
        held_object = extract_section(env_response, "Object in Gripper")
    except MissingHeadingError:
        held_object = None

    descriptions: list[str] = []
    intention = ""
    cooperation_section = ""
    segment_count = segmentation.segment_count
    for k in range(1, segment_count + 1):
        is_last = k == segment_count
        prompt = build_segment_prompt(
            k, reports[k - 1], is_last,
            images=(views[k - 1].full_image, views[k - 1].crop_image),
        )
        response = vlm.send_turn(prompt.text, prompt.images)
        record("trajectory", k, config.vlm_model, prompt, response)
        headings = [SEGMENT_DESCRIPTION_HEADING]
        if is_last:
            headings += [OVERALL_INTENTION_HEADING, USER_COOPERATION_HEADING]
        values = extractor.extract(response, headings, "trajectory", k)
        descriptions.append(values[SEGMENT_DESCRIPTION_HEADING])
        if is_last:
            intention = values[OVERALL_INTENTION_HEADING]
            cooperation_section = values[USER_COOPERATION_HEADING]

    outputs = StageOutputs(
        environment_summary=env_response,
        held_object_description=held_object,
        segment_descriptions=tuple(descriptions),
        overall_intention=intention,
        user_cooperation=tuple(_parse_cooperation(cooperation_section, segment_count)),
    )

    generation_prompt = build_generation_prompt(outputs)
    reasoning = ChatSession(config.reasoning_model, transport)
    response = reasoning.send_turn(generation_prompt)
    record("generation", None, config.reasoning_model, generation_prompt, response)

    retries = extractor.retries_used
    attempts = 0
    while True:
        try:
            statements = parse_statements(response, segment_count)
            break
        except StatementParseError as exc:
            if attempts >= config.retry_limit:
                raise PipelineStageError(
                    "generation", None,
                    f"statement parsing failed after {attempts} retries: {exc}",
                    response,
                ) from exc
            attempts += 1
            retries += 1
            corrective = (
                "Your previous response was missing the required heading/format. "
                f'Format your output as "Statement x: <your sentence>" with exactly '
                f"{segment_count} statements numbered 1 to {segment_count}."
            )
            logger.info("generation: corrective retry %d", attempts)
            response = reasoning.send_turn(corrective)
            record("generation-retry", None, config.reasoning_model, corrective, response)

    return CommunicationPlan(
        statements=tuple(statements),
        overall_intention=outputs.overall_intention,
        source_outputs=outputs,
        retry_count=retries,
    )
