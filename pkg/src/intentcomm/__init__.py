"""Robot intent communication pipeline: trajectory segmentation, per-segment
image overlays, staged language-model prompting, narration timing, and an
entailment evaluation harness."""

from .annotation import AnnotatedScene, annotate_person, compute_face_region
from .core import (
    BodyLandmarkSet,
    CameraModel,
    IntervalForceProfile,
    Landmark,
    ParseError,
    SceneBundle,
    Trajectory,
    ValidationError,
    Waypoint,
    load_scene,
    load_scene_and_trajectory,
    load_trajectory,
    validate_trajectory,
)
from .evaluation import (
    EvaluationRecord,
    aggregate_scores,
    generate_baseline_statement,
    score_statements,
)
from .kinematics import SegmentKinematicReport, nearest_landmark, render_kinematic_report
from .llm import ChatSession, ClientConfig, HttpTransport, MockTransport
from .narration import NarrationItem, estimate_speech_duration, schedule_narration
from .prompts import (
    CommunicationPlan,
    PipelineArtifacts,
    PipelineConfig,
    StageOutputs,
    build_environment_prompt,
    build_generation_prompt,
    build_segment_prompt,
    extract_section,
    parse_statements,
    run_pipeline,
)
from .rendering import (
    RenderedSegmentView,
    RenderStyle,
    force_color,
    project_points,
    render_segment_views,
    velocity_color,
)
from .segmentation import SegmentationResult, segment_trajectory

__version__ = "0.1.0"

__all__ = [
    "AnnotatedScene",
    "BodyLandmarkSet",
    "CameraModel",
    "ChatSession",
    "ClientConfig",
    "CommunicationPlan",
    "EvaluationRecord",
    "HttpTransport",
    "IntervalForceProfile",
    "Landmark",
    "MockTransport",
    "NarrationItem",
    "ParseError",
    "PipelineArtifacts",
    "PipelineConfig",
    "RenderStyle",
    "RenderedSegmentView",
    "SceneBundle",
    "SegmentKinematicReport",
    "SegmentationResult",
    "StageOutputs",
    "Trajectory",
    "ValidationError",
    "Waypoint",
    "aggregate_scores",
    "annotate_person",
    "build_environment_prompt",
    "build_generation_prompt",
    "build_segment_prompt",
    "compute_face_region",
    "estimate_speech_duration",
    "extract_section",
    "force_color",
    "generate_baseline_statement",
    "load_scene",
    "load_scene_and_trajectory",
    "load_trajectory",
    "nearest_landmark",
    "parse_statements",
    "project_points",
    "render_kinematic_report",
    "render_segment_views",
    "run_pipeline",
    "schedule_narration",
    "score_statements",
    "segment_trajectory",
    "validate_trajectory",
    "velocity_color",
]
