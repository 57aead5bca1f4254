"""Command-line entry point: run the full pipeline, or stop after
segmentation/rendering, or run the entailment evaluation harness.

Every artifact a stage produces is written to the output directory before the
process exits 0; failures exit nonzero with a stage-tagged diagnostic.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import core, evaluation
from .annotation import annotate_person
from .llm import ClientConfig, HttpTransport, MockTransport, TransportError
from .narration import format_subtitles, save_schedule, schedule_narration
from .prompts import (
    PipelineArtifacts,
    PipelineConfig,
    PipelineStageError,
    run_pipeline,
)
from .rendering import render_segment_views, save_png
from .segmentation import segment_trajectory

logger = logging.getLogger(__name__)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text("utf-8"))


def _client_config(config: dict) -> ClientConfig:
    keys = ClientConfig.__dataclass_fields__.keys()
    return ClientConfig(**{k: v for k, v in config.items() if k in keys})


def _pipeline_config(config: dict) -> PipelineConfig:
    kwargs = {}
    for key in ("vlm_model", "reasoning_model", "retry_limit", "pause_threshold_s", "margin_fraction"):
        if key in config:
            kwargs[key] = config[key]
    return PipelineConfig(**kwargs)


def _write_render_artifacts(out: Path, scene, annotated, views) -> None:
    stem = scene.source_path.stem if scene.source_path else "scene"
    save_png(annotated.annotated_image, out / f"{stem}_annotated.png")
    manifest = {"segments": []}
    for view in views:
        full_name = f"seg{view.segment_index}_full.png"
        crop_name = f"seg{view.segment_index}_crop.png"
        save_png(view.full_image, out / full_name)
        save_png(view.crop_image, out / crop_name)
        rect = view.crop_rect
        manifest["segments"].append(
            {
                "k": view.segment_index,
                "full": full_name,
                "crop": crop_name,
                "crop_rect": [rect.x0, rect.y0, rect.x1, rect.y1],
                "projected_points": [list(p) for p in view.projected_points],
            }
        )
    (out / "render_manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")


def _cmd_segment(args) -> int:
    trajectory = core.load_trajectory(args.trajectory)
    config = _load_config(args.config)
    result = segment_trajectory(trajectory, config.get("pause_threshold_s", 2.0))
    payload = {
        "boundaries": [
            {"index": b.index, "reasons": list(b.reasons)} for b in result.boundaries
        ],
        "ranges": [list(r) for r in result.ranges],
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "segmentation.json").write_text(text, encoding="utf-8")
    print(text)
    return 0


def _cmd_render(args) -> int:
    scene, trajectory = core.load_scene_and_trajectory(args.scene, args.trajectory)
    config = _load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    annotated = annotate_person(scene, config.get("margin_fraction", 0.6))
    segmentation = segment_trajectory(trajectory, config.get("pause_threshold_s", 2.0))
    views = render_segment_views(annotated, trajectory, segmentation, scene.camera)
    _write_render_artifacts(out, scene, annotated, views)
    print(f"wrote {2 * len(views) + 1} images to {out}")
    return 0


def _cmd_run(args) -> int:
    scene, trajectory = core.load_scene_and_trajectory(args.scene, args.trajectory)
    config = _load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.mock_transcript:
        transport = MockTransport.from_file(args.mock_transcript)
    else:
        transport = HttpTransport(_client_config(config))
    artifacts = PipelineArtifacts()
    plan = run_pipeline(scene, trajectory, transport, _pipeline_config(config), artifacts)

    _write_render_artifacts(out, scene, artifacts.annotated, artifacts.views)
    transcript = [
        {
            "stage": e.stage,
            "segment": e.segment_index,
            "model": e.model_id,
            "prompt": e.prompt,
            "response": e.response,
            "image_count": e.image_count,
        }
        for e in artifacts.events
    ]
    (out / "transcript.json").write_text(json.dumps(transcript, indent=2), encoding="utf-8")
    plan_payload = {
        "statements": list(plan.statements),
        "overall_intention": plan.overall_intention,
        "user_cooperation": list(plan.source_outputs.user_cooperation),
        "retry_count": plan.retry_count,
    }
    (out / "plan.json").write_text(json.dumps(plan_payload, indent=2), encoding="utf-8")
    schedule = schedule_narration(plan, trajectory, artifacts.segmentation)
    save_schedule(schedule, out / "schedule.json")
    (out / "schedule.srt").write_text(format_subtitles(schedule), encoding="utf-8")
    print(f"plan with {len(plan.statements)} statements written to {out}")
    return 0


def _discover_baselines(fixtures_root: Path) -> dict[tuple[str, str], list[str]]:
    """Baseline statements for every fixture directory named <task>_<n> with a
    matching ground-truth trajectory_<n>."""
    baselines: dict[tuple[str, str], list[str]] = {}
    for fixture_dir in sorted(fixtures_root.iterdir()):
        if not fixture_dir.is_dir() or "_" not in fixture_dir.name:
            continue
        scene_path = fixture_dir / "scene.json"
        traj_path = fixture_dir / "trajectory.json"
        if not (scene_path.exists() and traj_path.exists()):
            continue
        task, _, number = fixture_dir.name.rpartition("_")
        scene, trajectory = core.load_scene_and_trajectory(scene_path, traj_path)
        segmentation = segment_trajectory(trajectory)
        baselines[(task, f"trajectory_{number}")] = [
            evaluation.generate_baseline_statement(rng, trajectory, scene.landmarks)
            for rng in segmentation.ranges
        ]
    return baselines


def _cmd_evaluate(args) -> int:
    fixtures_root = Path(args.fixtures)
    corpus = evaluation.load_ground_truth_corpus(fixtures_root / "ground_truth")
    samples = evaluation.load_statement_samples(fixtures_root / "cori_samples.json")
    baselines = _discover_baselines(fixtures_root)
    records = evaluation.build_records(corpus, samples, baselines)
    if args.scorer_url:
        scorer = evaluation.HttpEntailmentScorer(url=args.scorer_url)
    else:
        stub = float(args.stub_score)
        scorer = evaluation.CallableScorer(lambda premise, hypothesis: stub)
    scored = evaluation.score_statements(records, scorer)
    summaries = evaluation.aggregate_scores(scored)
    table = evaluation.format_score_table(summaries)
    print(table)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "entailment_table.tsv").write_text(table + "\n", encoding="utf-8")
        rows = [asdict(r) for r in scored]
        (out / "entailment_records.json").write_text(json.dumps(rows, indent=2), encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intentcomm",
        description="Robot intent communication: overlays, prompts, statements, narration timing.",
    )
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="full pipeline: images, prompts, plan, schedule")
    run.add_argument("--scene", required=True)
    run.add_argument("--trajectory", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--mock-transcript", help="replay canned responses instead of a live endpoint")
    run.add_argument("--config", help="JSON config (model and pipeline settings)")
    run.set_defaults(fn=_cmd_run)

    render = sub.add_parser("render", help="stop after overlay rendering")
    render.add_argument("--scene", required=True)
    render.add_argument("--trajectory", required=True)
    render.add_argument("--out", required=True)
    render.add_argument("--config")
    render.set_defaults(fn=_cmd_render)

    segment = sub.add_parser("segment", help="stop after segmentation, emit ranges")
    segment.add_argument("--trajectory", required=True)
    segment.add_argument("--out")
    segment.add_argument("--config")
    segment.set_defaults(fn=_cmd_segment)

    evaluate = sub.add_parser("evaluate", help="entailment evaluation over the fixture corpus")
    evaluate.add_argument("--fixtures", required=True, help="fixtures root directory")
    evaluate.add_argument("--scorer-url", help="entailment scoring endpoint (POST /score)")
    evaluate.add_argument("--stub-score", default="1.0", help="constant score when no endpoint is given")
    evaluate.add_argument("--out")
    evaluate.set_defaults(fn=_cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        print(f"error [input]: file not found: {exc.filename or exc}", file=sys.stderr)
        return 2
    except core.ParseError as exc:
        print(f"error [parse]: {exc}", file=sys.stderr)
        return 2
    except core.ValidationError as exc:
        print("error [validation]:", file=sys.stderr)
        for violation in exc.violations:
            print(f"  - {violation}", file=sys.stderr)
        return 3
    except PipelineStageError as exc:
        print(f"error [pipeline]: {exc}", file=sys.stderr)
        return 4
    except TransportError as exc:
        print(f"error [transport]: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
