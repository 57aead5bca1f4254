"""Scripted baseline generator and the entailment evaluation harness.

Scoring direction: the ground-truth paragraph is the premise and the generated
statement is the hypothesis, so a statement scores high only when it adds no
information absent from the ground truth. Group statistics use the population
standard deviation.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Protocol

import httpx

from .core import BodyLandmarkSet, Trajectory
from .kinematics import nearest_landmark

BASELINE_TEMPLATE = "I'm moving towards your {name}."


@dataclass(frozen=True)
class EvaluationRecord:
    task: str
    strategy: str  # "cori" | "baseline" | "oracle_summary"
    segment_index: int
    statement: str
    ground_truth: str
    trajectory_id: str = ""
    participant: str = ""
    entailment_probability: float | None = None
    error: str | None = None


def generate_baseline_statement(
    segment_range: tuple[int, int], trajectory: Trajectory, landmarks: BodyLandmarkSet
) -> str:
    """Scripted statement naming the landmark nearest to the segment's last waypoint."""
    _, end = segment_range
    name, _ = nearest_landmark(trajectory.waypoint(end).position_m, landmarks)
    return BASELINE_TEMPLATE.format(name=name)


class EntailmentScorer(Protocol):
    def score(self, premise: str, hypothesis: str) -> float:
        """Probability that ``premise`` entails ``hypothesis``, in [0, 1]."""
        ...


@dataclass
class HttpEntailmentScorer:
    """Client for the scoring endpoint: POST {premise, hypothesis} -> class
    probabilities."""

    url: str
    timeout_s: float = 60.0

    def score(self, premise: str, hypothesis: str) -> float:
        response = httpx.post(
            self.url, json={"premise": premise, "hypothesis": hypothesis}, timeout=self.timeout_s
        )
        response.raise_for_status()
        return float(response.json()["entailment"])


@dataclass
class CallableScorer:
    fn: object

    def score(self, premise: str, hypothesis: str) -> float:
        return float(self.fn(premise, hypothesis))


def score_statements(
    records: list[EvaluationRecord], scorer: EntailmentScorer, retry_limit: int = 2
) -> list[EvaluationRecord]:
    """Score each record; transient scorer failures are retried per record and
    then flagged on the record instead of aborting the batch."""
    scored: list[EvaluationRecord] = []
    for record in records:
        if not record.statement.strip():
            raise ValueError(
                f"empty statement for {record.task}/{record.strategy} segment {record.segment_index}"
            )
        if not record.ground_truth.strip():
            raise ValueError(
                f"empty ground truth for {record.task}/{record.strategy} segment {record.segment_index}"
            )
        probability = None
        error = None
        for attempt in range(retry_limit + 1):
            try:
                probability = float(scorer.score(record.ground_truth, record.statement))
                break
            except Exception as exc:  # noqa: BLE001 - flagged per record
                error = f"{type(exc).__name__}: {exc}"
        if probability is not None and not 0.0 <= probability <= 1.0:
            raise ValueError(f"scorer returned probability outside [0, 1]: {probability}")
        scored.append(replace(record, entailment_probability=probability, error=error))
    return scored


@dataclass(frozen=True)
class ScoreSummary:
    mean: float
    stddev: float
    count: int

    @property
    def formatted(self) -> str:
        return f"{self.mean:.2f} (±{self.stddev:.2f})"


def aggregate_scores(records: list[EvaluationRecord]) -> dict[tuple[str, str], ScoreSummary]:
    """Mean and population standard deviation per (task, strategy) group."""
    groups: dict[tuple[str, str], list[float]] = {}
    for record in records:
        if record.entailment_probability is None:
            continue
        groups.setdefault((record.task, record.strategy), []).append(
            record.entailment_probability
        )
    if not groups:
        raise ValueError("no scored records to aggregate")
    summaries = {}
    for key, values in groups.items():
        summaries[key] = ScoreSummary(
            mean=statistics.fmean(values),
            stddev=statistics.pstdev(values),
            count=len(values),
        )
    return summaries


def format_score_table(summaries: dict[tuple[str, str], ScoreSummary]) -> str:
    """Tab-separated report, one row per strategy and one column per task."""
    tasks = sorted({task for task, _ in summaries})
    strategies = sorted({strategy for _, strategy in summaries})
    lines = ["strategy\t" + "\t".join(tasks)]
    for strategy in strategies:
        cells = [
            summaries[(task, strategy)].formatted if (task, strategy) in summaries else "-"
            for task in tasks
        ]
        lines.append(strategy + "\t" + "\t".join(cells))
    return "\n".join(lines)


@dataclass(frozen=True)
class GroundTruthSet:
    task: str
    trajectory_id: str
    paragraphs: tuple[str, ...]
    summaries: tuple[str, ...]


def load_ground_truth_corpus(root: str | Path) -> list[GroundTruthSet]:
    """Load ``<root>/<task>/<trajectory>/segment_<k>.txt`` paragraphs and their
    ``summary_<k>.txt`` one-sentence condensations."""
    root = Path(root)
    sets: list[GroundTruthSet] = []
    for task_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for traj_dir in sorted(p for p in task_dir.iterdir() if p.is_dir()):
            paragraphs = []
            summaries = []
            k = 1
            while (traj_dir / f"segment_{k}.txt").exists():
                paragraphs.append((traj_dir / f"segment_{k}.txt").read_text("utf-8").strip())
                summary_path = traj_dir / f"summary_{k}.txt"
                summaries.append(
                    summary_path.read_text("utf-8").strip() if summary_path.exists() else ""
                )
                k += 1
            if paragraphs:
                sets.append(
                    GroundTruthSet(
                        task=task_dir.name,
                        trajectory_id=traj_dir.name,
                        paragraphs=tuple(paragraphs),
                        summaries=tuple(summaries),
                    )
                )
    return sets


def load_statement_samples(path: str | Path) -> list[dict]:
    """Sample generated statements: a JSON list of {task, trajectory, participant,
    statements: [one per segment]}."""
    return json.loads(Path(path).read_text("utf-8"))


def build_records(
    corpus: list[GroundTruthSet],
    samples: list[dict],
    baselines: dict[tuple[str, str], list[str]] | None = None,
) -> list[EvaluationRecord]:
    """Assemble unscored records for sample statements, oracle summaries, and
    (optionally) baseline statements keyed by (task, trajectory)."""
    by_key = {(gt.task, gt.trajectory_id): gt for gt in corpus}
    records: list[EvaluationRecord] = []
    for sample in samples:
        gt = by_key[(sample["task"], sample["trajectory"])]
        for k, statement in enumerate(sample["statements"], start=1):
            records.append(
                EvaluationRecord(
                    task=gt.task,
                    strategy="cori",
                    segment_index=k,
                    statement=statement,
                    ground_truth=gt.paragraphs[k - 1],
                    trajectory_id=gt.trajectory_id,
                    participant=sample.get("participant", ""),
                )
            )
    for gt in corpus:
        for k, summary in enumerate(gt.summaries, start=1):
            if not summary:
                continue
            records.append(
                EvaluationRecord(
                    task=gt.task,
                    strategy="oracle_summary",
                    segment_index=k,
                    statement=summary,
                    ground_truth=gt.paragraphs[k - 1],
                    trajectory_id=gt.trajectory_id,
                )
            )
    if baselines:
        for (task, trajectory_id), statements in baselines.items():
            gt = by_key[(task, trajectory_id)]
            for k, statement in enumerate(statements, start=1):
                records.append(
                    EvaluationRecord(
                        task=task,
                        strategy="baseline",
                        segment_index=k,
                        statement=statement,
                        ground_truth=gt.paragraphs[k - 1],
                        trajectory_id=trajectory_id,
                    )
                )
    return records
