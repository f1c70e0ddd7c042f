"""Typed domain records and their JSONL wire format.

Every corpus handled by this toolkit is a JSONL file whose lines are
one of the record shapes below.  ``parse_record`` infers the shape
from the field set of a decoded line; ``serialize_record`` emits the
canonical form (fixed key order, compact separators, UTF-8) so that
serialization is deterministic and canonical lines round-trip
byte-identically.

Two error types cover the failure modes: ``ParseError`` for lines that
cannot be decoded into any known shape, ``ValidationError`` for decoded
records that violate a field invariant (the offending field is named).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional, Union

COORD_LIMIT = 1000  # image coordinates are integers in [0, COORD_LIMIT)

PREDICTION_TASKS = ("planning", "affordance", "trajectory")

# Canonical question taxonomy: ten types, fixed order.  Paired
# positive/negative types are distinct entries.
QUESTION_TYPES = (
    "planning",
    "planning_with_context",
    "planning_remaining",
    "future_prediction",
    "generative_affordance",
    "past_description",
    "success_positive",
    "success_negative",
    "discriminative_affordance_positive",
    "discriminative_affordance_negative",
)

TEMPLATES_PER_TYPE = 5


class ValidationError(ValueError):
    """A record violates a field invariant; ``field`` names the offender."""

    def __init__(self, field: str, message: str):
        super().__init__(message)
        self.field = field


class ParseError(ValueError):
    """A line could not be decoded into any known record shape."""

    def __init__(self, message: str, line_no: Optional[int] = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


def _require_int(field: str, value: Any, lo: Optional[int] = None, hi: Optional[int] = None) -> int:
    # bool is an int subclass; it is never a valid coordinate/count
    if type(value) is not int:
        raise ValidationError(field, f"{field} must be an integer, got {type(value).__name__}")
    if lo is not None and value < lo:
        raise ValidationError(field, f"{field} must be >= {lo}, got {value}")
    if hi is not None and value >= hi:
        raise ValidationError(field, f"{field} must be < {hi}, got {value}")
    return value


def _require_str(field: str, value: Any, allow_empty: bool = True) -> str:
    if type(value) is not str:
        raise ValidationError(field, f"{field} must be a string, got {type(value).__name__}")
    if not allow_empty and not value:
        raise ValidationError(field, f"{field} must be a non-empty string")
    return value


def _require_bool(field: str, value: Any) -> bool:
    if type(value) is not bool:
        raise ValidationError(field, f"{field} must be a boolean, got {type(value).__name__}")
    return value


@dataclass(frozen=True)
class Waypoint:
    """A 2D image point with integer coordinates in [0, COORD_LIMIT)."""

    x: int
    y: int

    def __post_init__(self):
        _require_int("x", self.x, 0, COORD_LIMIT)
        _require_int("y", self.y, 0, COORD_LIMIT)


@dataclass(frozen=True)
class Trajectory:
    """An ordered end-effector path for one episode (at least one waypoint)."""

    points: tuple[Waypoint, ...]
    episode_id: str
    instruction: str

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.points) < 1:
            raise ValidationError("points", "points must contain at least one waypoint")
        for p in self.points:
            if not isinstance(p, Waypoint):
                raise ValidationError("points", f"points must contain waypoints, got {type(p).__name__}")
        _require_str("episode_id", self.episode_id, allow_empty=False)
        _require_str("instruction", self.instruction)


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box: (lx, ly) top-left, (rx, ry) bottom-right, lx < rx and ly < ry."""

    lx: int
    ly: int
    rx: int
    ry: int

    def __post_init__(self):
        for name in ("lx", "ly", "rx", "ry"):
            _require_int(name, getattr(self, name), 0, COORD_LIMIT)
        if not self.lx < self.rx:
            raise ValidationError("lx", f"lx < rx violated (lx={self.lx}, rx={self.rx})")
        if not self.ly < self.ry:
            raise ValidationError("ly", f"ly < ry violated (ly={self.ly}, ry={self.ry})")

    @property
    def area(self) -> int:
        return (self.rx - self.lx) * (self.ry - self.ly)


@dataclass(frozen=True)
class AffordanceSample:
    """Ground-truth interaction region for an (image, object, prompt) triple.

    The box is prompt-aware: the same object may carry different boxes
    under different prompts.
    """

    image_ref: str
    object: str
    prompt: str
    box: BoundingBox

    def __post_init__(self):
        _require_str("image_ref", self.image_ref, allow_empty=False)
        _require_str("object", self.object, allow_empty=False)
        _require_str("prompt", self.prompt, allow_empty=False)
        if not isinstance(self.box, BoundingBox):
            raise ValidationError("box", f"box must be a bounding box, got {type(self.box).__name__}")


@dataclass(frozen=True)
class PlanningInstance:
    """One manipulation episode with its task description and decomposed steps."""

    episode_id: str
    high_level: str
    steps: tuple[str, ...]
    frame_count: int
    resolution: tuple[int, int]
    success: bool
    occluded: bool
    trajectory_clear: bool

    def __post_init__(self):
        _require_str("episode_id", self.episode_id, allow_empty=False)
        _require_str("high_level", self.high_level)
        object.__setattr__(self, "steps", tuple(self.steps))
        for s in self.steps:
            if type(s) is not str:
                raise ValidationError("steps", f"steps must be strings, got {type(s).__name__}")
        _require_int("frame_count", self.frame_count, 0)
        res = tuple(self.resolution)
        object.__setattr__(self, "resolution", res)
        if len(res) != 2:
            raise ValidationError("resolution", "resolution must be a (width, height) pair")
        _require_int("resolution", res[0], 1)
        _require_int("resolution", res[1], 1)
        _require_bool("success", self.success)
        _require_bool("occluded", self.occluded)
        _require_bool("trajectory_clear", self.trajectory_clear)


@dataclass(frozen=True)
class QAPair:
    """A rendered question/answer pair tied back to its source instance."""

    question: str
    answer: str
    question_type: str
    template_id: int
    instance_id: str

    def __post_init__(self):
        _require_str("question", self.question, allow_empty=False)
        _require_str("answer", self.answer, allow_empty=False)
        if self.question_type not in QUESTION_TYPES:
            raise ValidationError("question_type", f"unknown question_type {self.question_type!r}")
        _require_int("template_id", self.template_id, 0, TEMPLATES_PER_TYPE)
        _require_str("instance_id", self.instance_id, allow_empty=False)


@dataclass(frozen=True)
class PredictionRecord:
    """A model output for one evaluation item.

    The payload variant follows ``task``: free text for planning, a
    box for affordance, a trajectory for trajectory prediction.
    ``confidence`` is present exactly when the task is affordance.
    """

    item_id: str
    task: str
    payload: Union[str, BoundingBox, Trajectory]
    confidence: Optional[float] = None

    def __post_init__(self):
        _require_str("item_id", self.item_id, allow_empty=False)
        if self.task not in PREDICTION_TASKS:
            raise ValidationError("task", f"task must be one of {PREDICTION_TASKS}, got {self.task!r}")
        if self.task == "planning":
            if type(self.payload) is not str:
                raise ValidationError("payload", "planning payload must be text")
            if self.confidence is not None:
                raise ValidationError("confidence", "confidence is only valid for affordance predictions")
        elif self.task == "affordance":
            if not isinstance(self.payload, BoundingBox):
                raise ValidationError("payload", "affordance payload must be a bounding box")
            if self.confidence is None:
                raise ValidationError("confidence", "affordance predictions require a confidence")
            if type(self.confidence) not in (int, float):
                raise ValidationError("confidence", "confidence must be a number")
            object.__setattr__(self, "confidence", float(self.confidence))
            if not 0.0 <= self.confidence <= 1.0:
                raise ValidationError("confidence", f"confidence must be in [0, 1], got {self.confidence}")
        else:
            if not isinstance(self.payload, Trajectory):
                raise ValidationError("payload", "trajectory payload must be a trajectory")
            if self.confidence is not None:
                raise ValidationError("confidence", "confidence is only valid for affordance predictions")


Record = Union[
    Waypoint,
    Trajectory,
    BoundingBox,
    AffordanceSample,
    PlanningInstance,
    QAPair,
    PredictionRecord,
]


# ---------------------------------------------------------------------------
# canonical serialization

def _waypoint_obj(w: Waypoint) -> dict:
    return {"x": w.x, "y": w.y}


def _box_obj(b: BoundingBox) -> dict:
    return {"lx": b.lx, "ly": b.ly, "rx": b.rx, "ry": b.ry}


def _trajectory_obj(t: Trajectory) -> dict:
    return {
        "points": [_waypoint_obj(p) for p in t.points],
        "episode_id": t.episode_id,
        "instruction": t.instruction,
    }


def record_to_obj(record: Record) -> dict:
    """Plain-dict form of a record, with canonical key order."""
    if isinstance(record, Waypoint):
        return _waypoint_obj(record)
    if isinstance(record, BoundingBox):
        return _box_obj(record)
    if isinstance(record, Trajectory):
        return _trajectory_obj(record)
    if isinstance(record, AffordanceSample):
        return {
            "image_ref": record.image_ref,
            "object": record.object,
            "prompt": record.prompt,
            "box": _box_obj(record.box),
        }
    if isinstance(record, PlanningInstance):
        return {
            "episode_id": record.episode_id,
            "high_level": record.high_level,
            "steps": list(record.steps),
            "frame_count": record.frame_count,
            "resolution": list(record.resolution),
            "success": record.success,
            "occluded": record.occluded,
            "trajectory_clear": record.trajectory_clear,
        }
    if isinstance(record, QAPair):
        return {
            "question": record.question,
            "answer": record.answer,
            "question_type": record.question_type,
            "template_id": record.template_id,
            "instance_id": record.instance_id,
        }
    if isinstance(record, PredictionRecord):
        if record.task == "affordance":
            payload: Any = dict(_box_obj(record.payload), confidence=record.confidence)
        elif record.task == "trajectory":
            payload = _trajectory_obj(record.payload)
        else:
            payload = record.payload
        return {"item_id": record.item_id, "task": record.task, "payload": payload}
    raise TypeError(f"not a known record type: {type(record).__name__}")


def serialize_record(record: Record) -> str:
    """One canonical JSONL line (no trailing newline) for a record."""
    return json.dumps(record_to_obj(record), separators=(",", ":"), ensure_ascii=False)


# ---------------------------------------------------------------------------
# parsing

def _waypoint_from(obj: dict) -> Waypoint:
    return Waypoint(x=obj.get("x"), y=obj.get("y"))


def _box_from(obj: dict) -> BoundingBox:
    return BoundingBox(lx=obj.get("lx"), ly=obj.get("ly"), rx=obj.get("rx"), ry=obj.get("ry"))


def _trajectory_from(obj: dict) -> Trajectory:
    raw = obj.get("points")
    if not isinstance(raw, list):
        raise ValidationError("points", "points must be a list of waypoints")
    points = []
    for entry in raw:
        if not isinstance(entry, dict) or set(entry) != {"x", "y"}:
            raise ValidationError("points", f"points entries must be waypoint objects, got {entry!r}")
        points.append(_waypoint_from(entry))
    return Trajectory(points=tuple(points), episode_id=obj.get("episode_id"), instruction=obj.get("instruction"))


def _affordance_from(obj: dict) -> AffordanceSample:
    box = obj.get("box")
    if not isinstance(box, dict) or set(box) != {"lx", "ly", "rx", "ry"}:
        raise ValidationError("box", "box must be a bounding-box object")
    return AffordanceSample(
        image_ref=obj.get("image_ref"),
        object=obj.get("object"),
        prompt=obj.get("prompt"),
        box=_box_from(box),
    )


def _planning_from(obj: dict) -> PlanningInstance:
    steps = obj.get("steps")
    if not isinstance(steps, list):
        raise ValidationError("steps", "steps must be a list of strings")
    resolution = obj.get("resolution")
    if not isinstance(resolution, list) or len(resolution) != 2:
        raise ValidationError("resolution", "resolution must be a [width, height] pair")
    return PlanningInstance(
        episode_id=obj.get("episode_id"),
        high_level=obj.get("high_level"),
        steps=tuple(steps),
        frame_count=obj.get("frame_count"),
        resolution=(resolution[0], resolution[1]),
        success=obj.get("success"),
        occluded=obj.get("occluded"),
        trajectory_clear=obj.get("trajectory_clear"),
    )


def _qa_from(obj: dict) -> QAPair:
    return QAPair(
        question=obj.get("question"),
        answer=obj.get("answer"),
        question_type=obj.get("question_type"),
        template_id=obj.get("template_id"),
        instance_id=obj.get("instance_id"),
    )


def _prediction_from(obj: dict) -> PredictionRecord:
    task = obj.get("task")
    payload = obj.get("payload")
    confidence = None
    if task == "affordance":
        if not isinstance(payload, dict) or set(payload) != {"lx", "ly", "rx", "ry", "confidence"}:
            raise ValidationError("payload", "affordance payload must be a box object with a confidence")
        confidence = payload["confidence"]
        payload = _box_from(payload)
    elif task == "trajectory":
        if not isinstance(payload, dict) or set(payload) != {"points", "episode_id", "instruction"}:
            raise ValidationError("payload", "trajectory payload must be a trajectory object")
        payload = _trajectory_from(payload)
    return PredictionRecord(item_id=obj.get("item_id"), task=task, payload=payload, confidence=confidence)


_SHAPES = {
    frozenset({"x", "y"}): _waypoint_from,
    frozenset({"lx", "ly", "rx", "ry"}): _box_from,
    frozenset({"points", "episode_id", "instruction"}): _trajectory_from,
    frozenset({"image_ref", "object", "prompt", "box"}): _affordance_from,
    frozenset({
        "episode_id", "high_level", "steps", "frame_count",
        "resolution", "success", "occluded", "trajectory_clear",
    }): _planning_from,
    frozenset({"question", "answer", "question_type", "template_id", "instance_id"}): _qa_from,
    frozenset({"item_id", "task", "payload"}): _prediction_from,
}


def record_from_obj(obj: dict) -> Record:
    """Build a typed record from a decoded JSON object, inferring the shape."""
    builder = _SHAPES.get(frozenset(obj))
    if builder is None:
        raise ParseError(f"unrecognized record shape with fields {sorted(map(str, obj))}")
    return builder(obj)


def parse_record(line: str, line_no: Optional[int] = None) -> Record:
    """Parse one JSONL line into a typed record.

    Raises ``ParseError`` (tagged with ``line_no`` when given) for
    undecodable lines and ``ValidationError`` for invariant violations.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line_no) from None
    if not isinstance(obj, dict):
        raise ParseError("record line must be a JSON object", line_no)
    try:
        return record_from_obj(obj)
    except ParseError as exc:
        if line_no is not None and exc.line_no is None:
            raise ParseError(str(exc), line_no) from None
        raise


def read_jsonl(path: Union[str, Path], expect: Optional[type] = None) -> Iterator[Record]:
    """Yield records from a JSONL file, enforcing a record type when given."""
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                raise ParseError("blank line in corpus", line_no)
            record = parse_record(line, line_no)
            if expect is not None and not isinstance(record, expect):
                raise ParseError(
                    f"expected {expect.__name__} record, found {type(record).__name__}", line_no
                )
            yield record


def write_jsonl(path: Union[str, Path], records: Iterable[Record]) -> int:
    """Write records as canonical JSONL; returns the line count."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(serialize_record(record))
            fh.write("\n")
            count += 1
    return count


def with_points(trajectory: Trajectory, points: Iterable[Waypoint]) -> Trajectory:
    """Copy of a trajectory with its waypoints replaced."""
    return replace(trajectory, points=tuple(points))
