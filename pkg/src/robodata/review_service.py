"""Human review workflow: append-only journal plus an HTTP JSON API.

All state lives in one JSONL journal.  Every mutation appends exactly
one event line; in-memory state is a pure fold over those lines, so a
process killed at any line boundary replays to the same state and the
export endpoint yields byte-identical output.  Reads are lock-free;
journal writes are serialized through one lock.

Task ids are content hashes of (kind, canonical payload), which makes
re-enqueueing the same sample a no-op.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Optional, Union

from .records import (
    AffordanceSample,
    ParseError,
    PlanningInstance,
    Record,
    Trajectory,
    ValidationError,
    record_from_obj,
    record_to_obj,
    serialize_record,
)

REVIEW_KINDS = ("planning", "affordance", "trajectory")
STATUSES = ("pending", "approved", "revised", "rejected")
DECISIONS = {"approve": "approved", "revise": "revised", "reject": "rejected"}
EXPORT_STATUSES = ("approved", "revised")

_KIND_TYPES = {
    "planning": PlanningInstance,
    "affordance": AffordanceSample,
    "trajectory": Trajectory,
}


@dataclass
class ReviewTask:
    task_id: str
    kind: str
    payload: Record
    status: str = "pending"
    revision: Optional[Record] = None
    reviewer: Optional[str] = None
    reviewed_at: Optional[str] = None

    def view(self) -> dict:
        return {
            "task_id": self.task_id,
            "kind": self.kind,
            "status": self.status,
            "payload": record_to_obj(self.payload),
            "revision": record_to_obj(self.revision) if self.revision is not None else None,
            "reviewer": self.reviewer,
            "reviewed_at": self.reviewed_at,
        }


@dataclass(frozen=True)
class EnqueueOutcome:
    enqueued: int
    duplicates: int
    invalid: tuple[tuple[int, str], ...]  # (sample index, error message)


def task_id_for(kind: str, payload: Record) -> str:
    digest = hashlib.sha256(f"{kind}\n{serialize_record(payload)}".encode("utf-8")).hexdigest()
    return digest[:16]


def _parse_payload(kind: str, obj: Any) -> Record:
    if kind not in REVIEW_KINDS:
        raise ValidationError("kind", f"kind must be one of {REVIEW_KINDS}, got {kind!r}")
    if not isinstance(obj, dict):
        raise ValidationError("payload", "payload must be a JSON object")
    record = record_from_obj(obj)
    want = _KIND_TYPES[kind]
    if not isinstance(record, want):
        raise ValidationError("payload", f"{kind} payload must be a {want.__name__} record")
    return record


class ReviewStore:
    """Journal-backed task store; safe for concurrent reads, single writer."""

    def __init__(self, journal_path: Union[str, Path], clock: Optional[Callable[[], str]] = None):
        self.journal_path = Path(journal_path)
        self._clock = clock or (lambda: datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"))
        self._lock = threading.Lock()
        self._tasks: dict[str, ReviewTask] = {}
        self._replay()

    # -- journal -----------------------------------------------------------

    def _replay(self) -> None:
        if not self.journal_path.exists():
            return
        text = self.journal_path.read_text(encoding="utf-8")
        lines = text.split("\n")
        # an unterminated tail is a torn write from a crash mid-append; the
        # event never committed, so it is dropped, and the file is clipped to
        # the last boundary so a later append cannot glue onto the fragment
        tail = lines.pop()
        if tail:
            os.truncate(self.journal_path, len(text.encode("utf-8")) - len(tail.encode("utf-8")))
        for line_no, line in enumerate(lines, 1):
            if not line:
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"corrupt journal line {line_no}: {exc.msg}") from None
            self._apply(event, line_no)

    def _apply(self, event: dict, line_no: int) -> None:
        name = event.get("event")
        if name == "enqueue":
            payload = _parse_payload(event["kind"], event["payload"])
            task_id = event["task_id"]
            if task_id not in self._tasks:
                self._tasks[task_id] = ReviewTask(task_id=task_id, kind=event["kind"], payload=payload)
        elif name == "review":
            task = self._tasks.get(event["task_id"])
            if task is None:
                raise ValueError(f"journal line {line_no}: review for unknown task {event['task_id']!r}")
            revision = event.get("revision")
            task.status = DECISIONS[event["decision"]]
            task.revision = _parse_payload(task.kind, revision) if revision is not None else None
            task.reviewer = event.get("reviewer")
            task.reviewed_at = event.get("reviewed_at")
        else:
            raise ValueError(f"journal line {line_no}: unknown event {name!r}")

    def _append(self, event: dict) -> None:
        line = json.dumps(event, separators=(",", ":"), ensure_ascii=False)
        self.journal_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.journal_path, "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.write("\n")
            fh.flush()
            os.fsync(fh.fileno())

    # -- operations ---------------------------------------------------------

    def enqueue(self, kind: str, payload_obj: Any) -> tuple[ReviewTask, bool]:
        payload = _parse_payload(kind, payload_obj)
        task_id = task_id_for(kind, payload)
        with self._lock:
            existing = self._tasks.get(task_id)
            if existing is not None:
                return existing, False
            task = ReviewTask(task_id=task_id, kind=kind, payload=payload)
            self._append(
                {"event": "enqueue", "kind": kind, "task_id": task_id, "payload": record_to_obj(payload)}
            )
            self._tasks[task_id] = task
            return task, True

    def enqueue_many(self, kind: str, samples: list) -> EnqueueOutcome:
        enqueued = 0
        duplicates = 0
        invalid: list[tuple[int, str]] = []
        for index, obj in enumerate(samples):
            try:
                _, created = self.enqueue(kind, obj)
            except (ValidationError, ParseError) as exc:
                invalid.append((index, str(exc)))
                continue
            if created:
                enqueued += 1
            else:
                duplicates += 1
        return EnqueueOutcome(enqueued, duplicates, tuple(invalid))

    def review(
        self,
        task_id: str,
        decision: str,
        revision_obj: Any = None,
        reviewer: Optional[str] = None,
    ) -> ReviewTask:
        if decision not in DECISIONS:
            raise ValidationError("decision", f"decision must be one of {sorted(DECISIONS)}, got {decision!r}")
        with self._lock:
            task = self._tasks.get(task_id)
            if task is None:
                raise KeyError(task_id)
            revision = None
            if decision == "revise":
                if revision_obj is None:
                    raise ValidationError("revision", "revise decisions require a revision payload")
                revision = _parse_payload(task.kind, revision_obj)
            elif revision_obj is not None:
                raise ValidationError("revision", f"{decision} decisions do not carry a revision")
            reviewed_at = self._clock()
            self._append(
                {
                    "event": "review",
                    "task_id": task_id,
                    "decision": decision,
                    "revision": record_to_obj(revision) if revision is not None else None,
                    "reviewer": reviewer,
                    "reviewed_at": reviewed_at,
                }
            )
            task.status = DECISIONS[decision]
            task.revision = revision
            task.reviewer = reviewer
            task.reviewed_at = reviewed_at
            return task

    # -- queries ------------------------------------------------------------

    def get(self, task_id: str) -> ReviewTask:
        task = self._tasks.get(task_id)
        if task is None:
            raise KeyError(task_id)
        return task

    def tasks(
        self,
        kind: Optional[str] = None,
        status: Optional[str] = None,
        limit: Optional[int] = None,
    ) -> list[ReviewTask]:
        if kind is not None and kind not in REVIEW_KINDS:
            raise ValidationError("kind", f"unknown kind {kind!r}")
        if status is not None and status not in STATUSES:
            raise ValidationError("status", f"unknown status {status!r}")
        out = [
            t
            for t in sorted(self._tasks.values(), key=lambda t: t.task_id)
            if (kind is None or t.kind == kind) and (status is None or t.status == status)
        ]
        return out[:limit] if limit is not None else out

    def export_lines(self, kind: Optional[str] = None, statuses=EXPORT_STATUSES) -> list[str]:
        """Latest-decision corpus: revised payloads win over originals."""
        out = []
        for task in self.tasks(kind=kind):
            if task.status not in statuses:
                continue
            record = task.revision if task.status == "revised" and task.revision is not None else task.payload
            out.append(serialize_record(record))
        return out

    def stats(self) -> dict:
        counts = {kind: {status: 0 for status in STATUSES} for kind in REVIEW_KINDS}
        for task in self._tasks.values():
            counts[task.kind][task.status] += 1
        return {
            "kinds": counts,
            "total": len(self._tasks),
            "pending": sum(1 for t in self._tasks.values() if t.status == "pending"),
        }


# ---------------------------------------------------------------------------
# HTTP layer

def create_app(store: ReviewStore, assets_dir: Optional[Union[str, Path]] = None):
    """FastAPI application exposing the review API over the store."""
    from fastapi import Body, FastAPI, Header, HTTPException, Query
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import JSONResponse, PlainTextResponse

    app = FastAPI(title="review service", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def _error(status: int, message: str, field: Optional[str] = None) -> JSONResponse:
        body: dict = {"detail": message}
        if field is not None:
            body["field"] = field
        return JSONResponse(status_code=status, content=body)

    @app.get("/tasks")
    def list_tasks(
        kind: Optional[str] = Query(default=None),
        status: Optional[str] = Query(default=None),
        limit: Optional[int] = Query(default=None, ge=1),
    ):
        try:
            tasks = store.tasks(kind=kind, status=status, limit=limit)
        except ValidationError as exc:
            return _error(422, str(exc), exc.field)
        return {"tasks": [t.view() for t in tasks], "total": len(tasks)}

    @app.get("/tasks/{task_id}")
    def get_task(task_id: str):
        try:
            return store.get(task_id).view()
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown task {task_id!r}")

    @app.post("/tasks/{task_id}/review")
    def review_task(
        task_id: str,
        body: dict = Body(...),
        reviewer_header: Optional[str] = Header(default=None, alias="reviewer"),
    ):
        decision = body.get("decision")
        revision = body.get("revision")
        reviewer = body.get("reviewer") or reviewer_header or "anonymous"
        try:
            task = store.review(task_id, decision, revision, reviewer)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown task {task_id!r}")
        except (ValidationError, ParseError) as exc:
            field = exc.field if isinstance(exc, ValidationError) else None
            return _error(422, str(exc), field)
        return task.view()

    @app.post("/enqueue")
    def enqueue(body: dict = Body(...)):
        kind = body.get("kind")
        samples = body.get("samples")
        if kind not in REVIEW_KINDS:
            return _error(422, f"kind must be one of {REVIEW_KINDS}, got {kind!r}", "kind")
        if not isinstance(samples, list):
            return _error(422, "samples must be a list of records", "samples")
        outcome = store.enqueue_many(kind, samples)
        return {
            "enqueued": outcome.enqueued,
            "duplicates": outcome.duplicates,
            "invalid": [{"index": i, "error": msg} for i, msg in outcome.invalid],
        }

    @app.get("/export")
    def export(kind: Optional[str] = Query(default=None)):
        if kind is not None and kind not in REVIEW_KINDS:
            return _error(422, f"unknown kind {kind!r}", "kind")
        lines = store.export_lines(kind=kind)
        body = "\n".join(lines) + ("\n" if lines else "")
        return PlainTextResponse(content=body, media_type="application/x-ndjson")

    @app.get("/stats")
    def stats():
        return store.stats()

    if assets_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/assets", StaticFiles(directory=str(assets_dir)), name="assets")

    return app
