"""
Human review over an append-only journal
========================================

Enqueue samples, record decisions, export the reviewed corpus, and
show that replaying the journal reproduces the state byte for byte.
"""

import tempfile
from pathlib import Path

from robodata import AffordanceSample, BoundingBox, record_to_obj
from robodata.review_service import ReviewStore

journal = Path(tempfile.mkdtemp()) / "journal.jsonl"
store = ReviewStore(journal)

samples = [
    AffordanceSample("frame-01.png", "kettle", "grab the handle", BoundingBox(120, 80, 260, 200)),
    AffordanceSample("frame-02.png", "kettle", "press the lid", BoundingBox(180, 40, 250, 90)),
    AffordanceSample("frame-03.png", "drawer", "pull it open", BoundingBox(300, 300, 520, 420)),
]
outcome = store.enqueue_many("affordance", [record_to_obj(s) for s in samples])
print(f"enqueued {outcome.enqueued}, duplicates {outcome.duplicates}")

# re-enqueueing is a no-op: the task id is a content hash
outcome = store.enqueue_many("affordance", [record_to_obj(samples[0])])
print(f"second enqueue of the same sample: duplicates {outcome.duplicates}")

tasks = store.tasks(status="pending")
print(f"\n{len(tasks)} pending tasks")

# approve one, fix one up, toss one
store.review(tasks[0].task_id, "approve", reviewer="dana")
revised = AffordanceSample("frame-02.png", "kettle", "press the lid", BoundingBox(175, 38, 252, 95))
store.review(tasks[1].task_id, "revise", revision_obj=record_to_obj(revised), reviewer="dana")
store.review(tasks[2].task_id, "reject", reviewer="dana")

stats = store.stats()
print("after review:", {k: v for k, v in stats["kinds"]["affordance"].items() if v})

# export keeps approved + revised, and the revision replaces the original
lines = store.export_lines()
print(f"\nexport has {len(lines)} records:")
for line in lines:
    print(" ", line)

# state is a pure fold over the journal: a fresh replay exports
# exactly the same bytes
replayed = ReviewStore(journal)
print(f"\nreplayed export identical: {replayed.export_lines() == lines}")
print(f"journal lives at {journal} ({len(journal.read_text().splitlines())} events)")

# the same store backs the HTTP API: `robodata serve --journal <path>`
# exposes /tasks, /enqueue, /tasks/{id}/review, /export, and /stats
