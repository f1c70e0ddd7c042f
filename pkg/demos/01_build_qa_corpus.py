"""
Building a question/answer corpus from raw episodes
===================================================

Walks the full data path: selection filtering, template expansion,
and the deterministic train/test split.
"""

from robodata import (
    PlanningInstance,
    SplitSpec,
    apply_selection_filters,
    assign_splits,
    generate_qa,
)

# a tiny synthetic episode log; two of these violate the selection rules
episodes = [
    PlanningInstance(
        episode_id="ep-000",
        high_level="put the mug in the sink",
        steps=("grasp the mug", "lift it", "move over the sink", "release"),
        frame_count=61,
        resolution=(640, 480),
        success=True,
        occluded=False,
        trajectory_clear=True,
    ),
    PlanningInstance(
        episode_id="ep-001",
        high_level="stack the red block",
        steps=("pick up the red block", "place it on the tower"),
        frame_count=45,
        resolution=(640, 480),
        success=True,
        occluded=False,
        trajectory_clear=True,
    ),
    # too few frames AND the task failed: both reasons are reported
    PlanningInstance(
        episode_id="ep-002",
        high_level="open the drawer",
        steps=("pull the handle",),
        frame_count=29,
        resolution=(640, 480),
        success=False,
        occluded=False,
        trajectory_clear=True,
    ),
    # the short image side is what counts, so 120x640 is out
    PlanningInstance(
        episode_id="ep-003",
        high_level="wipe the table",
        steps=("grab the cloth", "wipe left to right"),
        frame_count=80,
        resolution=(120, 640),
        success=True,
        occluded=False,
        trajectory_clear=True,
    ),
]

kept, reports = apply_selection_filters(episodes)
print(f"kept {len(kept)} of {len(episodes)} episodes")
for r in reports:
    if not r.kept:
        print(f"  rejected {r.episode_id}: {', '.join(r.reasons)}")

# every kept instance expands to exactly 20 QA pairs: 2 templates
# drawn per question type, 10 types, order fixed
pairs = generate_qa(kept, seed=7)
print(f"\n{len(pairs)} QA pairs from {len(kept)} instances")
for p in pairs[:4]:
    print(f"  [{p.question_type}/t{p.template_id}] {p.question}")
    print(f"      -> {p.answer}")

# the same seed always yields the same corpus
again = generate_qa(kept, seed=7)
print(f"\nsame seed reproduces the corpus: {pairs == again}")

# deterministic splits; ids that share an episode stay together
ids = sorted({p.instance_id for p in pairs})
assignment = assign_splits(ids, SplitSpec(train_count=1, test_count=1, seed=3))
for item, bucket in sorted(assignment.items()):
    print(f"  {item}: {bucket}")
