"""Episode selection, question generation, and split assignment.

The builder turns raw episode metadata into training corpora: a
rule-based selection pass rejects unusable episodes (every violated
rule is reported, not just the first), a template bank expands each
kept instance into exactly two question/answer pairs per question
type, and a seeded splitter carves id lists into train/test/unassigned
with optional episode-level grouping.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Union

from .records import (
    QUESTION_TYPES,
    TEMPLATES_PER_TYPE,
    AffordanceSample,
    BoundingBox,
    PlanningInstance,
    QAPair,
    ValidationError,
)
from .seeding import check_seed, derive_rng

import json

import numpy as np

MIN_RESOLUTION = 128
MIN_FRAME_COUNT = 30

REJECTION_REASONS = (
    "low_resolution",
    "missing_description",
    "failed_task",
    "too_short",
    "occluded",
    "unclear_trajectory",
)

TASK_COMPLETE = "task complete"  # empty-plan sentinel
STEP_JOIN = "; "

ANSWER_RULES = ("steps", "remaining", "next_step", "current_step", "history", "yes", "no")

# rules whose answers are indexed by a current-step position
_STEP_RULES = {"remaining", "next_step", "current_step", "history"}
_STEP_SLOTS = {"step_k", "remaining"}
_SLOTS = {"high_level", "steps", "step_k", "remaining"}


class TemplateError(ValueError):
    """A template references an unresolvable slot or an unknown rule."""


@dataclass(frozen=True)
class SelectionReport:
    """Per-episode selection outcome; ``reasons`` lists every violated rule."""

    episode_id: str
    kept: bool
    reasons: tuple[str, ...]

    def to_line(self) -> str:
        obj = {"episode_id": self.episode_id, "kept": self.kept, "reasons": list(self.reasons)}
        return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def selection_reasons(inst: PlanningInstance) -> tuple[str, ...]:
    """All rejection reasons an instance triggers, in canonical order."""
    reasons = []
    if min(inst.resolution) < MIN_RESOLUTION:
        reasons.append("low_resolution")
    # an episode without a usable description or without any non-blank
    # decomposed step cannot support question generation
    if not inst.high_level.strip() or not any(s.strip() for s in inst.steps):
        reasons.append("missing_description")
    if not inst.success:
        reasons.append("failed_task")
    if inst.frame_count < MIN_FRAME_COUNT:
        reasons.append("too_short")
    if inst.occluded:
        reasons.append("occluded")
    if not inst.trajectory_clear:
        reasons.append("unclear_trajectory")
    return tuple(reasons)


def apply_selection_filters(
    instances: Iterable[PlanningInstance],
) -> tuple[list[PlanningInstance], list[SelectionReport]]:
    """Partition instances into kept/rejected with full reason reporting."""
    kept: list[PlanningInstance] = []
    reports: list[SelectionReport] = []
    for inst in instances:
        reasons = selection_reasons(inst)
        if not reasons:
            kept.append(inst)
        reports.append(SelectionReport(inst.episode_id, not reasons, reasons))
    return kept, reports


# ---------------------------------------------------------------------------
# question templates

@dataclass(frozen=True)
class QuestionTemplate:
    question_type: str
    template_id: int
    question: str
    answer_rule: str


def _template_slots(question: str) -> set[str]:
    import string as _string

    slots = set()
    for _, field, _, _ in _string.Formatter().parse(question):
        if field is not None:
            slots.add(field)
    return slots


class TemplateBank:
    """Exactly five templates for each of the ten question types.

    File format: one template per line,
    ``question_type|template_id|question_template|answer_rule``;
    blank lines and ``#`` comments are ignored.  The question text may
    itself contain ``|`` (the rule is split off the right end).
    """

    def __init__(self, templates: Iterable[QuestionTemplate]):
        self._by_key: dict[tuple[str, int], QuestionTemplate] = {}
        for tpl in templates:
            key = (tpl.question_type, tpl.template_id)
            if key in self._by_key:
                raise TemplateError(f"duplicate template {key}")
            self._by_key[key] = tpl
        self._validate()

    def _validate(self) -> None:
        for qtype in QUESTION_TYPES:
            for tid in range(TEMPLATES_PER_TYPE):
                tpl = self._by_key.get((qtype, tid))
                if tpl is None:
                    raise TemplateError(f"missing template {qtype}|{tid}")
                if tpl.answer_rule not in ANSWER_RULES:
                    raise TemplateError(
                        f"unknown answer rule {tpl.answer_rule!r} in template {qtype}|{tid}"
                    )
                bad = _template_slots(tpl.question) - _SLOTS
                if bad:
                    raise TemplateError(
                        f"unresolvable slot {sorted(bad)} in template {qtype}|{tid}"
                    )
        extra = set(self._by_key) - {
            (qtype, tid) for qtype in QUESTION_TYPES for tid in range(TEMPLATES_PER_TYPE)
        }
        if extra:
            raise TemplateError(f"unexpected templates {sorted(extra)}")

    def get(self, question_type: str, template_id: int) -> QuestionTemplate:
        return self._by_key[(question_type, template_id)]

    def needs_step_index(self, tpl: QuestionTemplate) -> bool:
        return bool(
            tpl.answer_rule in _STEP_RULES or (_template_slots(tpl.question) & _STEP_SLOTS)
        )

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "TemplateBank":
        templates = []
        for line_no, raw in enumerate(lines, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            head = line.split("|", 2)
            if len(head) != 3:
                raise TemplateError(f"line {line_no}: expected type|id|question|rule")
            qtype, tid_text, rest = head
            body = rest.rsplit("|", 1)
            if len(body) != 2:
                raise TemplateError(f"line {line_no}: expected type|id|question|rule")
            question, rule = body
            try:
                tid = int(tid_text)
            except ValueError:
                raise TemplateError(f"line {line_no}: template_id must be an integer") from None
            if qtype not in QUESTION_TYPES:
                raise TemplateError(f"line {line_no}: unknown question type {qtype!r}")
            if not 0 <= tid < TEMPLATES_PER_TYPE:
                raise TemplateError(
                    f"line {line_no}: template_id must be in [0, {TEMPLATES_PER_TYPE})"
                )
            templates.append(QuestionTemplate(qtype, tid, question, rule))
        return cls(templates)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "TemplateBank":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_lines(fh)

    @classmethod
    def default(cls) -> "TemplateBank":
        text = resources.files("robodata.data").joinpath("template_bank.txt").read_text("utf-8")
        return cls.from_lines(text.splitlines())


def render_template(
    tpl: QuestionTemplate, inst: PlanningInstance, k: Optional[int] = None
) -> tuple[str, str]:
    """Render a (question, answer) pair for an instance.

    ``k`` is the current-step index, required whenever the template's
    question uses a step slot or its answer rule is step-indexed.
    Remaining-steps style answers fall back to the sentinel
    ``TASK_COMPLETE`` when nothing is left.
    """
    steps = [s for s in inst.steps if s.strip()]
    if not steps:
        raise ValidationError("steps", "instance has no usable steps; run selection first")
    needs_k = tpl.answer_rule in _STEP_RULES or (_template_slots(tpl.question) & _STEP_SLOTS)
    if needs_k and k is None:
        raise TemplateError(f"template {tpl.question_type}|{tpl.template_id} requires a step index")
    if k is not None and not 0 <= k < len(steps):
        raise TemplateError(f"step index {k} out of range for {len(steps)} steps")
    values = {
        "high_level": inst.high_level,
        "steps": STEP_JOIN.join(steps),
    }
    if k is not None:
        remaining = STEP_JOIN.join(steps[k + 1 :])
        values["step_k"] = steps[k]
        values["remaining"] = remaining if remaining else TASK_COMPLETE
    try:
        question = tpl.question.format_map(values)
    except KeyError as exc:
        raise TemplateError(f"unresolvable slot {exc} in template") from None
    rule = tpl.answer_rule
    if rule == "steps":
        answer = STEP_JOIN.join(steps)
    elif rule == "remaining":
        rest = STEP_JOIN.join(steps[k + 1 :])
        answer = rest if rest else TASK_COMPLETE
    elif rule == "next_step":
        answer = steps[k + 1] if k + 1 < len(steps) else TASK_COMPLETE
    elif rule == "current_step":
        answer = steps[k]
    elif rule == "history":
        answer = STEP_JOIN.join(steps[: k + 1])
    elif rule == "yes":
        answer = "yes"
    elif rule == "no":
        answer = "no"
    else:
        raise TemplateError(f"unknown answer rule {rule!r}")
    return question, answer


def generate_qa(
    instances: Iterable[PlanningInstance],
    bank: Optional[TemplateBank] = None,
    seed: int = 0,
) -> list[QAPair]:
    """Expand instances into QA pairs: two distinct templates per type.

    Per instance, an RNG derived from ``seed`` and the episode_id
    drives template choice and step-index choice, so output is
    independent of batching and parallel order.  Pairs appear in
    canonical type order, then ascending template_id: 10 types x 2
    templates = 20 pairs per instance.
    """
    check_seed(seed)
    if bank is None:
        bank = TemplateBank.default()
    out: list[QAPair] = []
    for inst in instances:
        out.extend(_instance_qa(inst, bank, seed))
    return out


def _instance_qa(inst: PlanningInstance, bank: TemplateBank, seed: int) -> list[QAPair]:
    steps = [s for s in inst.steps if s.strip()]
    if not steps:
        raise ValidationError("steps", f"instance {inst.episode_id} has no usable steps")
    rng = derive_rng(seed, inst.episode_id)
    n_steps = len(steps)
    pairs: list[QAPair] = []
    for qtype in QUESTION_TYPES:
        chosen = sorted(int(v) for v in rng.choice(TEMPLATES_PER_TYPE, size=2, replace=False))
        for tid in chosen:
            # the index draw happens for every pair, used or not, so a
            # template edit cannot shift the stream for later types
            k = int(rng.integers(n_steps))
            tpl = bank.get(qtype, tid)
            question, answer = render_template(tpl, inst, k)
            pairs.append(
                QAPair(
                    question=question,
                    answer=answer,
                    question_type=qtype,
                    template_id=tid,
                    instance_id=inst.episode_id,
                )
            )
    return pairs


def build_affordance_quad(
    image_ref: str, object_name: str, prompt: str, box: BoundingBox
) -> AffordanceSample:
    """Validated affordance ground-truth quadruple.

    Prompt-aware by construction: the same object may map to different
    boxes under different prompts (a lid prompt and a handle prompt
    pick out different regions of one object).
    """
    return AffordanceSample(image_ref=image_ref, object=object_name, prompt=prompt, box=box)


# ---------------------------------------------------------------------------
# splits

@dataclass(frozen=True)
class SplitSpec:
    """Exact train/test sizes plus the shuffle seed; the rest is unassigned."""

    train_count: int
    test_count: int
    seed: int = 0

    def __post_init__(self):
        if type(self.train_count) is not int or self.train_count < 0:
            raise ValueError(f"train_count must be a non-negative integer, got {self.train_count!r}")
        if type(self.test_count) is not int or self.test_count < 0:
            raise ValueError(f"test_count must be a non-negative integer, got {self.test_count!r}")
        check_seed(self.seed)


def assign_splits(
    ids: Sequence[str],
    spec: SplitSpec,
    group_of: Optional[Callable[[str], str]] = None,
) -> dict[str, str]:
    """Deterministic seeded split of ids into train/test/unassigned.

    Groups (by default each id is its own group) are shuffled with the
    spec seed and drained in order: the first ``train_count`` ids fill
    train, the next ``test_count`` fill test, the remainder is tagged
    ``unassigned``.  A grouping that cannot fill either bucket exactly
    raises, because split sizes are contractual.
    """
    ids = list(ids)
    if len(set(ids)) != len(ids):
        raise ValidationError("ids", "duplicate ids in split input")
    if spec.train_count + spec.test_count > len(ids):
        raise ValidationError(
            "counts", f"train+test ({spec.train_count}+{spec.test_count}) exceeds corpus size {len(ids)}"
        )
    groups: dict[str, list[str]] = {}
    for item in ids:
        key = group_of(item) if group_of is not None else item
        groups.setdefault(key, []).append(item)
    keys = sorted(groups)
    rng = np.random.default_rng(spec.seed)
    order = [keys[i] for i in rng.permutation(len(keys))]
    assignment: dict[str, str] = {}
    remaining_train = spec.train_count
    remaining_test = spec.test_count
    for key in order:
        members = groups[key]
        if remaining_train > 0:
            if len(members) > remaining_train:
                raise ValidationError(
                    "counts",
                    f"group {key!r} ({len(members)} ids) straddles the train boundary; "
                    "counts are incompatible with the grouping",
                )
            remaining_train -= len(members)
            bucket = "train"
        elif remaining_test > 0:
            if len(members) > remaining_test:
                raise ValidationError(
                    "counts",
                    f"group {key!r} ({len(members)} ids) straddles the test boundary; "
                    "counts are incompatible with the grouping",
                )
            remaining_test -= len(members)
            bucket = "test"
        else:
            bucket = "unassigned"
        for item in members:
            assignment[item] = bucket
    return assignment
