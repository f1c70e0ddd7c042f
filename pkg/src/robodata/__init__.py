"""Dataset construction and evaluation toolkit for tabletop manipulation episodes.

The package covers the full loop: episode selection, question/answer
expansion, trajectory cleanup and text composition, metric evaluation
(trajectory distances, affordance detection AP, planning BLEU),
deterministic train/test splits, reproducible report files, and a
journal-backed human review service.
"""

from .records import (
    AffordanceSample,
    BoundingBox,
    COORD_LIMIT,
    ParseError,
    PlanningInstance,
    PredictionRecord,
    QAPair,
    QUESTION_TYPES,
    Trajectory,
    ValidationError,
    Waypoint,
    parse_record,
    read_jsonl,
    record_from_obj,
    record_to_obj,
    serialize_record,
    write_jsonl,
)
from .seeding import derive_rng, stable_hash64
from .trajectory_metrics import (
    arc_length,
    discrete_frechet,
    hausdorff,
    resample_arclength,
    rmse,
    scale_to_unit,
    score_pair,
)
from .trajectory_pipeline import (
    ComposeOptions,
    RansacParams,
    RansacResult,
    compose_traj_sample,
    downsample_indices,
    parse_traj_sample,
    ransac_clean,
    uniform_downsample,
)
from .affordance_eval import ApResult, average_precision, iou, match_predictions, mean_ap
from .planning_eval import PairStats, bleu_n, corpus_bleu, pair_stats, score_from_stats, tokenize
from .dataset_builder import (
    REJECTION_REASONS,
    SelectionReport,
    SplitSpec,
    TemplateBank,
    TemplateError,
    apply_selection_filters,
    assign_splits,
    build_affordance_quad,
    generate_qa,
    selection_reasons,
)
from .reporting import (
    build_report,
    evaluate_affordance,
    evaluate_planning,
    evaluate_trajectories,
    render_report,
    verify_report,
    write_report,
)
from .review_service import ReviewStore, create_app, task_id_for

__version__ = "0.1.0"

__all__ = [
    "AffordanceSample",
    "ApResult",
    "BoundingBox",
    "COORD_LIMIT",
    "ComposeOptions",
    "PairStats",
    "ParseError",
    "PlanningInstance",
    "PredictionRecord",
    "QAPair",
    "QUESTION_TYPES",
    "RansacParams",
    "RansacResult",
    "REJECTION_REASONS",
    "ReviewStore",
    "SelectionReport",
    "SplitSpec",
    "TemplateBank",
    "TemplateError",
    "Trajectory",
    "ValidationError",
    "Waypoint",
    "apply_selection_filters",
    "arc_length",
    "assign_splits",
    "average_precision",
    "bleu_n",
    "build_affordance_quad",
    "build_report",
    "compose_traj_sample",
    "corpus_bleu",
    "create_app",
    "derive_rng",
    "discrete_frechet",
    "evaluate_affordance",
    "evaluate_planning",
    "evaluate_trajectories",
    "generate_qa",
    "hausdorff",
    "iou",
    "match_predictions",
    "mean_ap",
    "pair_stats",
    "parse_record",
    "parse_traj_sample",
    "ransac_clean",
    "read_jsonl",
    "record_from_obj",
    "record_to_obj",
    "render_report",
    "resample_arclength",
    "rmse",
    "scale_to_unit",
    "score_from_stats",
    "score_pair",
    "selection_reasons",
    "serialize_record",
    "stable_hash64",
    "task_id_for",
    "tokenize",
    "downsample_indices",
    "uniform_downsample",
    "verify_report",
    "write_jsonl",
    "write_report",
]
