"""Command-line harness for the dataset and evaluation pipeline.

Exit codes: 0 success, 1 validation failure, 2 I/O failure, 64 usage
error.  Every option can also come from a ``key = value`` config file
(``--config``); explicit flags win over config values.  The random
seed falls back to the ROBODATA_SEED environment variable when neither
flag nor config provides one.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Callable, Optional

from .dataset_builder import (
    SplitSpec,
    TemplateBank,
    TemplateError,
    apply_selection_filters,
    assign_splits,
    generate_qa,
)
from .records import (
    ParseError,
    PlanningInstance,
    PredictionRecord,
    QAPair,
    Trajectory,
    AffordanceSample,
    ValidationError,
    read_jsonl,
    write_jsonl,
)
from .reporting import (
    build_report,
    evaluate_affordance,
    evaluate_planning,
    evaluate_trajectories,
    planning_item_key,
    render_report,
    summary_table,
    verify_report,
)
from .trajectory_pipeline import ComposeOptions, RansacParams, compose_traj_sample, ransac_clean

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_USAGE = 64

SEED_ENV_VAR = "ROBODATA_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract says 64
        raise UsageError(message)


def _parse_config(path: str) -> dict[str, str]:
    cfg: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise ValidationError("config", f"{path}:{line_no}: expected 'key = value'")
            cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValidationError("config", f"expected a boolean, got {text!r}")


def _resolve(args, cfg: dict[str, str], name: str, default, convert: Callable):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in cfg:
        raw = cfg[name]
        try:
            return convert(raw)
        except (TypeError, ValueError) as exc:
            raise ValidationError("config", f"config key {name!r}: {exc}") from None
    return default


def _resolve_seed(args, cfg: dict[str, str]) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    if "seed" in cfg:
        return int(cfg["seed"])
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError("seed", f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None
    return 0


def _scaled_decimal(text: str) -> tuple[int, int]:
    """Parse a non-negative decimal literal into (numerator, denominator)."""
    s = text.strip()
    whole, dot, frac = s.partition(".")
    if not (whole + frac).isdigit() or (dot and not frac):
        raise ValidationError("thresholds", f"not a decimal number: {text!r}")
    return int(whole + frac or "0"), 10 ** len(frac)


def parse_threshold_spec(text: str) -> tuple[float, ...]:
    """IoU thresholds from 'start:step:stop' or a comma list.

    Values are built from scaled integers so 0.60 compares exactly
    equal to an IoU computed as 60/100.
    """
    values: list[float] = []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError("thresholds", f"expected start:step:stop, got {text!r}")
        scaled = [_scaled_decimal(p) for p in parts]
        denom = max(d for _, d in scaled)
        start, step, stop = (num * (denom // d) for num, d in scaled)
        if step <= 0:
            raise ValidationError("thresholds", "step must be positive")
        if stop < start:
            raise ValidationError("thresholds", "stop must be >= start")
        values = [v / denom for v in range(start, stop + 1, step)]
    else:
        for part in text.split(","):
            num, denom = _scaled_decimal(part)
            values.append(num / denom)
    for v in values:
        if not 0.0 < v <= 1.0:
            raise ValidationError("thresholds", f"thresholds must lie in (0, 1], got {v}")
    if not values:
        raise ValidationError("thresholds", "at least one threshold is required")
    if len(set(values)) != len(values):
        raise ValidationError("thresholds", f"duplicate thresholds in {text!r}")
    return tuple(values)


def _write_lines(path: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def _emit_report(report: dict, path: str) -> None:
    verify_report(report)
    text = render_report(report)
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(summary_table(report))


# ---------------------------------------------------------------------------
# subcommands

def _cmd_filter(args, cfg) -> int:
    instances = list(read_jsonl(args.in_path, expect=PlanningInstance))
    kept, reports = apply_selection_filters(instances)
    _write_lines(args.report, [r.to_line() for r in reports])
    if args.out:
        write_jsonl(args.out, kept)
    rejected = len(instances) - len(kept)
    print(f"kept {len(kept)} episodes, rejected {rejected}; report at {args.report}")
    return EXIT_OK


def _cmd_gen_qa(args, cfg) -> int:
    seed = _resolve_seed(args, cfg)
    templates = _resolve(args, cfg, "templates", None, str)
    bank = TemplateBank.load(templates) if templates else TemplateBank.default()
    instances = list(read_jsonl(args.in_path, expect=PlanningInstance))
    pairs = generate_qa(instances, bank, seed)
    write_jsonl(args.out, pairs)
    print(f"wrote {len(pairs)} qa pairs for {len(instances)} instances to {args.out}")
    return EXIT_OK


def _cmd_split(args, cfg) -> int:
    seed = _resolve_seed(args, cfg)
    train = _resolve(args, cfg, "train", None, int)
    test = _resolve(args, cfg, "test", None, int)
    if train is None or test is None:
        raise UsageError("--train and --test are required")
    group_by = _resolve(args, cfg, "group_by", "none", str)
    if group_by not in ("none", "episode"):
        raise ValidationError("group_by", f"group-by must be 'none' or 'episode', got {group_by!r}")

    ids: list[str] = []
    group_map: dict[str, str] = {}
    if args.task == "planning":
        for qa in read_jsonl(args.in_path, expect=QAPair):
            key = planning_item_key(qa)
            ids.append(key)
            group_map[key] = qa.instance_id
    elif args.task == "affordance":
        seen = set()
        for sample in read_jsonl(args.in_path, expect=AffordanceSample):
            if sample.image_ref not in seen:
                seen.add(sample.image_ref)
                ids.append(sample.image_ref)
                group_map[sample.image_ref] = sample.image_ref
    else:
        for traj in read_jsonl(args.in_path, expect=Trajectory):
            ids.append(traj.episode_id)
            group_map[traj.episode_id] = traj.episode_id

    spec = SplitSpec(train_count=train, test_count=test, seed=seed)
    group_of = group_map.__getitem__ if group_by == "episode" else None
    assignment = assign_splits(ids, spec, group_of=group_of)
    lines = [
        json.dumps({"id": i, "split": assignment[i]}, separators=(",", ":"), ensure_ascii=False)
        for i in sorted(assignment)
    ]
    _write_lines(args.out, lines)
    counts = {"train": 0, "test": 0, "unassigned": 0}
    for bucket in assignment.values():
        counts[bucket] += 1
    print(
        f"split {len(ids)} ids: {counts['train']} train, {counts['test']} test, "
        f"{counts['unassigned']} unassigned -> {args.out}"
    )
    return EXIT_OK


def _cmd_clean_traj(args, cfg) -> int:
    params = RansacParams(
        degree=_resolve(args, cfg, "degree", 2, int),
        threshold=_resolve(args, cfg, "threshold", 20.0, float),
        iterations=_resolve(args, cfg, "iters", 100, int),
        min_inliers=_resolve(args, cfg, "min_inliers", 3, int),
        seed=_resolve_seed(args, cfg),
    )
    cleaned = []
    summaries = []
    dropped = 0
    passthrough = 0
    for traj in read_jsonl(args.in_path, expect=Trajectory):
        result = ransac_clean(traj, params)
        cleaned.append(result.trajectory)
        dropped += result.n_outliers
        passthrough += 1 if result.passthrough else 0
        summaries.append(
            json.dumps(
                {
                    "episode_id": traj.episode_id,
                    "outliers": result.n_outliers,
                    "passthrough": result.passthrough,
                },
                separators=(",", ":"),
                ensure_ascii=False,
            )
        )
    write_jsonl(args.out, cleaned)
    if args.report:
        _write_lines(args.report, summaries)
    print(
        f"cleaned {len(cleaned)} trajectories: {dropped} outliers dropped, "
        f"{passthrough} passed through -> {args.out}"
    )
    return EXIT_OK


def _cmd_compose_traj(args, cfg) -> int:
    opts = ComposeOptions(
        max_points=_resolve(args, cfg, "max_points", None, int),
        include_start_point=_resolve(args, cfg, "start_points", False, _parse_bool),
        use_special_tokens=_resolve(args, cfg, "spec_tokens", False, _parse_bool),
    )
    lines = []
    for traj in read_jsonl(args.in_path, expect=Trajectory):
        text = compose_traj_sample(traj, opts)
        lines.append(
            json.dumps(
                {"item_id": traj.episode_id, "text": text}, separators=(",", ":"), ensure_ascii=False
            )
        )
    _write_lines(args.out, lines)
    print(f"composed {len(lines)} samples -> {args.out}")
    return EXIT_OK


def _eval_common(args, cfg) -> tuple[list[PredictionRecord], int, Optional[str]]:
    preds = list(read_jsonl(args.pred, expect=PredictionRecord))
    jobs = _resolve(args, cfg, "jobs", 1, int)
    if jobs < 1:
        raise ValidationError("jobs", f"jobs must be >= 1, got {jobs}")
    timestamp = _resolve(args, cfg, "timestamp", None, str)
    return preds, jobs, timestamp


def _cmd_eval_traj(args, cfg) -> int:
    preds, jobs, timestamp = _eval_common(args, cfg)
    rmse_k = _resolve(args, cfg, "rmse_k", 32, int)
    gts = list(read_jsonl(args.gt, expect=Trajectory))
    aggregates, per_item = evaluate_trajectories(preds, gts, rmse_k=rmse_k, jobs=jobs)
    config = {"pred": args.pred, "gt": args.gt, "rmse_k": rmse_k}
    report = build_report("trajectory", config, aggregates, per_item, created_at=timestamp)
    _emit_report(report, args.report)
    return EXIT_OK


def _cmd_eval_afford(args, cfg) -> int:
    preds, jobs, timestamp = _eval_common(args, cfg)
    spec = _resolve(args, cfg, "thresholds", "0.5:0.05:0.95", str)
    thresholds = parse_threshold_spec(spec)
    interp = _resolve(args, cfg, "interp", 101, int)
    gts = list(read_jsonl(args.gt, expect=AffordanceSample))
    aggregates, per_item = evaluate_affordance(preds, gts, thresholds, interp=interp, jobs=jobs)
    # jobs stays out of the echo: worker count must not change report bytes
    config = {"pred": args.pred, "gt": args.gt, "thresholds": spec, "interp": interp}
    report = build_report("affordance", config, aggregates, per_item, created_at=timestamp)
    _emit_report(report, args.report)
    return EXIT_OK


def _parse_bleu_orders(text: str) -> tuple[int, ...]:
    try:
        orders = tuple(int(p.strip()) for p in text.split(","))
    except ValueError:
        raise ValidationError("bleu", f"expected comma-separated integers, got {text!r}") from None
    return orders


def _cmd_eval_plan(args, cfg) -> int:
    preds, jobs, timestamp = _eval_common(args, cfg)
    bleu_spec = _resolve(args, cfg, "bleu", "1,2,3,4", str)
    orders = _parse_bleu_orders(bleu_spec)
    smooth = _resolve(args, cfg, "smooth", None, str)
    if smooth is not None and smooth not in ("add-one",):
        raise ValidationError("smooth", f"unknown smoothing mode {smooth!r}")
    gts = list(read_jsonl(args.gt, expect=QAPair))
    aggregates, per_item = evaluate_planning(preds, gts, orders=orders, smooth=smooth, jobs=jobs)
    config = {"pred": args.pred, "gt": args.gt, "bleu": bleu_spec, "smooth": smooth}
    report = build_report("planning", config, aggregates, per_item, created_at=timestamp)
    _emit_report(report, args.report)
    return EXIT_OK


def _cmd_serve(args, cfg) -> int:
    from .review_service import ReviewStore, create_app

    listen = _resolve(args, cfg, "listen", "127.0.0.1:8731", str)
    host, sep, port_text = listen.rpartition(":")
    if not sep or not port_text.isdigit():
        raise ValidationError("listen", f"listen must be host:port, got {listen!r}")
    journal = _resolve(args, cfg, "journal", None, str)
    if journal is None:
        raise UsageError("--journal is required")
    assets = _resolve(args, cfg, "assets", None, str)
    store = ReviewStore(journal)
    app = create_app(store, assets_dir=assets)
    import uvicorn

    print(f"review service on http://{host}:{port_text} (journal: {journal})")
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser wiring

def build_parser() -> _Parser:
    parser = _Parser(prog="robodata", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: _Parser, seed: bool = False) -> None:
        p.add_argument("--config", help="key = value options file; flags win")
        if seed:
            p.add_argument("--seed", type=int, help=f"RNG seed (falls back to ${SEED_ENV_VAR}, then 0)")

    p = sub.add_parser("filter", help="apply episode selection rules")
    common(p)
    p.add_argument("--in", dest="in_path", required=True, help="episodes.jsonl")
    p.add_argument("--report", required=True, help="selection report JSONL output")
    p.add_argument("--out", help="kept episodes JSONL output")
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("gen-qa", help="expand instances into question/answer pairs")
    common(p, seed=True)
    p.add_argument("--in", dest="in_path", required=True, help="kept episodes JSONL")
    p.add_argument("--templates", help="template bank file (defaults to the built-in bank)")
    p.add_argument("--out", required=True, help="qa.jsonl output")
    p.set_defaults(func=_cmd_gen_qa)

    p = sub.add_parser("split", help="assign train/test/unassigned splits")
    common(p, seed=True)
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--task", choices=("planning", "affordance", "trajectory"), required=True)
    p.add_argument("--train", type=int)
    p.add_argument("--test", type=int)
    p.add_argument("--group-by", dest="group_by", choices=("none", "episode"))
    p.add_argument("--out", required=True, help="split assignment JSONL output")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("clean-traj", help="drop waypoint outliers with polynomial RANSAC")
    common(p, seed=True)
    p.add_argument("--in", dest="in_path", required=True, help="trajectory.jsonl")
    p.add_argument("--out", required=True, help="cleaned trajectory JSONL output")
    p.add_argument("--degree", type=int, help="polynomial degree (default 2)")
    p.add_argument("--threshold", type=float, help="inlier residual cutoff in raw units (default 20)")
    p.add_argument("--iters", type=int, help="RANSAC iterations (default 100)")
    p.add_argument("--min-inliers", dest="min_inliers", type=int, help="consensus size (default 3)")
    p.add_argument("--report", help="per-episode outlier summary JSONL")
    p.set_defaults(func=_cmd_clean_traj)

    p = sub.add_parser("compose-traj", help="serialize trajectories as text samples")
    common(p)
    p.add_argument("--in", dest="in_path", required=True, help="trajectory.jsonl")
    p.add_argument("--out", required=True, help="composed samples JSONL output")
    p.add_argument("--max-points", dest="max_points", type=int, help="downsample cap before composing")
    p.add_argument(
        "--start-points", dest="start_points", action="store_const", const=True,
        help="prefix samples with the start coordinates",
    )
    p.add_argument(
        "--spec-tokens", dest="spec_tokens", action="store_const", const=True,
        help="wrap waypoints in <wp>/<goal> tags",
    )
    p.set_defaults(func=_cmd_compose_traj)

    def eval_common(p: _Parser) -> None:
        common(p)
        p.add_argument("--pred", required=True, help="predictions.jsonl")
        p.add_argument("--gt", required=True, help="ground-truth corpus JSONL")
        p.add_argument("--jobs", type=int, help="worker pool size (default 1)")
        p.add_argument("--timestamp", help="pin the report's created_at for reproducible bytes")
        p.add_argument("--report", required=True, help="report JSON output path ('-' for stdout)")

    p = sub.add_parser("eval-traj", help="score trajectory predictions")
    eval_common(p)
    p.add_argument("--rmse-k", dest="rmse_k", type=int, help="resample count for RMSE (default 32)")
    p.set_defaults(func=_cmd_eval_traj)

    p = sub.add_parser("eval-afford", help="score affordance predictions")
    eval_common(p)
    p.add_argument("--thresholds", help="IoU thresholds, start:step:stop or comma list (default 0.5:0.05:0.95)")
    p.add_argument("--interp", type=int, help="recall interpolation points for AP (default 101)")
    p.set_defaults(func=_cmd_eval_afford)

    p = sub.add_parser("eval-plan", help="score planning answers with corpus BLEU")
    eval_common(p)
    p.add_argument("--bleu", help="comma-separated BLEU orders to report (default 1,2,3,4)")
    p.add_argument("--smooth", choices=("add-one",), help="numerator/denominator smoothing")
    p.set_defaults(func=_cmd_eval_plan)

    p = sub.add_parser("serve", help="run the review service")
    common(p)
    p.add_argument("--journal", help="append-only journal path (required)")
    p.add_argument("--assets", help="read-only static assets directory")
    p.add_argument("--listen", help="host:port to bind (default 127.0.0.1:8731)")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _parse_config(args.config) if getattr(args, "config", None) else {}
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse --help
        code = exc.code
        return int(code) if code is not None else EXIT_OK
    except (ValidationError, ParseError, TemplateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
