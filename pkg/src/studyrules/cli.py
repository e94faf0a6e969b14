"""``studyrules`` command line.

Every subcommand reads an optional ``--config`` file and lets flags
override it. Exit codes: 0 success, 2 configuration error, 3 data error,
4 computation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import pipeline
from .config import ConfigError, RunConfig, load_config
from .evaluation import cross_validate, render_table, write_report_csv
from .event_log import (
    EventLogError,
    build_study_path,
    build_traces,
    read_event_log,
    serialize_event_log,
    write_dotted_chart,
)
from .features import write_matrix
from .labels import LabelError, write_labels
from .order_graph import (
    IndexKind,
    build_lifecycle_partial_order,
    build_partial_order,
    dfg_to_dot,
    discover_dfg,
    partial_order_to_dot,
)
from .rules import compare_to_plan, read_plan, render_rule, top_k, write_rules_jsonl, write_rules_text
from .synth import SpecError, generate
from .tree import DecisionTree

log = logging.getLogger("studyrules")

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_COMPUTE = 4


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _open_out(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline="")


def cmd_ingest(cfg: RunConfig) -> int:
    if not cfg.input:
        raise ConfigError("ingest needs --input")
    log_ = read_event_log(cfg.input, delimiter=cfg.delimiter)
    traces = build_traces(log_)
    report = {
        "input": cfg.input,
        "valid": True,
        "events": len(log_),
        "students": len(log_.students),
        "courses": len(log_.courses),
        "semesters": sorted({e.semester for e in log_}),
        "failed_attempts": sum(1 for e in log_ if not e.passed),
        "ungraded_attempts": sum(1 for e in log_ if e.grade is None),
        "max_trace_length": max(len(t) for t in traces.values()),
    }
    text = json.dumps(report, indent=2) + "\n"
    _write(Path(cfg.out) / "ingest.json", text)
    sys.stdout.write(text)
    return 0


def cmd_features(cfg: RunConfig) -> int:
    ds = pipeline.build_dataset(pipeline.load_log(cfg), cfg)
    out = Path(cfg.out)
    with _open_out(out / "features.csv") as fh:
        write_matrix(ds.matrix, fh)
    with _open_out(out / "labels.csv") as fh:
        write_labels(ds.labels, fh)
    log.info("%d students x %d features", *ds.matrix.values.shape)
    return 0


def cmd_train(cfg: RunConfig) -> int:
    ds = pipeline.build_dataset(pipeline.load_log(cfg), cfg)
    tree = pipeline.train(ds, cfg)
    out = Path(cfg.out)
    _write(out / "tree.json", tree.to_json())
    _write(out / "tree.dot", tree.to_dot())
    log.info("tree with %d leaves, depth %d", tree.n_leaves, tree.depth)
    return 0


def cmd_rules(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    tree_file = out / "tree.json"
    tree = DecisionTree.from_json(tree_file.read_text(encoding="utf-8")) if tree_file.exists() else None
    ds, tree, ruleset = pipeline.run_rules(pipeline.load_log(cfg), cfg, tree)
    if not tree_file.exists():
        _write(tree_file, tree.to_json())
    with _open_out(out / "rules.txt") as fh:
        write_rules_text(ruleset, fh)
    with _open_out(out / "rules.jsonl") as fh:
        write_rules_jsonl(ruleset, fh)
    best = top_k(ruleset, min(cfg.top_k, len(ruleset)))
    for i, r in enumerate(best, 1):
        sys.stdout.write(f"{i}. {render_rule(r)}  [support={r.support}, confidence={r.confidence:.2f}, relevancy={r.relevancy:.3f}]\n")
    if cfg.plan:
        with open(cfg.plan, newline="", encoding="utf-8") as fh:
            plan = read_plan(fh)
        with _open_out(out / "plan_comparison.csv") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["rank", "course_id", "semester", "taken", "status"])
            for i, r in enumerate(best, 1):
                for check in compare_to_plan(r, plan):
                    writer.writerow([i, check.course, check.semester, int(check.taken), check.status])
    return 0


def cmd_evaluate(cfg: RunConfig) -> int:
    ds = pipeline.build_dataset(pipeline.load_log(cfg), cfg)
    report = cross_validate(ds.matrix.values, ds.y, ds.matrix.columns, cfg.hyperparams,
                            cfg.k, cfg.seed, cfg.stratified)
    out = Path(cfg.out)
    with _open_out(out / "report.csv") as fh:
        write_report_csv(report, fh)
    table = render_table(report, ds.labels.target)
    _write(out / "report.txt", table)
    sys.stdout.write(table)
    return 0


def cmd_synth(cfg: RunConfig) -> int:
    log_ = generate(cfg.cohort_spec())
    _write(Path(cfg.out) / "log.csv", serialize_event_log(log_))
    log.info("wrote %d events for %d students", len(log_), len(log_.students))
    return 0


def cmd_export(cfg: RunConfig) -> int:
    log_ = pipeline.load_log(cfg)
    out = Path(cfg.out)
    _write(out / "dfg.dot", dfg_to_dot(discover_dfg(log_)))
    with _open_out(out / "dotted_chart.csv") as fh:
        write_dotted_chart(log_, fh)
    traces = build_traces(log_)
    student = cfg.student or next(iter(traces))
    if student not in traces:
        raise LabelError(f"student {student!r} not in the log")
    path = build_study_path(traces[student])
    for kind in IndexKind:
        po = build_partial_order(path, kind)
        _write(out / "po" / f"{student}-{kind.value}.dot", partial_order_to_dot(po, f"{student}-{kind.value}"))
    po = build_lifecycle_partial_order(path)
    _write(out / "po" / f"{student}-lifecycle.dot", partial_order_to_dot(po, f"{student}-lifecycle"))
    return 0


COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "ingest": cmd_ingest,
    "features": cmd_features,
    "train": cmd_train,
    "rules": cmd_rules,
    "evaluate": cmd_evaluate,
    "synth": cmd_synth,
    "export": cmd_export,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="studyrules", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config")
        p.add_argument("--input")
        p.add_argument("--out")
        p.add_argument("--seed")
        p.add_argument("--k")
        p.add_argument("--max-depth", dest="max_depth")
        p.add_argument("--features", help="comma-separated selectors, e.g. a-cs,a-df-s,na-cs")
        p.add_argument("--label", help="gpa:2, gpa:4 or grade:<course>:<semester>")
        p.add_argument("--plan", help="CSV course_id,recommended_semester")
        p.add_argument("--student", help="student for partial-order export")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    try:
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.command](cfg)
    except (ConfigError, SpecError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EventLogError, LabelError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, KeyError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
