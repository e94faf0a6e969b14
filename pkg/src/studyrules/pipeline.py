"""End-to-end steps shared by the command line and the acceptance checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import ConfigError, RunConfig
from .event_log import EventLog, Trace, build_study_path, build_traces, filter_courses, read_event_log
from .features import FeatureMatrix, assemble_matrix, parse_feature_name
from .labels import LabelVector, select_cohort
from .rules import RELEVANCY, RuleSet, extract_rules
from .tree import DecisionTree, fit


@dataclass(frozen=True)
class Dataset:
    log: EventLog
    traces: dict[str, Trace]
    labels: LabelVector
    matrix: FeatureMatrix

    @property
    def y(self) -> list[str]:
        return list(self.labels.classes)


def load_log(cfg: RunConfig) -> EventLog:
    if not cfg.input:
        raise ConfigError("no input event log configured (--input)")
    log = read_event_log(cfg.input, delimiter=cfg.delimiter)
    if cfg.courses:
        log = filter_courses(log, cfg.courses)
    return log


def build_dataset(log: EventLog, cfg: RunConfig) -> Dataset:
    traces = build_traces(log)
    labels = select_cohort(traces, cfg.label)
    paths = [build_study_path(traces[s]) for s in labels.students]
    matrix = assemble_matrix(paths, cfg.features)
    return Dataset(log, traces, labels, matrix)


def aligned_columns(matrix: FeatureMatrix, names: Sequence[str]) -> np.ndarray:
    """Matrix columns in the order of ``names``; unseen names get their family default."""
    pos = {c: i for i, c in enumerate(matrix.columns)}
    out = np.empty((len(matrix.students), len(names)), dtype=np.int64)
    for j, name in enumerate(names):
        if name in pos:
            out[:, j] = matrix.values[:, pos[name]]
        else:
            out[:, j] = parse_feature_name(name).selector.default
    return out


def train(ds: Dataset, cfg: RunConfig) -> DecisionTree:
    return fit(ds.matrix.values, ds.y, ds.matrix.columns, cfg.hyperparams)


def rules_for(ds: Dataset, tree: DecisionTree, cfg: RunConfig) -> RuleSet:
    X = aligned_columns(ds.matrix, tree.feature_names)
    return extract_rules(tree, X, ds.y, ds.labels.target, RELEVANCY[cfg.relevancy])


def run_rules(log: EventLog, cfg: RunConfig, tree: Optional[DecisionTree] = None) -> tuple[Dataset, DecisionTree, RuleSet]:
    ds = build_dataset(log, cfg)
    tree = tree or train(ds, cfg)
    return ds, tree, rules_for(ds, tree, cfg)
