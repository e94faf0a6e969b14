"""k-fold cross-validation of decision trees with accuracy, precision and recall."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence, TextIO

import numpy as np

from .tree import Hyperparams, fit


class StratificationError(ValueError):
    def __init__(self, cls: str, count: int, k: int) -> None:
        super().__init__(f"class {cls!r} has {count} members, fewer than k={k}")
        self.cls = cls


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    folds: tuple[tuple[int, ...], ...]

    def train_test(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        test = np.array(self.folds[i], dtype=np.int64)
        train = np.array(sorted(j for f, fold in enumerate(self.folds) if f != i for j in fold), dtype=np.int64)
        return train, test


def stratified_kfold(labels: Sequence[str], k: int = 4, seed: int = 0) -> FoldPlan:
    """Shuffle each class with ``seed`` and deal its rows round-robin into ``k`` folds.

    The dealing position carries over from one class to the next (classes in
    sorted order), so fold sizes also differ by at most one.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    labels = list(labels)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    pos = 0
    for cls in sorted(set(labels)):
        members = [i for i, c in enumerate(labels) if c == cls]
        if len(members) < k:
            raise StratificationError(cls, len(members), k)
        for i in rng.permutation(members):
            folds[pos % k].append(int(i))
            pos += 1
    return FoldPlan(k, seed, tuple(tuple(sorted(f)) for f in folds))


def kfold(n: int, k: int = 4, seed: int = 0) -> FoldPlan:
    if k < 2 or n < k:
        raise ValueError(f"cannot split {n} rows into {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return FoldPlan(k, seed, tuple(tuple(sorted(int(i) for i in perm[f::k])) for f in range(k)))


def confusion(pred: Sequence[str], truth: Sequence[str], classes: Optional[Sequence[str]] = None) -> tuple[np.ndarray, tuple[str, ...]]:
    """Counts with rows = true class, columns = predicted class."""
    if len(pred) != len(truth):
        raise ValueError(f"{len(pred)} predictions for {len(truth)} labels")
    classes = tuple(classes) if classes is not None else tuple(sorted(set(truth) | set(pred)))
    idx = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for p, t in zip(pred, truth):
        cm[idx[t], idx[p]] += 1
    return cm, classes


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: dict[str, Optional[float]]
    recall: dict[str, Optional[float]]


def metrics(cm: np.ndarray, classes: Sequence[str]) -> Metrics:
    """Undefined ratios (zero denominator) are reported as ``None``."""
    total = cm.sum()
    tp = np.diag(cm)
    col = cm.sum(axis=0)
    row = cm.sum(axis=1)
    precision = {c: (float(tp[i] / col[i]) if col[i] else None) for i, c in enumerate(classes)}
    recall = {c: (float(tp[i] / row[i]) if row[i] else None) for i, c in enumerate(classes)}
    return Metrics(float(tp.sum() / total) if total else 0.0, precision, recall)


@dataclass(frozen=True)
class Summary:
    mean: Optional[float]
    std: Optional[float]
    folds: tuple[Optional[float], ...]


def _summarize(values: Sequence[Optional[float]]) -> Summary:
    defined = [v for v in values if v is not None]
    if not defined:
        return Summary(None, None, tuple(values))
    return Summary(float(np.mean(defined)), float(np.std(defined)), tuple(values))


@dataclass(frozen=True)
class MetricsReport:
    classes: tuple[str, ...]
    folds: tuple[Metrics, ...]
    accuracy: Summary
    precision: dict[str, Summary]
    recall: dict[str, Summary]
    predictions: tuple[tuple[str, ...], ...] = field(default=(), repr=False)

    def rows(self) -> list[tuple[str, Summary]]:
        out = [("Accuracy", self.accuracy)]
        out += [(f"Precision ({c})", self.precision[c]) for c in self.classes]
        out += [(f"Recall ({c})", self.recall[c]) for c in self.classes]
        return out


def cross_validate(
    X: np.ndarray,
    y: Sequence[str],
    feature_names: Sequence[str],
    hp: Hyperparams = Hyperparams(),
    k: int = 4,
    seed: int = 0,
    stratified: bool = True,
    plan: Optional[FoldPlan] = None,
) -> MetricsReport:
    """Fit on k-1 folds, score the held-out fold, and aggregate over folds."""
    X = np.asarray(X)
    y = list(y)
    if len(y) != X.shape[0]:
        raise ValueError(f"{X.shape[0]} rows but {len(y)} labels")
    if plan is None:
        plan = stratified_kfold(y, k, seed) if stratified else kfold(len(y), k, seed)
    classes = tuple(sorted(set(y)))
    fold_metrics, preds = [], []
    for i in range(plan.k):
        train, test = plan.train_test(i)
        tree = fit(X[train], [y[j] for j in train], feature_names, hp)
        pred = tree.predict(X[test])
        cm, _ = confusion(pred, [y[j] for j in test], classes)
        fold_metrics.append(metrics(cm, classes))
        preds.append(tuple(pred))
    return MetricsReport(
        classes,
        tuple(fold_metrics),
        _summarize([m.accuracy for m in fold_metrics]),
        {c: _summarize([m.precision[c] for m in fold_metrics]) for c in classes},
        {c: _summarize([m.recall[c] for m in fold_metrics]) for c in classes},
        tuple(preds),
    )


def format_pct(s: Summary) -> str:
    """``"68 ± 1"``: mean and population SD in whole percent."""
    if s.mean is None:
        return "n/a"
    return f"{s.mean * 100:.0f} ± {s.std * 100:.0f}"


def render_table(report: MetricsReport, title: str = "") -> str:
    rows = report.rows()
    width = max(len(name) for name, _ in rows)
    cells = [format_pct(s) for _, s in rows]
    cw = max(len(title), *(len(c) for c in cells))
    lines = [f"{'':<{width}} | {title:>{cw}}"]
    lines.append("-" * (width + 3 + cw))
    lines += [f"{name:<{width}} | {cell:>{cw}}" for (name, _), cell in zip(rows, cells)]
    return "\n".join(lines) + "\n"


def write_report_csv(report: MetricsReport, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    k = len(report.folds)
    writer.writerow(["metric", "mean", "std", *(f"fold_{i}" for i in range(k))])

    def cell(v):
        return "" if v is None else repr(v)

    for name, s in report.rows():
        writer.writerow([name, cell(s.mean), cell(s.std), *(cell(v) for v in s.folds)])
