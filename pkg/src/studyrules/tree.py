"""Binary CART decision trees with Gini impurity.

Splits test ``feature <= threshold`` with thresholds at midpoints between
consecutive distinct values, so binary features split at 0.5. Training is
deterministic: ties between equally good splits go to the lexicographically
smallest feature name and then to the smaller threshold, and ties between
classes in a leaf go to the lexicographically smallest class.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Iterator, Mapping, Optional, Sequence, Union

import numpy as np

_EPS = 1e-12


@dataclass(frozen=True)
class Hyperparams:
    max_depth: int = 5
    min_samples_leaf: int = 1
    min_samples_split: int = 2

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")


@dataclass
class Leaf:
    class_counts: dict[str, int]
    predicted: str


@dataclass
class Split:
    feature: str
    threshold: float
    left: "Node"
    right: "Node"
    class_counts: dict[str, int]


Node = Union[Leaf, Split]


def gini(counts: Sequence[float]) -> float:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        raise ValueError("gini needs at least one sample")
    p = counts / total
    return float(1.0 - np.sum(p * p))


@dataclass(frozen=True)
class SplitChoice:
    feature: int
    threshold: float
    score: float  # weighted Gini of the two children


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    feature_rank: Optional[np.ndarray] = None,
    min_samples_leaf: int = 1,
) -> Optional[SplitChoice]:
    """Best ``X[:, f] <= t`` split of integer class codes ``y``.

    ``feature_rank`` orders features for tie-breaking (defaults to column
    order). Returns ``None`` when no admissible split exists. A split that
    leaves the weighted impurity unchanged is still taken, so impure nodes
    over distinguishable rows keep splitting (XOR-like data needs this).
    """
    m, n_features = X.shape
    if m < 2 or n_features == 0:
        return None
    if feature_rank is None:
        feature_rank = np.arange(n_features)
    total = np.bincount(y, minlength=n_classes)
    n_left = np.arange(1, m, dtype=float)[:, None]
    n_right = m - n_left
    sizes_ok = (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
    varying = np.flatnonzero(X.min(axis=0) != X.max(axis=0))

    # Candidate arrays per feature block: (score, feature, threshold).
    found: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    block = max(1, (1 << 22) // m)
    for start in range(0, len(varying), block):
        cols_b = varying[start:start + block]
        Xb = X[:, cols_b]
        order = np.argsort(Xb, axis=0, kind="stable")
        sv = np.take_along_axis(Xb, order, axis=0).astype(float)
        ys = y[order]
        sq_left = np.zeros((m - 1, len(cols_b)))
        sq_right = np.zeros_like(sq_left)
        for c in range(n_classes):
            left = np.cumsum(ys == c, axis=0)[:-1]  # class-c count among the first i+1 sorted rows
            right = total[c] - left
            sq_left += left * left
            sq_right += right * right
        imp_left = n_left - sq_left / n_left
        imp_right = n_right - sq_right / n_right
        score = (imp_left + imp_right) / m
        score = np.where((sv[:-1] != sv[1:]) & sizes_ok, score, np.inf)
        low = score.min()
        if not np.isfinite(low):
            continue
        rows, cols = np.nonzero(score <= low + _EPS)
        found.append((score[rows, cols], cols_b[cols], (sv[rows, cols] + sv[rows + 1, cols]) / 2.0))
    if not found:
        return None
    scores, feats, thresholds = (np.concatenate(parts) for parts in zip(*found))
    best = scores.min()
    tied = scores <= best + _EPS
    scores, feats, thresholds = scores[tied], feats[tied], thresholds[tied]
    pick = np.lexsort((thresholds, feature_rank[feats]))[0]
    return SplitChoice(int(feats[pick]), float(thresholds[pick]), float(scores[pick]))


class DecisionTree:
    def __init__(self, root: Node, feature_names: Sequence[str], classes: Sequence[str],
                 hyperparams: Hyperparams = Hyperparams()) -> None:
        self.root = root
        self.feature_names = tuple(feature_names)
        self.classes = tuple(classes)
        self.hyperparams = hyperparams
        self._pos = {f: i for i, f in enumerate(self.feature_names)}

    def route(self, row: Mapping[str, float]) -> tuple[list[tuple[Split, bool]], Leaf]:
        """Path of ``(split, went_right)`` pairs from the root and the reached leaf."""
        node, path = self.root, []
        while isinstance(node, Split):
            try:
                value = row[node.feature]
            except KeyError:
                raise KeyError(f"row lacks feature {node.feature!r}") from None
            right = value > node.threshold
            path.append((node, right))
            node = node.right if right else node.left
        return path, node

    def predict_row(self, row: Mapping[str, float]) -> str:
        return self.route(row)[1].predicted

    def predict(self, X: np.ndarray) -> list[str]:
        out = []
        for r in np.asarray(X):
            node = self.root
            while isinstance(node, Split):
                node = node.right if r[self._pos[node.feature]] > node.threshold else node.left
            out.append(node.predicted)
        return out

    def leaves(self) -> Iterator[tuple[list[tuple[Split, bool]], Leaf]]:
        def walk(node, path):
            if isinstance(node, Leaf):
                yield path, node
            else:
                yield from walk(node.left, path + [(node, False)])
                yield from walk(node.right, path + [(node, True)])
        yield from walk(self.root, [])

    @property
    def depth(self) -> int:
        return max(len(p) for p, _ in self.leaves())

    @property
    def n_leaves(self) -> int:
        return sum(1 for _ in self.leaves())

    def used_features(self) -> list[str]:
        return sorted({s.feature for p, _ in self.leaves() for s, _ in p})

    # serialization

    def to_dict(self) -> dict:
        def enc(node):
            if isinstance(node, Leaf):
                return {"type": "leaf", "class_counts": node.class_counts, "predicted": node.predicted}
            return {
                "type": "split",
                "feature": node.feature,
                "threshold": node.threshold,
                "class_counts": node.class_counts,
                "left": enc(node.left),
                "right": enc(node.right),
            }
        return {
            "hyperparams": asdict(self.hyperparams),
            "classes": list(self.classes),
            "feature_names": list(self.feature_names),
            "root": enc(self.root),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DecisionTree":
        def dec(d):
            if d["type"] == "leaf":
                return Leaf(dict(d["class_counts"]), d["predicted"])
            if d["type"] != "split":
                raise ValueError(f"unknown node type {d['type']!r}")
            return Split(d["feature"], float(d["threshold"]), dec(d["left"]), dec(d["right"]),
                         dict(d["class_counts"]))
        return cls(dec(data["root"]), data["feature_names"], data["classes"],
                   Hyperparams(**data["hyperparams"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DecisionTree":
        return cls.from_dict(json.loads(text))

    def to_dot(self) -> str:
        lines = ["digraph Tree {", '  node [shape=box, fontname="helvetica"];']
        counter = 0

        def emit(node) -> int:
            nonlocal counter
            nid = counter
            counter += 1
            counts = node.class_counts
            n = sum(counts.values())
            value = ", ".join(str(counts[c]) for c in self.classes)
            stats = f"gini = {gini(list(counts.values())):.3f}\\nsamples = {n}\\nvalue = [{value}]"
            if isinstance(node, Leaf):
                label = f"{stats}\\nclass = {node.predicted}"
            else:
                label = f"{node.feature} <= {node.threshold:g}\\n{stats}"
            lines.append(f'  {nid} [label="{label}"];')
            if isinstance(node, Split):
                left = emit(node.left)
                lines.append(f'  {nid} -> {left} [label="True"];')
                right = emit(node.right)
                lines.append(f'  {nid} -> {right} [label="False"];')
            return nid

        emit(self.root)
        lines.append("}")
        return "\n".join(lines) + "\n"


def fit(X: np.ndarray, y: Sequence[str], feature_names: Sequence[str],
        hp: Hyperparams = Hyperparams()) -> DecisionTree:
    """Grow a tree greedily until purity, ``max_depth``, too few rows, or no admissible split."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != len(feature_names):
        raise ValueError("X must be 2-D with one column per feature name")
    if len(y) != X.shape[0]:
        raise ValueError(f"{X.shape[0]} rows but {len(y)} labels")
    if X.shape[0] == 0:
        raise ValueError("cannot fit a tree on zero rows")
    classes = sorted(set(y))
    code = {c: i for i, c in enumerate(classes)}
    yc = np.array([code[c] for c in y], dtype=np.int64)
    rank = np.empty(len(feature_names), dtype=np.int64)
    rank[np.argsort(np.array(feature_names, dtype=object), kind="stable")] = np.arange(len(feature_names))
    k = len(classes)

    def counts_of(idx):
        bc = np.bincount(yc[idx], minlength=k)
        return bc, {c: int(bc[i]) for i, c in enumerate(classes)}

    def grow(idx: np.ndarray, depth: int) -> Node:
        bc, counts = counts_of(idx)
        leaf = Leaf(counts, classes[int(np.argmax(bc))])
        if (np.count_nonzero(bc) <= 1 or depth >= hp.max_depth
                or len(idx) < hp.min_samples_split):
            return leaf
        choice = best_split(X[idx], yc[idx], k, rank, hp.min_samples_leaf)
        if choice is None:
            return leaf
        go_left = X[idx, choice.feature] <= choice.threshold
        return Split(
            feature_names[choice.feature],
            choice.threshold,
            grow(idx[go_left], depth + 1),
            grow(idx[~go_left], depth + 1),
            counts,
        )

    root = grow(np.arange(X.shape[0]), 0)
    return DecisionTree(root, feature_names, classes, hp)
