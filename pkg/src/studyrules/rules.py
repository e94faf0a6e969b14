"""IF/THEN study-planning rules read off decision-tree paths."""

from __future__ import annotations

import csv
import json
import re
from dataclasses import asdict, dataclass, replace
from typing import Callable, Iterable, Mapping, Optional, Sequence, TextIO

import numpy as np

from .features import Family, parse_feature_name
from .tree import DecisionTree

LE = "≤"
GT = ">"


@dataclass(frozen=True)
class Condition:
    feature: str
    op: str  # LE or GT
    threshold: float

    def holds(self, value: float) -> bool:
        return value <= self.threshold if self.op == LE else value > self.threshold


@dataclass(frozen=True)
class Rule:
    conditions: tuple[Condition, ...]
    predicted: str
    support: int = 0
    correct: int = 0
    relevancy: float = 0.0
    target: str = ""

    @property
    def confidence(self) -> float:
        return self.correct / self.support if self.support else 0.0

    def matches(self, vector: Mapping[str, float]) -> bool:
        for c in self.conditions:
            try:
                value = vector[c.feature]
            except KeyError:
                raise KeyError(f"vector lacks feature {c.feature!r}") from None
            if not c.holds(value):
                return False
        return True


def relevancy_product(confidence: float, coverage: float) -> float:
    return confidence * coverage


def relevancy_harmonic(confidence: float, coverage: float) -> float:
    s = confidence + coverage
    return 2 * confidence * coverage / s if s else 0.0


RELEVANCY = {"product": relevancy_product, "harmonic": relevancy_harmonic}
Relevancy = Callable[[float, float], float]


def relevancy(rule: Rule, n: int, strategy: Relevancy = relevancy_product) -> float:
    """Score combining rule accuracy and the share of the ``n`` rows it covers."""
    if rule.support < 1:
        raise ValueError("relevancy is undefined for a rule without support")
    return strategy(rule.confidence, rule.support / n)


def _sort_key(rule: Rule):
    return (-rule.relevancy, -rule.support, render_rule(rule))


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]
    n: int = 0

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __getitem__(self, i):
        return self.rules[i]


def rank(rules: Iterable[Rule], n: Optional[int] = None) -> RuleSet:
    rules = sorted(rules, key=_sort_key)
    return RuleSet(tuple(rules), n if n is not None else sum(r.support for r in rules))


def top_k(ruleset: RuleSet, k: int) -> list[Rule]:
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    return list(ruleset.rules[:k])


def extract_rules(
    tree: DecisionTree,
    X: np.ndarray,
    y: Sequence[str],
    target: str = "",
    strategy: Relevancy = relevancy_product,
) -> RuleSet:
    """One rule per leaf, with support and accuracy recounted on ``(X, y)``."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != len(tree.feature_names):
        raise ValueError("rows do not match the tree's feature columns")
    if len(y) != X.shape[0]:
        raise ValueError(f"{X.shape[0]} rows but {len(y)} labels")
    n = len(y)
    leaf_paths = list(tree.leaves())
    pos = {f: i for i, f in enumerate(tree.feature_names)}
    y = np.asarray(y, dtype=object)
    rules = []
    for path, leaf in leaf_paths:
        mask = np.ones(n, dtype=bool)
        conds = []
        for split, right in path:
            col = X[:, pos[split.feature]]
            mask &= (col > split.threshold) if right else (col <= split.threshold)
            conds.append(Condition(split.feature, GT if right else LE, split.threshold))
        support = int(mask.sum())
        correct = int(np.sum(y[mask] == leaf.predicted))
        rule = Rule(tuple(conds), leaf.predicted, support, correct, 0.0, target)
        if support:
            rule = replace(rule, relevancy=relevancy(rule, n, strategy))
        rules.append(rule)
    return rank(rules, n)


def match_rules(ruleset: Iterable[Rule], vector: Mapping[str, float]) -> Rule:
    hits = [r for r in ruleset if r.matches(vector)]
    if len(hits) != 1:
        raise ValueError(f"expected exactly one matching rule, found {len(hits)}")
    return hits[0]


def _fmt_threshold(t: float) -> str:
    return repr(float(t))


def _label_expr(target: str, cls: str) -> str:
    if not target:
        return cls
    if cls.startswith((LE, GT)):
        return f"{target} {cls}"
    return f"{target} = {cls}"


def render_rule(rule: Rule, strip_prefix: str = "") -> str:
    """``IF <feat> <cmp> <thr> [AND ...] THEN <label>``; ``strip_prefix`` shortens feature names."""
    def feat(name: str) -> str:
        return name[len(strip_prefix):] if strip_prefix and name.startswith(strip_prefix) else name

    if rule.conditions:
        body = " AND ".join(f"{feat(c.feature)} {c.op} {_fmt_threshold(c.threshold)}" for c in rule.conditions)
    else:
        body = "TRUE"
    return f"IF {body} THEN {_label_expr(rule.target, rule.predicted)}"


_COND = re.compile(rf"^(\S+) ({LE}|{GT}) (\S+)$")


def parse_rule(text: str) -> Rule:
    """Inverse of :func:`render_rule` for the conditions, target and class."""
    if not text.startswith("IF ") or " THEN " not in text:
        raise ValueError(f"not a rule: {text!r}")
    body, label = text[3:].split(" THEN ", 1)
    conds = []
    if body != "TRUE":
        for part in body.split(" AND "):
            m = _COND.match(part)
            if not m:
                raise ValueError(f"bad condition {part!r}")
            conds.append(Condition(m[1], m[2], float(m[3])))
    if " = " in label:
        target, cls = label.split(" = ", 1)
    elif m := re.match(rf"^(\S+) (({LE}|{GT}) .+)$", label):
        target, cls = m[1], m[2]
    else:
        target, cls = "", label
    return Rule(tuple(conds), cls, target=target)


ALIGNED = "aligned"
DEVIATING = "deviating"
UNCONSTRAINED = "unconstrained"


class UnsupportedComparison(ValueError):
    pass


@dataclass(frozen=True)
class PlanCheck:
    course: str
    semester: int
    taken: bool  # condition requires taking the course in that semester
    status: str


def compare_to_plan(rule: Rule, plan: Mapping[str, int]) -> list[PlanCheck]:
    """Compare course-semester conditions with a recommended ``{course: semester}`` plan.

    A ``> 0.5`` condition is aligned when the plan puts the course in that
    semester. A ``≤ 0.5`` condition excludes the semester; it deviates when
    the plan recommends exactly that semester. Courses missing from the plan
    are unconstrained.
    """
    out = []
    for c in rule.conditions:
        try:
            name = parse_feature_name(c.feature)
        except ValueError:
            name = None
        if name is None or name.family is not Family.COURSE_SEMESTER or not name.atomic:
            raise UnsupportedComparison(f"cannot compare {c.feature!r} with a study plan")
        taken = c.op == GT
        if name.course not in plan:
            status = UNCONSTRAINED
        elif taken:
            status = ALIGNED if plan[name.course] == name.index else DEVIATING
        else:
            status = DEVIATING if plan[name.course] == name.index else ALIGNED
        out.append(PlanCheck(name.course, name.index, taken, status))
    return out


def read_plan(source: TextIO) -> dict[str, int]:
    reader = csv.DictReader(source)
    if reader.fieldnames is None or not {"course_id", "recommended_semester"} <= set(reader.fieldnames):
        raise ValueError("plan file needs columns course_id,recommended_semester")
    return {row["course_id"].strip(): int(row["recommended_semester"]) for row in reader}


def rule_record(rule: Rule) -> dict:
    return {
        "conditions": [asdict(c) for c in rule.conditions],
        "predicted": rule.predicted,
        "target": rule.target,
        "support": rule.support,
        "correct": rule.correct,
        "confidence": rule.confidence,
        "relevancy": rule.relevancy,
    }


def rule_from_record(record: Mapping) -> Rule:
    return Rule(
        tuple(Condition(**c) for c in record["conditions"]),
        record["predicted"],
        record["support"],
        record["correct"],
        record["relevancy"],
        record.get("target", ""),
    )


def write_rules_text(ruleset: Iterable[Rule], out: TextIO) -> None:
    for r in ruleset:
        out.write(render_rule(r) + "\n")


def write_rules_jsonl(ruleset: Iterable[Rule], out: TextIO) -> None:
    for r in ruleset:
        out.write(json.dumps(rule_record(r), ensure_ascii=False, sort_keys=True) + "\n")


def read_rules_jsonl(source: TextIO) -> list[Rule]:
    return [rule_from_record(json.loads(line)) for line in source if line.strip()]
