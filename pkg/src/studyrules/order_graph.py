"""Directly-follows graphs and levelled partial orders over study paths.

Per-student partial orders put every occupied semester on its own level.
Courses in one level are concurrent; every node of a level is connected to
every node of the next occupied level. Retakes do not create loops because
node names carry an index (semester, order or distance) or, in the
life-cycle variant, a start/end marker.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

from .event_log import EventLog, StudyPath, build_traces


class IndexKind(str, Enum):
    SEMESTER = "s"
    ORDER = "o"
    DISTANCE = "d"


class Lifecycle(str, Enum):
    ATOMIC = "atomic"
    START = "start"
    END = "end"


@dataclass(frozen=True, order=True)
class PONode:
    course_id: str
    index: int = 0
    lifecycle: Lifecycle = Lifecycle.ATOMIC

    @property
    def label(self) -> str:
        if self.lifecycle is Lifecycle.ATOMIC:
            return f"{self.course_id}-{self.index}"
        return f"{self.course_id}-{self.lifecycle.value}"


@dataclass(frozen=True)
class LevelledPartialOrder:
    levels: tuple[frozenset[PONode], ...]
    edges: frozenset[tuple[PONode, PONode]] = frozenset()

    @cached_property
    def level_of(self) -> dict[PONode, int]:
        return {n: i for i, lvl in enumerate(self.levels) for n in lvl}

    @property
    def nodes(self) -> list[PONode]:
        return sorted(self.level_of)

    def successors(self, node: PONode) -> list[PONode]:
        return sorted(v for u, v in self.edges if u == node)


def _connect_levels(levels: Sequence[frozenset[PONode]]) -> frozenset[tuple[PONode, PONode]]:
    return frozenset((u, v) for a, b in zip(levels, levels[1:]) for u in a for v in b)


def annotate_index(path: StudyPath, kind: IndexKind) -> dict[int, int]:
    """Index of every occupied semester; all attempts of a semester share it."""
    occupied = path.occupied
    if not occupied:
        raise ValueError("study path is empty")
    if kind is IndexKind.SEMESTER:
        return {s: s for s in occupied}
    if kind is IndexKind.ORDER:
        return {s: rank for rank, s in enumerate(occupied, start=1)}
    first = occupied[0]
    return {s: s - first for s in occupied}


def build_partial_order(path: StudyPath, kind: IndexKind) -> LevelledPartialOrder:
    index = annotate_index(path, kind)
    levels = tuple(
        frozenset(PONode(a.course_id, index[sem]) for a in attempts)
        for sem, attempts in path.semesters.items()
    )
    return LevelledPartialOrder(levels, _connect_levels(levels))


def course_spans(path: StudyPath) -> dict[str, tuple[int, int]]:
    """First and last attempt semester of every course."""
    spans: dict[str, tuple[int, int]] = {}
    for sem, att in path.attempts():
        lo, hi = spans.get(att.course_id, (sem, sem))
        spans[att.course_id] = (min(lo, sem), max(hi, sem))
    return spans


def build_lifecycle_partial_order(path: StudyPath) -> LevelledPartialOrder:
    """Partial order with a start and an end node per course.

    Start sits at the semester of the first attempt and end at the last one;
    semesters holding only intermediate retakes get no level.
    """
    if not path.occupied:
        raise ValueError("study path is empty")
    by_sem: dict[int, set[PONode]] = {}
    for course, (first, last) in course_spans(path).items():
        by_sem.setdefault(first, set()).add(PONode(course, 0, Lifecycle.START))
        by_sem.setdefault(last, set()).add(PONode(course, 0, Lifecycle.END))
    levels = tuple(frozenset(by_sem[s]) for s in sorted(by_sem))
    return LevelledPartialOrder(levels, _connect_levels(levels))


def path_length(po: LevelledPartialOrder, source: PONode, target: PONode) -> int:
    """Edges between ``source`` and ``target``: 0 when parallel, -1 when unreachable."""
    try:
        a = po.level_of[source]
        b = po.level_of[target]
    except KeyError as exc:
        raise KeyError(f"node {exc.args[0]!r} not in partial order") from None
    if a == b:
        return 0
    return b - a if a < b else -1


ARTIFICIAL_START = "__start__"
ARTIFICIAL_END = "__end__"


@dataclass(frozen=True)
class DFG:
    nodes: frozenset[str]
    edges: Counter = field(default_factory=Counter)


def dfg_from_sequences(sequences: Iterable[Sequence[str]]) -> DFG:
    edges: Counter = Counter()
    nodes = {ARTIFICIAL_START, ARTIFICIAL_END}
    for seq in sequences:
        if not seq:
            continue
        nodes.update(seq)
        walk = [ARTIFICIAL_START, *seq, ARTIFICIAL_END]
        edges.update(zip(walk, walk[1:]))
    return DFG(frozenset(nodes), edges)


def discover_dfg(log: EventLog) -> DFG:
    if not len(log):
        raise ValueError("cannot discover a DFG from an empty log")
    return dfg_from_sequences(t.activities for t in build_traces(log).values())


def _q(text: str) -> str:
    return '"' + text.replace('"', r"\"") + '"'


def partial_order_to_dot(po: LevelledPartialOrder, name: str = "partial_order") -> str:
    lines = [f"digraph {_q(name)} {{", "  rankdir=LR;", "  node [shape=box];"]
    for lvl in po.levels:
        members = " ".join(_q(n.label) + ";" for n in sorted(lvl))
        lines.append(f"  {{ rank=same; {members} }}")
    for u, v in sorted(po.edges):
        lines.append(f"  {_q(u.label)} -> {_q(v.label)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dfg_to_dot(dfg: DFG, name: str = "dfg") -> str:
    lines = [f"digraph {_q(name)} {{", "  rankdir=LR;"]
    for n in sorted(dfg.nodes):
        shape = "circle" if n in (ARTIFICIAL_START, ARTIFICIAL_END) else "box"
        lines.append(f"  {_q(n)} [shape={shape}];")
    for (u, v), count in sorted(dfg.edges.items()):
        lines.append(f"  {_q(u)} -> {_q(v)} [label=\"{count}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"
