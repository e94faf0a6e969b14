"""Course-sequence features and cohort feature matrices.

Feature names follow a fixed grammar, e.g. ``a-cs-course-1-3`` (course-1
taken in semester 3), ``na-cs-e-course-1-3`` (last attempt of course-1 in
semester 3), ``a-df-s-course-1-1->course-3-2`` or
``na-pl-course-1-start->course-1-end``.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, TextIO

import numpy as np

from .event_log import StudyPath
from .order_graph import (
    IndexKind,
    LevelledPartialOrder,
    annotate_index,
    build_lifecycle_partial_order,
    build_partial_order,
    course_spans,
    path_length,
)


class Family(str, Enum):
    COURSE_SEMESTER = "cs"
    COURSE_ORDER = "co"
    COURSE_DISTANCE = "cd"
    PATH_LENGTH = "pl"
    DIRECTLY_FOLLOWS = "df"
    EVENTUALLY_FOLLOWS = "ef"

    @property
    def pairwise(self) -> bool:
        return self in (Family.PATH_LENGTH, Family.DIRECTLY_FOLLOWS, Family.EVENTUALLY_FOLLOWS)


class Endpoint(str, Enum):
    START = "s"
    END = "e"


_FAMILY_INDEX = {
    Family.COURSE_SEMESTER: IndexKind.SEMESTER,
    Family.COURSE_ORDER: IndexKind.ORDER,
    Family.COURSE_DISTANCE: IndexKind.DISTANCE,
}
_ENDPOINT_WORD = {Endpoint.START: "start", Endpoint.END: "end"}
_WORD_ENDPOINT = {v: k for k, v in _ENDPOINT_WORD.items()}


@dataclass(frozen=True)
class FeatureName:
    """Structured feature identifier; ``str()`` gives the canonical name.

    Single-course families use ``course``/``index`` (plus ``endpoint`` when
    non-atomic). Pairwise families add ``course2``/``index2``; in non-atomic
    mode the pair members are identified by ``endpoint``/``endpoint2``
    instead of indices.
    """

    family: Family
    atomic: bool
    course: str
    index: Optional[int] = None
    kind: Optional[IndexKind] = None
    endpoint: Optional[Endpoint] = None
    course2: Optional[str] = None
    index2: Optional[int] = None
    endpoint2: Optional[Endpoint] = None

    def __str__(self) -> str:
        head = "a" if self.atomic else "na"
        if not self.family.pairwise:
            if self.atomic:
                return f"{head}-{self.family.value}-{self.course}-{self.index}"
            return f"{head}-{self.family.value}-{self.endpoint.value}-{self.course}-{self.index}"
        if self.atomic:
            return (
                f"{head}-{self.family.value}-{self.kind.value}-"
                f"{self.course}-{self.index}->{self.course2}-{self.index2}"
            )
        return (
            f"{head}-{self.family.value}-{self.course}-{_ENDPOINT_WORD[self.endpoint]}"
            f"->{self.course2}-{_ENDPOINT_WORD[self.endpoint2]}"
        )

    @property
    def selector(self) -> "Selector":
        return Selector(self.family, self.atomic, self.kind if self.family.pairwise else None)


_SINGLE_A = re.compile(r"^a-(cs|co|cd)-(.+)-(\d+)$")
_SINGLE_NA = re.compile(r"^na-(cs|co|cd)-([se])-(.+)-(\d+)$")
_PAIR_A = re.compile(r"^a-(pl|df|ef)-([sod])-(.+)-(\d+)->(.+)-(\d+)$")
_PAIR_NA = re.compile(r"^na-(pl|df|ef)-(.+)-(start|end)->(.+)-(start|end)$")


def parse_feature_name(text: str) -> FeatureName:
    if m := _SINGLE_A.match(text):
        return FeatureName(Family(m[1]), True, m[2], int(m[3]))
    if m := _SINGLE_NA.match(text):
        return FeatureName(Family(m[1]), False, m[3], int(m[4]), endpoint=Endpoint(m[2]))
    if m := _PAIR_A.match(text):
        return FeatureName(
            Family(m[1]), True, m[3], int(m[4]), kind=IndexKind(m[2]), course2=m[5], index2=int(m[6])
        )
    if m := _PAIR_NA.match(text):
        return FeatureName(
            Family(m[1]), False, m[2], endpoint=_WORD_ENDPOINT[m[3]],
            course2=m[4], endpoint2=_WORD_ENDPOINT[m[5]],
        )
    raise ValueError(f"not a feature name: {text!r}")


@dataclass(frozen=True)
class Selector:
    """One (family, atomicity, index kind) triple of a feature selection."""

    family: Family
    atomic: bool = True
    kind: Optional[IndexKind] = None

    def __post_init__(self) -> None:
        if self.family.pairwise and self.atomic and self.kind is None:
            raise ValueError(f"atomic {self.family.value} features need an index kind")
        if (not self.family.pairwise or not self.atomic) and self.kind is not None:
            raise ValueError(f"{self} takes no index kind")

    def __str__(self) -> str:
        parts = ["a" if self.atomic else "na", self.family.value]
        if self.kind is not None:
            parts.append(self.kind.value)
        return "-".join(parts)

    @property
    def default(self) -> int:
        return -1 if self.family is Family.PATH_LENGTH else 0


def parse_selector(text: str) -> Selector:
    """``"a-cs"``, ``"na-co"``, ``"a-pl-s"``, ``"na-ef"`` ..."""
    parts = text.strip().split("-")
    if len(parts) not in (2, 3) or parts[0] not in ("a", "na"):
        raise ValueError(f"bad feature selector {text!r}")
    try:
        family = Family(parts[1])
        kind = IndexKind(parts[2]) if len(parts) == 3 else None
    except ValueError:
        raise ValueError(f"bad feature selector {text!r}") from None
    return Selector(family, parts[0] == "a", kind)


Features = dict[FeatureName, int]


def _single_course(path: StudyPath, family: Family, atomic: bool) -> Features:
    index = annotate_index(path, _FAMILY_INDEX[family])
    if atomic:
        return {FeatureName(family, True, a.course_id, index[sem]): 1 for sem, a in path.attempts()}
    out: Features = {}
    for course, (first, last) in course_spans(path).items():
        out[FeatureName(family, False, course, index[first], endpoint=Endpoint.START)] = 1
        out[FeatureName(family, False, course, index[last], endpoint=Endpoint.END)] = 1
    return out


def extract_course_semester(path: StudyPath, atomic: bool = True) -> Features:
    return _single_course(path, Family.COURSE_SEMESTER, atomic)


def extract_course_order(path: StudyPath, atomic: bool = True) -> Features:
    return _single_course(path, Family.COURSE_ORDER, atomic)


def extract_course_distance(path: StudyPath, atomic: bool = True) -> Features:
    return _single_course(path, Family.COURSE_DISTANCE, atomic)


def _pair_name(family: Family, atomic: bool, kind, u, v) -> FeatureName:
    if atomic:
        return FeatureName(family, True, u.course_id, u.index, kind=kind,
                           course2=v.course_id, index2=v.index)
    return FeatureName(
        family, False, u.course_id, endpoint=_WORD_ENDPOINT[u.lifecycle.value],
        course2=v.course_id, endpoint2=_WORD_ENDPOINT[v.lifecycle.value],
    )


def _order(path: StudyPath, atomic: bool, kind: Optional[IndexKind]) -> LevelledPartialOrder:
    if atomic:
        if kind is None:
            raise ValueError("atomic partial-order features need an index kind")
        return build_partial_order(path, kind)
    return build_lifecycle_partial_order(path)


def extract_path_length(path: StudyPath, atomic: bool = True, kind: Optional[IndexKind] = None) -> Features:
    """Path length for every ordered node pair whose source is not on a later level."""
    po = _order(path, atomic, kind)
    kind = kind if atomic else None
    out: Features = {}
    for u in po.nodes:
        for v in po.nodes:
            if u != v and po.level_of[u] <= po.level_of[v]:
                out[_pair_name(Family.PATH_LENGTH, atomic, kind, u, v)] = path_length(po, u, v)
    return out


def extract_directly_follows(path: StudyPath, atomic: bool = True, kind: Optional[IndexKind] = None) -> Features:
    po = _order(path, atomic, kind)
    kind = kind if atomic else None
    return {_pair_name(Family.DIRECTLY_FOLLOWS, atomic, kind, u, v): 1 for u, v in po.edges}


def extract_eventually_follows(path: StudyPath, atomic: bool = True, kind: Optional[IndexKind] = None) -> Features:
    po = _order(path, atomic, kind)
    kind = kind if atomic else None
    return {
        _pair_name(Family.EVENTUALLY_FOLLOWS, atomic, kind, u, v): 1
        for u in po.nodes
        for v in po.nodes
        if path_length(po, u, v) >= 1
    }


_EXTRACTORS = {
    Family.COURSE_SEMESTER: extract_course_semester,
    Family.COURSE_ORDER: extract_course_order,
    Family.COURSE_DISTANCE: extract_course_distance,
    Family.PATH_LENGTH: extract_path_length,
    Family.DIRECTLY_FOLLOWS: extract_directly_follows,
    Family.EVENTUALLY_FOLLOWS: extract_eventually_follows,
}


def extract(path: StudyPath, selector: Selector) -> Features:
    fn = _EXTRACTORS[selector.family]
    if selector.family.pairwise:
        return fn(path, selector.atomic, selector.kind)
    return fn(path, selector.atomic)


def feature_value(features: Mapping[FeatureName, int], name: FeatureName) -> int:
    """Value of ``name`` with the family default (0, or -1 for path length)."""
    return features.get(name, name.selector.default)


@dataclass(frozen=True)
class FeatureMatrix:
    columns: tuple[str, ...]
    students: tuple[str, ...]
    values: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def row(self, student_id: str) -> dict[str, int]:
        r = self.values[self.students.index(student_id)]
        return dict(zip(self.columns, (int(v) for v in r)))

    def subset(self, students: Sequence[str]) -> "FeatureMatrix":
        pos = {s: i for i, s in enumerate(self.students)}
        idx = [pos[s] for s in students]
        return FeatureMatrix(self.columns, tuple(students), self.values[idx])


def assemble_matrix(cohort: Iterable[StudyPath], selection: Iterable[Selector]) -> FeatureMatrix:
    """Students x features over the union of feature names any student emits."""
    selection = list(dict.fromkeys(selection))
    if not selection:
        raise ValueError("feature selection is empty")
    cohort = list(cohort)
    if not cohort:
        raise ValueError("cohort is empty")
    per_student: list[dict[str, int]] = []
    defaults: dict[str, int] = {}
    for path in cohort:
        row: dict[str, int] = {}
        for sel in selection:
            emitted = {str(name): value for name, value in extract(path, sel).items()}
            row.update(emitted)
            default = sel.default
            for key in emitted:
                defaults.setdefault(key, default)
        per_student.append(row)
    columns = tuple(sorted(defaults))
    col_of = {c: j for j, c in enumerate(columns)}
    values = np.tile(np.array([defaults[c] for c in columns], dtype=np.int64), (len(cohort), 1))
    rows, cols, cells = [], [], []
    for i, row in enumerate(per_student):
        for key, v in row.items():
            rows.append(i)
            cols.append(col_of[key])
            cells.append(v)
    values[rows, cols] = cells
    return FeatureMatrix(columns, tuple(p.student_id for p in cohort), values)


def write_matrix(matrix: FeatureMatrix, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["student_id", *matrix.columns])
    for sid, row in zip(matrix.students, matrix.values):
        writer.writerow([sid, *(int(v) for v in row)])


def read_matrix(source: TextIO) -> FeatureMatrix:
    reader = csv.reader(source)
    header = next(reader)
    if not header or header[0] != "student_id":
        raise ValueError("matrix file must start with a student_id column")
    students, rows = [], []
    for row in reader:
        students.append(row[0])
        rows.append([int(v) for v in row[1:]])
    values = np.array(rows, dtype=np.int64).reshape(len(rows), len(header) - 1)
    return FeatureMatrix(tuple(header[1:]), tuple(students), values)
