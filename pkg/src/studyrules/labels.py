"""Academic-performance labels: overall GPA and single course grades."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, TextIO

from .event_log import Trace


class Binning(str, Enum):
    TWO_LEVEL = "2"
    FOUR_LEVEL = "4"


# Ordered best to worst, with inclusive upper bounds.
FOUR_LEVEL_CLASSES = (("excellent", 1.5), ("good", 2.5), ("satisfactory", 3.5), ("sufficient", 4.0))
TWO_LEVEL_CLASSES = (("good", 2.5), ("satisfactory", 4.0))
GRADE_GOOD = "≤ 2.5"
GRADE_BAD = "> 2.5"
GRADE_THRESHOLD = 2.5


class LabelError(ValueError):
    pass


@dataclass(frozen=True)
class LabelSpec:
    """Either the overall GPA (two or four classes) or one course's grade in one semester."""

    binning: Binning = Binning.TWO_LEVEL
    course_id: Optional[str] = None
    semester: Optional[int] = None
    include_failed: bool = True

    def __post_init__(self) -> None:
        if (self.course_id is None) != (self.semester is None):
            raise ValueError("course grade labels need both course and semester")
        if self.course_id is not None and self.binning is not Binning.TWO_LEVEL:
            raise ValueError("course grade labels support two-level binning only")

    @property
    def is_course_grade(self) -> bool:
        return self.course_id is not None

    @property
    def target(self) -> str:
        return f"{self.course_id}-{self.semester}" if self.is_course_grade else "gpa"

    @property
    def classes(self) -> tuple[str, ...]:
        if self.is_course_grade:
            return (GRADE_GOOD, GRADE_BAD)
        table = FOUR_LEVEL_CLASSES if self.binning is Binning.FOUR_LEVEL else TWO_LEVEL_CLASSES
        return tuple(name for name, _ in table)

    def __str__(self) -> str:
        if self.is_course_grade:
            return f"grade:{self.course_id}:{self.semester}"
        return f"gpa:{self.binning.value}"


def parse_label_spec(text: str) -> LabelSpec:
    """``gpa:2``, ``gpa:4`` or ``grade:<course>:<semester>``."""
    head, _, rest = text.strip().partition(":")
    try:
        if head == "gpa":
            return LabelSpec(Binning(rest or "2"))
        if head == "grade":
            course, _, sem = rest.rpartition(":")
            if course:
                return LabelSpec(Binning.TWO_LEVEL, course, int(sem))
    except ValueError:
        pass
    raise ValueError(f"bad label spec {text!r}")


@dataclass(frozen=True)
class LabelVector:
    target: str
    students: tuple[str, ...]
    values: tuple[float, ...]
    classes: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.students)


def compute_overall_gpa(trace: Trace) -> float:
    """Credit-weighted mean over courses of the last passed, graded attempt."""
    final: dict[str, tuple[float, int]] = {}
    for e in trace.events:
        if e.passed and e.grade is not None:
            final[e.course_id] = (e.grade, e.credit)
    total = sum(c for _, c in final.values())
    if not final or total == 0:
        raise LabelError(f"student {trace.student_id!r} has no graded passed course")
    return sum(g * c for g, c in final.values()) / total


def bin_gpa(value: float, binning: Binning = Binning.TWO_LEVEL) -> str:
    if not 1.0 <= value <= 4.0:
        raise ValueError(f"GPA {value} outside [1.0, 4.0]")
    table = FOUR_LEVEL_CLASSES if binning is Binning.FOUR_LEVEL else TWO_LEVEL_CLASSES
    for name, upper in table:
        if value <= upper:
            return name
    raise AssertionError("unreachable")


def bin_grade(grade: float) -> str:
    return GRADE_GOOD if grade <= GRADE_THRESHOLD else GRADE_BAD


def course_grade(trace: Trace, course_id: str, semester: int, include_failed: bool = True) -> float:
    """Grade of the attempt of ``course_id`` in ``semester``; later retakes are ignored."""
    grade = None
    for e in trace.events:
        if e.course_id == course_id and e.semester == semester and e.grade is not None:
            if e.passed or include_failed:
                grade = e.grade
    if grade is None:
        raise LabelError(f"student {trace.student_id!r} has no graded attempt of {course_id} in semester {semester}")
    return grade


def course_grade_label(trace: Trace, course_id: str, semester: int, include_failed: bool = True) -> str:
    return bin_grade(course_grade(trace, course_id, semester, include_failed))


def select_cohort(traces: Mapping[str, Trace], spec: LabelSpec) -> LabelVector:
    """Students for which ``spec`` is defined, in student-id order, with their labels."""
    students, values, classes = [], [], []
    for sid in sorted(traces):
        trace = traces[sid]
        try:
            if spec.is_course_grade:
                value = course_grade(trace, spec.course_id, spec.semester, spec.include_failed)
                cls = bin_grade(value)
            else:
                value = compute_overall_gpa(trace)
                cls = bin_gpa(value, spec.binning)
        except LabelError:
            continue
        students.append(sid)
        values.append(value)
        classes.append(cls)
    if not students:
        raise LabelError(f"no student has a defined label for {spec}")
    return LabelVector(spec.target, tuple(students), tuple(values), tuple(classes))


def write_labels(labels: LabelVector, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["student_id", "raw_value", "class"])
    for sid, v, c in zip(labels.students, labels.values, labels.classes):
        writer.writerow([sid, repr(v), c])
