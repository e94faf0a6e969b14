"""Exam-attempt event logs: parsing, validation, traces and study paths.

One row of the input is one exam attempt. Students are cases, courses are
activities and the exam date is the timestamp.
"""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime
from decimal import Decimal, InvalidOperation
from enum import Enum
from typing import Iterable, Iterator, Mapping, Optional, TextIO

GRADE_SCALE: tuple[float, ...] = (1.0, 1.3, 1.7, 2.0, 2.3, 2.7, 3.0, 3.3, 3.7, 4.0, 5.0)
PASSING_GRADES: tuple[float, ...] = GRADE_SCALE[:-1]
FAIL_GRADE = 5.0


class Status(str, Enum):
    PASSED = "PASSED"
    FAILED = "FAILED"


# Event field -> header name in the input file.
DEFAULT_SCHEMA: dict[str, str] = {
    "student_id": "student-id",
    "course_id": "course-id",
    "credit": "credit",
    "time_start": "time-start",
    "time_end": "time-end",
    "semester": "semester",
    "grade": "grade",
    "final_status": "final-status",
    "gender": "gender",
    "nationality": "nationality",
    "study_time": "study-time",
}
MANDATORY_FIELDS = ("student_id", "course_id", "time_start")


class EventLogError(ValueError):
    """Base class for ingestion failures."""


class SchemaError(EventLogError):
    def __init__(self, column: str) -> None:
        super().__init__(f"missing mandatory column {column!r}")
        self.column = column


class RowError(EventLogError):
    def __init__(self, row: int, message: str) -> None:
        super().__init__(f"row {row}: {message}")
        self.row = row


class EmptyLogError(EventLogError):
    def __init__(self) -> None:
        super().__init__("event log contains no events")


@dataclass(frozen=True)
class Event:
    """A single exam attempt."""

    student_id: str
    course_id: str
    time_start: datetime
    time_end: Optional[datetime] = None
    semester: int = 1
    credit: int = 0
    grade: Optional[float] = None
    final_status: Status = Status.PASSED
    gender: str = ""
    nationality: str = ""
    study_time: float = 0.0

    def __post_init__(self) -> None:
        if self.time_end is None:
            object.__setattr__(self, "time_end", self.time_start)
        if self.time_end < self.time_start:
            raise ValueError("time-end precedes time-start")
        if self.semester < 1:
            raise ValueError(f"semester must be >= 1, got {self.semester}")
        if self.credit < 0:
            raise ValueError(f"credit must be non-negative, got {self.credit}")
        if self.study_time < 0:
            raise ValueError(f"study-time must be non-negative, got {self.study_time}")
        if self.grade is not None:
            if self.grade not in GRADE_SCALE:
                raise ValueError(f"grade {self.grade} is not on the grade scale")
            if self.final_status is Status.PASSED and self.grade > 4.0:
                raise ValueError(f"PASSED attempt with failing grade {self.grade}")
            if self.final_status is Status.FAILED and self.grade != FAIL_GRADE:
                raise ValueError(f"FAILED attempt with grade {self.grade}")

    @property
    def passed(self) -> bool:
        return self.final_status is Status.PASSED

    def sort_key(self) -> tuple:
        return (self.semester, self.time_start, self.course_id)


@dataclass(frozen=True)
class EventLog:
    """Multiset of events; row order and duplicates are preserved."""

    events: tuple[Event, ...] = ()

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    @property
    def students(self) -> frozenset[str]:
        return frozenset(e.student_id for e in self.events)

    @property
    def courses(self) -> frozenset[str]:
        return frozenset(e.course_id for e in self.events)


@dataclass(frozen=True)
class Trace:
    student_id: str
    events: tuple[Event, ...]

    def __len__(self) -> int:
        return len(self.events)

    @property
    def activities(self) -> tuple[str, ...]:
        return tuple(e.course_id for e in self.events)


@dataclass(frozen=True)
class Attempt:
    course_id: str
    grade: Optional[float] = None
    final_status: Status = Status.PASSED


@dataclass(frozen=True)
class StudyPath:
    """Attempts of one student grouped by semester; gap semesters are absent."""

    student_id: str
    semesters: Mapping[int, tuple[Attempt, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ordered = {s: tuple(self.semesters[s]) for s in sorted(self.semesters) if self.semesters[s]}
        object.__setattr__(self, "semesters", ordered)

    @classmethod
    def from_courses(cls, student_id: str, plan: Mapping[int, Iterable[str]]) -> "StudyPath":
        """Build a path from ``{semester: [course_id, ...]}``."""
        return cls(student_id, {s: tuple(Attempt(c) for c in cs) for s, cs in plan.items()})

    @property
    def occupied(self) -> tuple[int, ...]:
        return tuple(self.semesters)

    def attempts(self) -> Iterator[tuple[int, Attempt]]:
        for sem, atts in self.semesters.items():
            for a in atts:
                yield sem, a

    def __len__(self) -> int:
        return sum(len(a) for a in self.semesters.values())

    def courses(self) -> tuple[str, ...]:
        return tuple(sorted({a.course_id for _, a in self.attempts()}))


def _parse_date(raw: str, row: int, column: str) -> datetime:
    # ISO date (YYYY-MM-DD) or full ISO timestamp.
    try:
        return datetime.fromisoformat(raw.strip())
    except ValueError:
        raise RowError(row, f"malformed date {raw!r} in column {column!r}") from None


def _parse_int(raw: str, row: int, column: str) -> int:
    try:
        return int(raw.strip())
    except ValueError:
        raise RowError(row, f"malformed integer {raw!r} in column {column!r}") from None


def _parse_float(raw: str, row: int, column: str) -> float:
    try:
        return float(raw.strip())
    except ValueError:
        raise RowError(row, f"malformed number {raw!r} in column {column!r}") from None


def _parse_grade(raw: str) -> Optional[float]:
    # Pass/fail courses carry no grade; anything non-numeric is treated as absent.
    try:
        value = Decimal(raw.strip())
    except InvalidOperation:
        return None
    if not value.is_finite():
        return None
    return float(value)


def parse_event_log(
    source: TextIO | str,
    schema: Optional[Mapping[str, str]] = None,
    delimiter: str = ",",
) -> EventLog:
    """Parse delimiter-separated text with a header row into an :class:`EventLog`.

    ``schema`` maps event fields to header names and is merged over
    :data:`DEFAULT_SCHEMA`. Row indices in errors are 1-based data rows
    (the header is row 0).
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    mapping = {**DEFAULT_SCHEMA, **(schema or {})}
    reader = csv.reader(source, delimiter=delimiter)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise EmptyLogError() from None
    positions = {name: i for i, name in enumerate(header)}
    for fld in MANDATORY_FIELDS:
        if mapping[fld] not in positions:
            raise SchemaError(mapping[fld])
    cols = {fld: positions[col] for fld, col in mapping.items() if col in positions}

    events = []
    for row_idx, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise RowError(row_idx, f"expected {len(header)} cells, got {len(row)}")
        cell = {fld: row[i] for fld, i in cols.items()}
        kwargs: dict = {
            "student_id": cell["student_id"].strip(),
            "course_id": cell["course_id"].strip(),
            "time_start": _parse_date(cell["time_start"], row_idx, mapping["time_start"]),
        }
        if not kwargs["student_id"] or not kwargs["course_id"]:
            raise RowError(row_idx, "empty student or course identifier")
        if cell.get("time_end", "").strip():
            kwargs["time_end"] = _parse_date(cell["time_end"], row_idx, mapping["time_end"])
        if "semester" in cell:
            kwargs["semester"] = _parse_int(cell["semester"], row_idx, mapping["semester"])
        if cell.get("credit", "").strip():
            kwargs["credit"] = _parse_int(cell["credit"], row_idx, mapping["credit"])
        if "grade" in cell:
            kwargs["grade"] = _parse_grade(cell["grade"])
        if "final_status" in cell:
            raw = cell["final_status"].strip().upper()
            try:
                kwargs["final_status"] = Status(raw)
            except ValueError:
                raise RowError(row_idx, f"unknown final status {raw!r}") from None
        for fld in ("gender", "nationality"):
            if fld in cell:
                kwargs[fld] = cell[fld].strip()
        if cell.get("study_time", "").strip():
            kwargs["study_time"] = _parse_float(cell["study_time"], row_idx, mapping["study_time"])
        try:
            events.append(Event(**kwargs))
        except ValueError as exc:
            raise RowError(row_idx, str(exc)) from None
    if not events:
        raise EmptyLogError()
    return EventLog(tuple(events))


def read_event_log(path, schema: Optional[Mapping[str, str]] = None, delimiter: str = ",") -> EventLog:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_event_log(fh, schema, delimiter)


def format_time(t: datetime) -> str:
    if (t.hour, t.minute, t.second, t.microsecond) == (0, 0, 0, 0) and t.tzinfo is None:
        return t.date().isoformat()
    return t.isoformat()


def _fmt_grade(grade: Optional[float]) -> str:
    return "" if grade is None else f"{grade:.1f}"


def serialize_event_log(log: EventLog, delimiter: str = ",") -> str:
    """Write ``log`` in the default input format; inverse of :func:`parse_event_log`."""
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    fields = list(DEFAULT_SCHEMA)
    writer.writerow([DEFAULT_SCHEMA[f] for f in fields])
    for e in log.events:
        writer.writerow([
            e.student_id,
            e.course_id,
            e.credit,
            format_time(e.time_start),
            format_time(e.time_end),
            e.semester,
            _fmt_grade(e.grade),
            e.final_status.value,
            e.gender,
            e.nationality,
            repr(e.study_time),
        ])
    return buf.getvalue()


def filter_courses(log: EventLog, allowed: Iterable[str]) -> EventLog:
    allowed = frozenset(allowed)
    if not allowed:
        raise ValueError("allowed course set must be non-empty")
    return EventLog(tuple(e for e in log.events if e.course_id in allowed))


def build_traces(log: EventLog) -> dict[str, Trace]:
    """One trace per student, ordered by (semester, exam date, course id)."""
    grouped: dict[str, list[Event]] = defaultdict(list)
    for e in log.events:
        grouped[e.student_id].append(e)
    return {
        sid: Trace(sid, tuple(sorted(evts, key=Event.sort_key)))
        for sid, evts in sorted(grouped.items())
    }


def build_study_path(trace: Trace) -> StudyPath:
    if not trace.events:
        raise ValueError(f"trace of {trace.student_id!r} is empty")
    grouped: dict[int, list[Attempt]] = defaultdict(list)
    for e in trace.events:
        grouped[e.semester].append(Attempt(e.course_id, e.grade, e.final_status))
    return StudyPath(trace.student_id, {s: tuple(a) for s, a in grouped.items()})


DOTTED_CHART_HEADER = ("student_id", "time_start", "course_id")


def dotted_chart_export(log: EventLog) -> list[tuple[str, str, str]]:
    """Rows for a dotted chart: one per event, by student then exam date."""
    ordered = sorted(log.events, key=lambda e: (e.student_id, e.time_start, e.course_id))
    return [(e.student_id, format_time(e.time_start), e.course_id) for e in ordered]


def write_dotted_chart(log: EventLog, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(DOTTED_CHART_HEADER)
    writer.writerows(dotted_chart_export(log))
