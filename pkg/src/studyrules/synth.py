"""Seeded synthetic exam-attempt logs with planted placement -> grade rules."""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Iterable, Optional

from .event_log import FAIL_GRADE, PASSING_GRADES, Event, EventLog, Status
from .labels import GRADE_BAD, GRADE_GOOD, GRADE_THRESHOLD

GOOD_GRADES = tuple(g for g in PASSING_GRADES if g <= GRADE_THRESHOLD)
BAD_GRADES = tuple(g for g in PASSING_GRADES if g > GRADE_THRESHOLD)
CREDITS = (5, 6, 8)
FIRST_TERM = datetime(2018, 10, 1)


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class PlantedRule:
    """Students whose first attempts satisfy every ``(course, semester)`` placement
    get ``consequent`` as the grade class of ``target_course`` in
    ``target_semester``; everyone else gets the other class. Either way the
    class is flipped with probability ``noise_rate``.
    """

    antecedent: frozenset[tuple[str, int]]
    target_course: str
    target_semester: int
    consequent: str = GRADE_GOOD
    noise_rate: float = 0.1

    def __post_init__(self) -> None:
        object.__setattr__(self, "antecedent", frozenset(self.antecedent))


@dataclass(frozen=True)
class CohortSpec:
    n_students: int = 200
    n_courses: int = 18
    semesters_span: int = 6
    fail_rate: float = 0.15
    gap_probability: float = 0.05
    planted_rules: tuple[PlantedRule, ...] = ()
    seed: int = 0
    take_rate: float = 1.0  # chance a student takes a given unplanted course
    placement_rate: float = 0.8  # chance a planted placement is forced for a student
    max_attempts: int = 3

    def courses(self) -> list[str]:
        return [f"course-{i}" for i in range(1, self.n_courses + 1)]

    def validate(self) -> None:
        for name in ("fail_rate", "gap_probability", "take_rate", "placement_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise SpecError(f"{name} must lie in [0, 1], got {v}")
        if self.n_students < 1 or self.n_courses < 1 or self.semesters_span < 1 or self.max_attempts < 1:
            raise SpecError("counts must be positive")
        known = set(self.courses())
        placed: dict[str, int] = {}
        targets: dict[str, int] = {}
        for rule in self.planted_rules:
            if not 0.0 <= rule.noise_rate <= 1.0:
                raise SpecError(f"noise_rate must lie in [0, 1], got {rule.noise_rate}")
            if rule.consequent not in (GRADE_GOOD, GRADE_BAD):
                raise SpecError(f"unknown consequent class {rule.consequent!r}")
            if rule.target_course not in known:
                raise SpecError(f"unknown target course {rule.target_course!r}")
            if rule.target_course in targets or rule.target_course in placed:
                raise SpecError(f"{rule.target_course} is used by two planted rules")
            if not 1 <= rule.target_semester <= self.semesters_span:
                raise SpecError("target semester outside the semester span")
            targets[rule.target_course] = rule.target_semester
            for course, sem in rule.antecedent:
                if course not in known:
                    raise SpecError(f"unknown antecedent course {course!r}")
                if not 1 <= sem <= self.semesters_span:
                    raise SpecError(f"placement semester {sem} outside the semester span")
                if placed.get(course, sem) != sem or course in targets:
                    raise SpecError(f"conflicting placements for {course}")
                placed[course] = sem


def _term_date(rng: random.Random, semester: int) -> datetime:
    # Exam period sits in the last months of each half-year term.
    start = FIRST_TERM + timedelta(days=182 * (semester - 1) + 110)
    return start + timedelta(days=rng.randrange(60))


def _next_open(sem: int, gaps: set[int]) -> int:
    while sem in gaps:
        sem += 1
    return sem


def generate(spec: CohortSpec) -> EventLog:
    spec.validate()
    rng = random.Random(spec.seed)
    courses = spec.courses()
    credits = {c: rng.choice(CREDITS) for c in courses}
    recommended = {c: 1 + (i * spec.semesters_span) // spec.n_courses for i, c in enumerate(courses)}
    targets = {r.target_course: r for r in spec.planted_rules}
    width = len(str(spec.n_students))

    events: list[Event] = []
    for s in range(1, spec.n_students + 1):
        sid = f"student-{s:0{width}d}"
        gender = rng.choice(("gender-1", "gender-2"))
        nationality = "country-1" if rng.random() < 0.8 else "other"

        forced: dict[str, int] = {}
        for rule in spec.planted_rules:
            forced[rule.target_course] = rule.target_semester
            for course, sem in sorted(rule.antecedent):
                if rng.random() < spec.placement_rate:
                    forced[course] = sem
        gaps = {t for t in range(2, spec.semesters_span + 1) if rng.random() < spec.gap_probability}
        gaps -= set(forced.values())

        first: dict[str, int] = {}
        for c in courses:
            if c in forced:
                first[c] = forced[c]
            elif rng.random() < spec.take_rate:
                sem = min(max(recommended[c] + rng.randint(-1, 1), 1), spec.semesters_span)
                first[c] = _next_open(sem, gaps)

        attempts: list[tuple[str, int, Optional[float]]] = []
        for c in courses:
            if c not in first or c in targets:
                continue
            sem = first[c]
            for n_try in range(1, spec.max_attempts + 1):
                if rng.random() < spec.fail_rate:
                    attempts.append((c, sem, FAIL_GRADE))
                    if n_try < spec.max_attempts:
                        sem = _next_open(sem + rng.randint(1, 2), gaps)
                    continue
                attempts.append((c, sem, rng.choice(PASSING_GRADES)))
                break

        placements = {(c, sem) for c, sem, _ in attempts}
        for rule in spec.planted_rules:
            hit = rule.antecedent <= placements
            good = (rule.consequent == GRADE_GOOD) == hit
            if rng.random() < rule.noise_rate:
                good = not good
            grade = rng.choice(GOOD_GRADES if good else BAD_GRADES)
            attempts.append((rule.target_course, rule.target_semester, grade))

        last_sem = max(sem for _, sem, _ in attempts) if attempts else 1
        for c, sem, grade in sorted(attempts, key=lambda a: (a[1], a[0])):
            start = _term_date(rng, sem)
            events.append(Event(
                student_id=sid,
                course_id=c,
                time_start=start,
                time_end=start + timedelta(days=rng.randint(14, 42)),
                semester=sem,
                credit=credits[c],
                grade=grade,
                final_status=Status.FAILED if grade == FAIL_GRADE else Status.PASSED,
                gender=gender,
                nationality=nationality,
                study_time=last_sem / 2,
            ))
    return EventLog(tuple(events))


def satisfied(log_placements: Iterable[tuple[str, int]], rule: PlantedRule) -> bool:
    return rule.antecedent <= set(log_placements)
