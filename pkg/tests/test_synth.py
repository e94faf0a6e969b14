import math

import pytest

from studyrules.event_log import build_study_path, build_traces, parse_event_log, serialize_event_log
from studyrules.labels import GRADE_BAD, GRADE_GOOD, course_grade_label
from studyrules.order_graph import course_spans
from studyrules.synth import CohortSpec, PlantedRule, SpecError, generate, satisfied

RULE = PlantedRule(frozenset({("course-2", 1), ("course-8", 3)}), "course-12", 4, GRADE_GOOD, 0.1)


def placements(trace):
    return {(e.course_id, e.semester) for e in trace.events}


def test_same_seed_same_bytes():
    spec = CohortSpec(n_students=40, planted_rules=(RULE,), seed=9)
    assert serialize_event_log(generate(spec)) == serialize_event_log(generate(spec))
    assert serialize_event_log(generate(spec)) != serialize_event_log(generate(CohortSpec(n_students=40, seed=10)))


def test_output_passes_validation():
    log = generate(CohortSpec(n_students=60, planted_rules=(RULE,), fail_rate=0.4, gap_probability=0.3, seed=1))
    assert parse_event_log(serialize_event_log(log)) == log


def test_no_failures_no_retakes():
    traces = build_traces(generate(CohortSpec(n_students=30, fail_rate=0.0, seed=2)))
    for t in traces.values():
        assert all(first == last for first, last in course_spans(build_study_path(t)).values())
        assert all(e.passed for e in t.events)


def test_retakes_come_later():
    traces = build_traces(generate(CohortSpec(n_students=50, fail_rate=0.5, seed=3)))
    for t in traces.values():
        by_course = {}
        for e in t.events:
            by_course.setdefault(e.course_id, []).append(e)
        for attempts in by_course.values():
            sems = [e.semester for e in attempts]
            assert sems == sorted(sems) and len(set(sems)) == len(sems)
            assert all(not e.passed for e in attempts[:-1])


def test_noise_free_rule_is_deterministic():
    rule = PlantedRule(RULE.antecedent, "course-12", 4, GRADE_BAD, 0.0)
    traces = build_traces(generate(CohortSpec(n_students=500, planted_rules=(rule,), seed=4)))
    for t in traces.values():
        expected = GRADE_BAD if satisfied(placements(t), rule) else GRADE_GOOD
        assert course_grade_label(t, "course-12", 4) == expected


def test_conditional_frequency_within_three_sigma():
    traces = build_traces(generate(CohortSpec(n_students=2000, planted_rules=(RULE,), seed=5)))
    hits = [t for t in traces.values() if satisfied(placements(t), RULE)]
    n = len(hits)
    good = sum(course_grade_label(t, "course-12", 4) == GRADE_GOOD for t in hits)
    p = 1 - RULE.noise_rate
    assert abs(good - n * p) <= 3 * math.sqrt(n * p * (1 - p))


def test_scaled_cohort_event_count():
    log = generate(CohortSpec(n_students=141, n_courses=18, take_rate=0.36, seed=0))
    assert abs(len(log) - 1075) <= 107.5


@pytest.mark.parametrize("spec", [
    CohortSpec(fail_rate=1.5),
    CohortSpec(n_students=0),
    CohortSpec(planted_rules=(PlantedRule(frozenset({("course-99", 1)}), "course-1", 2),)),
    CohortSpec(planted_rules=(PlantedRule(frozenset({("course-2", 9)}), "course-1", 2),)),
    CohortSpec(planted_rules=(PlantedRule(frozenset({("course-2", 1)}), "course-2", 2),)),
    CohortSpec(planted_rules=(
        PlantedRule(frozenset({("course-2", 1)}), "course-1", 2),
        PlantedRule(frozenset({("course-2", 3)}), "course-3", 2),
    )),
    CohortSpec(planted_rules=(PlantedRule(frozenset(), "course-1", 2, consequent="meh"),)),
])
def test_unsatisfiable_specs_are_rejected(spec):
    with pytest.raises(SpecError):
        generate(spec)
