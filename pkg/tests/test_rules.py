import io
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from studyrules.rules import (
    ALIGNED,
    DEVIATING,
    GT,
    LE,
    UNCONSTRAINED,
    Condition,
    Rule,
    UnsupportedComparison,
    compare_to_plan,
    extract_rules,
    match_rules,
    parse_rule,
    rank,
    read_plan,
    read_rules_jsonl,
    relevancy,
    relevancy_harmonic,
    relevancy_product,
    render_rule,
    top_k,
    write_rules_jsonl,
    write_rules_text,
)
from studyrules.tree import Hyperparams, fit

from .conftest import BAD, GOOD, REFERENCE_RULES, five_leaf_dataset
from .oracles import all_binary_vectors


def fitted_rules():
    X, y, names = five_leaf_dataset()
    tree = fit(X, y, names)
    return tree, X, y, extract_rules(tree, X, y, "course-1-2")


def leaf_order_rules(tree, ruleset):
    by_conds = {r.conditions: r for r in ruleset}
    return [by_conds[tuple(Condition(s.feature, GT if right else LE, s.threshold) for s, right in path)]
            for path, _ in tree.leaves()]


def test_five_leaf_tree_gives_reference_rules():
    tree, X, y, rules = fitted_rules()
    assert tree.n_leaves == len(rules) == 5
    rendered = [render_rule(r, strip_prefix="a-cs-") for r in leaf_order_rules(tree, rules)]
    assert rendered == list(REFERENCE_RULES)
    assert sum(r.support for r in rules) == len(y)


def test_rule_render_round_trip():
    _, _, _, rules = fitted_rules()
    for r in rules:
        back = parse_rule(render_rule(r))
        assert (back.conditions, back.predicted, back.target) == (r.conditions, r.predicted, r.target)
    assert parse_rule(REFERENCE_RULES[0]) == Rule((Condition("course-115-2", LE, 0.5),), BAD, target="course-1-2")


def test_unconditional_rule():
    X = np.zeros((4, 1))
    tree = fit(X, ["a", "a", "b", "a"], ["f"])
    (rule,) = extract_rules(tree, X, ["a", "a", "b", "a"])
    assert render_rule(rule) == "IF TRUE THEN a"
    assert rule.support == 4 and rule.confidence == 0.75
    assert match_rules([rule], {}) is rule
    assert render_rule(Rule((), "good", target="gpa")) == "IF TRUE THEN gpa = good"
    assert parse_rule("IF TRUE THEN gpa = good") == Rule((), "good", target="gpa")


def test_relevancy_examples():
    assert relevancy(Rule((), "a", support=10, correct=10), 10) == 1.0
    assert relevancy(Rule((), "a", support=5, correct=4), 10) == pytest.approx(0.4, abs=1e-15)
    with pytest.raises(ValueError):
        relevancy(Rule((), "a"), 10)
    assert relevancy_harmonic(1.0, 1.0) == 1.0 and relevancy_harmonic(0.0, 0.0) == 0.0


def test_ranking_and_top_k():
    rules = [Rule((Condition(f"f{i}", LE, 0.5),), "a", support=s, relevancy=r)
             for i, (s, r) in enumerate([(3, 0.1), (9, 0.5), (2, 0.3), (8, 0.3), (1, 0.2)])]
    ranked = rank(rules)
    assert [r.relevancy for r in ranked] == [0.5, 0.3, 0.3, 0.2, 0.1]
    assert ranked[1].support == 8
    assert top_k(ranked, 2) == list(ranked.rules[:2])
    with pytest.raises(ValueError):
        top_k(ranked, 0)


def test_match_rules_left_most_path():
    tree, X, y, rules = fitted_rules()
    vector = {"a-cs-course-115-2": 0, "a-cs-course-82-1": 1, "a-cs-course-81-2": 1, "a-cs-course-15-2": 1}
    assert render_rule(match_rules(rules, vector), "a-cs-") == REFERENCE_RULES[0]
    with pytest.raises(KeyError):
        match_rules(rules, {"a-cs-course-115-2": 1})


def test_extract_rejects_mismatched_rows():
    tree, X, y, _ = fitted_rules()
    with pytest.raises(ValueError):
        extract_rules(tree, X[:, :2], y)
    with pytest.raises(ValueError):
        extract_rules(tree, X, y[:-1])


def test_compare_to_plan():
    rule = parse_rule("IF a-cs-course-140-4 > 0.5 AND a-cs-course-115-4 ≤ 0.5 AND a-cs-course-9-1 > 0.5 THEN course-131-4 ≤ 2.5")
    checks = compare_to_plan(rule, {"course-140": 4, "course-115": 4})
    assert [c.status for c in checks] == [ALIGNED, DEVIATING, UNCONSTRAINED]
    assert [c.status for c in compare_to_plan(rule, {"course-140": 3, "course-115": 2})] == [DEVIATING, ALIGNED, UNCONSTRAINED]
    assert {c.status for c in compare_to_plan(rule, {})} == {UNCONSTRAINED}
    with pytest.raises(UnsupportedComparison):
        compare_to_plan(parse_rule("IF a-co-x-1 > 0.5 THEN y"), {})


def test_read_plan():
    assert read_plan(io.StringIO("course_id,recommended_semester\nc1,2\n")) == {"c1": 2}
    with pytest.raises(ValueError):
        read_plan(io.StringIO("course,sem\nc1,2\n"))


def test_rule_files_round_trip():
    _, _, _, rules = fitted_rules()
    buf = io.StringIO()
    write_rules_jsonl(rules, buf)
    assert read_rules_jsonl(io.StringIO(buf.getvalue())) == list(rules)
    text = io.StringIO()
    write_rules_text(rules, text)
    assert text.getvalue().splitlines() == [render_rule(r) for r in rules]


def test_exclusive_and_exhaustive_on_random_trees():
    rng = random.Random(9)
    for _ in range(40):
        n_feat = rng.randint(1, 10)
        names = [f"f{j}" for j in range(n_feat)]
        X = np.array([[rng.randint(0, 1) for _ in names] for _ in range(rng.randint(2, 80))])
        y = [rng.choice("ABC") for _ in range(len(X))]
        tree = fit(X, y, names, Hyperparams(max_depth=rng.randint(1, 6)))
        rules = extract_rules(tree, X, y)
        assert len(rules) == tree.n_leaves
        assert sum(r.support for r in rules) == len(y)
        assert sum(r.correct for r in rules) == sum(p == t for p, t in zip(tree.predict(X), y))
        for vector in all_binary_vectors(names):
            assert match_rules(rules, vector).predicted == tree.predict_row(vector)


@settings(max_examples=200)
@given(st.floats(0, 1), st.floats(0.01, 1), st.floats(0, 1), st.floats(0.01, 1))
def test_relevancy_monotone(c1, s1, c2, s2):
    for fn in (relevancy_product, relevancy_harmonic):
        if c1 <= c2:
            assert fn(c1, s1) <= fn(c2, s1) + 1e-12
        if s1 <= s2:
            assert fn(c1, s1) <= fn(c1, s2) + 1e-12


@settings(max_examples=100)
@given(st.lists(st.tuples(st.sampled_from(["a-cs-x-1", "a-pl-s-x-1->y-2", "f"]), st.sampled_from([LE, GT]),
                          st.sampled_from([0.5, -0.5, 1.5, 2.0])), max_size=4),
       st.sampled_from([GOOD, BAD, "good", "excellent"]), st.sampled_from(["", "gpa", "course-1-2"]))
def test_parse_render_round_trip(conds, cls, target):
    rule = Rule(tuple(Condition(*c) for c in conds), cls, target=target)
    assert parse_rule(render_rule(rule)) == rule
