import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from studyrules.tree import DecisionTree, Hyperparams, Leaf, Split, best_split, fit, gini

from .oracles import exhaustive_best_score, gini_exact


def random_dataset(rng, n_max=60, f_max=8, classes=("A", "B")):
    n = rng.randint(1, n_max)
    f = rng.randint(1, f_max)
    X = [[rng.randint(0, 1) for _ in range(f)] for _ in range(n)]
    y = [rng.choice(classes) for _ in range(n)]
    return np.array(X), y, [f"f{j:02d}" for j in range(f)]


def internal_nodes(tree, X):
    pos = {f: j for j, f in enumerate(tree.feature_names)}

    def visit(node, idx):
        if isinstance(node, Split):
            yield node, idx
            col = pos[node.feature]
            yield from visit(node.left, [i for i in idx if X[i][col] <= node.threshold])
            yield from visit(node.right, [i for i in idx if X[i][col] > node.threshold])
    yield from visit(tree.root, list(range(len(X))))


def hand_predict(tree, row_dict):
    node = tree.root
    while not isinstance(node, Leaf):
        node = node.left if row_dict[node.feature] <= node.threshold else node.right
    return node.predicted


def test_gini_examples():
    assert gini([10, 0]) == 0.0
    assert gini([5, 5]) == 0.5
    assert gini([3, 1]) == pytest.approx(float(1 - Fraction(3, 4) ** 2 - Fraction(1, 4) ** 2), abs=0)
    with pytest.raises(ValueError):
        gini([0, 0])


def test_perfect_separator():
    X = np.array([[0, 1], [0, 0], [1, 1], [1, 0]])
    y = np.array([0, 0, 1, 1])
    choice = best_split(X, y, 2)
    assert (choice.feature, choice.threshold, choice.score) == (0, 0.5, 0.0)


def test_constant_features_give_no_split():
    assert best_split(np.ones((5, 3), dtype=int), np.array([0, 1, 0, 1, 1]), 2) is None


def test_min_samples_leaf_is_respected():
    X = np.array([[0], [1], [1], [1]])
    y = np.array([0, 1, 1, 1])
    assert best_split(X, y, 2, min_samples_leaf=2) is None


def test_midpoint_threshold_for_integer_features():
    X = np.array([[-1], [-1], [2], [3]])
    choice = best_split(X, np.array([0, 0, 1, 1]), 2)
    assert choice.threshold == 0.5


def test_twenty_row_fixture_matches_exhaustive_minimum():
    rng = random.Random(20)
    X = [[rng.randint(0, 1) for _ in range(5)] for _ in range(20)]
    y = [rng.choice("AB") for _ in range(20)]
    codes = np.array([0 if c == "A" else 1 for c in y])
    choice = best_split(np.array(X), codes, 2)
    assert Fraction(choice.score).limit_denominator(1000) == exhaustive_best_score(X, y)


def test_single_row_and_leaf_only():
    tree = fit(np.array([[1, 0]]), ["B"], ["a", "b"])
    assert isinstance(tree.root, Leaf) and tree.predict_row({}) == "B"


def test_nested_features_depth_one_stump():
    # f1 separates 7 of 8 rows, f0 only 6 of 8.
    X = np.array([[0, 0], [0, 0], [0, 0], [1, 0], [1, 1], [1, 1], [1, 1], [0, 1]])
    y = ["A", "A", "A", "A", "B", "B", "B", "B"]
    tree = fit(X, y, ["f0", "f1"], Hyperparams(max_depth=1))
    rows = [tuple(r) for r in X.tolist()]
    assert tree.root.feature == "f1" and tree.depth == 1
    left = [y[i] for i, r in enumerate(rows) if r[1] == 0]
    right = [y[i] for i, r in enumerate(rows) if r[1] == 1]
    score = (len(left) * gini_exact(left) + len(right) * gini_exact(right)) / 8
    assert score == exhaustive_best_score(rows, y)


def test_tie_breaks_on_feature_name_then_class():
    X = np.array([[0, 0], [1, 1]])
    tree = fit(X, ["A", "B"], ["zeta", "alpha"])
    assert tree.root.feature == "alpha"
    tie = fit(np.array([[0], [0]]), ["B", "A"], ["f"])
    assert tie.root.predicted == "A"


def test_row_order_does_not_matter():
    rng = random.Random(7)
    X, y, names = random_dataset(rng, 80, 6)
    perm = list(range(len(y)))
    rng.shuffle(perm)
    a = fit(X, y, names)
    b = fit(X[perm], [y[i] for i in perm], names)
    assert a.to_dict()["root"] == b.to_dict()["root"] or _same_structure(a.root, b.root)


def _same_structure(u, v):
    if isinstance(u, Leaf):
        return isinstance(v, Leaf) and u.class_counts == v.class_counts and u.predicted == v.predicted
    return (isinstance(v, Split) and (u.feature, u.threshold) == (v.feature, v.threshold)
            and _same_structure(u.left, v.left) and _same_structure(u.right, v.right))


def test_fit_errors():
    with pytest.raises(ValueError):
        fit(np.zeros((2, 1)), ["A"], ["f"])
    with pytest.raises(ValueError):
        fit(np.zeros((0, 1)), [], ["f"])
    with pytest.raises(ValueError):
        fit(np.zeros((2, 2)), ["A", "B"], ["f"])
    with pytest.raises(ValueError):
        Hyperparams(max_depth=0)


def test_predict_missing_feature_raises():
    tree = fit(np.array([[0], [1]]), ["A", "B"], ["f"])
    assert tree.predict_row({"f": 0}) == "A" and tree.predict_row({"f": 1}) == "B"
    with pytest.raises(KeyError):
        tree.predict_row({"g": 1})


def test_predict_matches_hand_walk():
    rng = random.Random(100)
    X, y, names = random_dataset(rng, 100, 8)
    tree = fit(X, y, names)
    rows = [dict(zip(names, r)) for r in X.tolist()]
    assert tree.predict(X) == [hand_predict(tree, r) for r in rows]


def test_json_round_trip_and_dot():
    rng = random.Random(3)
    X, y, names = random_dataset(rng, 50, 5)
    tree = fit(X, y, names, Hyperparams(max_depth=3))
    back = DecisionTree.from_json(tree.to_json())
    assert back.to_json() == tree.to_json()
    assert back.predict(X) == tree.predict(X)
    dot = tree.to_dot()
    if isinstance(tree.root, Split):
        assert f"{tree.root.feature} <= 0.5" in dot


def test_every_split_is_exhaustively_optimal():
    rng = random.Random(42)
    for _ in range(60):
        X, y, names = random_dataset(rng)
        tree = fit(X, y, names)
        rows = [tuple(r) for r in X.tolist()]
        for node, idx in internal_nodes(tree, rows):
            sub_rows = [rows[i] for i in idx]
            sub_y = [y[i] for i in idx]
            col = names.index(node.feature)
            left = [sub_y[k] for k, r in enumerate(sub_rows) if r[col] <= node.threshold]
            right = [sub_y[k] for k, r in enumerate(sub_rows) if r[col] > node.threshold]
            score = (len(left) * gini_exact(left) + len(right) * gini_exact(right)) / len(idx)
            assert score == exhaustive_best_score(sub_rows, sub_y)
            assert score <= gini_exact(sub_y)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_unbounded_tree_fits_consistent_data(seed):
    rng = random.Random(seed)
    n_feat = rng.randint(1, 6)
    sigs = {tuple(rng.randint(0, 1) for _ in range(n_feat)) for _ in range(rng.randint(1, 30))}
    rows = sorted(sigs)
    y = [rng.choice("ABC") for _ in rows]
    names = [f"f{j}" for j in range(n_feat)]
    tree = fit(np.array(rows), y, names, Hyperparams(max_depth=50))
    assert tree.predict(np.array(rows)) == y
    assert all(len(p) <= 50 for p, _ in tree.leaves())
