import random

import numpy as np
import pytest

from botnet_forensics.errors import EmptyDataset
from botnet_forensics.tree import (
    Label,
    Leaf,
    Split,
    TreeModel,
    best_split,
    load_model,
    predict,
    save_model,
    train_tree,
)

import oracles


def test_pure_dataset_gives_single_leaf():
    model = train_tree([([1.0], "BOT"), ([5.0], "BOT")])
    assert len(model.nodes) == 1 and model.nodes[0].label is Label.BOT
    assert predict(model, [123.0]) is Label.BOT


def test_forced_midpoint():
    model = train_tree([([1.0], "NORMAL"), ([3.0], "BOT")])
    root = model.nodes[0]
    assert isinstance(root, Split) and root.feature == 0 and root.threshold == 2.0
    assert model.nodes[root.left].label is Label.NORMAL
    assert model.nodes[root.right].label is Label.BOT
    assert predict(model, [0.0]) is Label.NORMAL
    assert predict(model, [2.0]) is Label.NORMAL
    assert predict(model, [2.5]) is Label.BOT


def test_empty_dataset():
    with pytest.raises(EmptyDataset):
        train_tree([])


def test_majority_tie_is_normal():
    model = train_tree([([1.0], "BOT"), ([1.0], "NORMAL")])
    assert model.nodes[0].label is Label.NORMAL


def random_dataset(rng, n, d=3, levels=None):
    X = [[float(rng.randint(0, levels) if levels else rng.uniform(-5, 5)) for _ in range(d)] for _ in range(n)]
    y = [rng.choice(["BOT", "NORMAL"]) for _ in range(n)]
    return X, y


@pytest.mark.parametrize("seed", range(25))
def test_root_split_matches_exhaustive_search(seed):
    rng = random.Random(seed)
    X, y = random_dataset(rng, 40)
    model = train_tree(list(zip(X, y)), max_depth=4)
    expected = oracles.exhaustive_root_split(X, y)
    root = model.nodes[0]
    if expected is None:
        assert isinstance(root, Leaf)
    else:
        assert (root.feature, root.threshold) == (expected[1], expected[2])


@pytest.mark.parametrize("seed", range(25))
def test_predictions_match_tree_walk(seed):
    rng = random.Random(seed)
    X, y = random_dataset(rng, 40)
    model = train_tree(list(zip(X, y)), max_depth=5)
    nodes = model.to_dict()["nodes"]
    for x in X:
        assert predict(model, x).value == oracles.tree_walk(nodes, x)


def test_depth_and_min_leaf_limits():
    rng = random.Random(9)
    X, y = random_dataset(rng, 80)
    for depth in range(4):
        model = train_tree(list(zip(X, y)), max_depth=depth, min_leaf=3)
        assert model.depth() <= depth
        for node in model.nodes:
            if isinstance(node, Leaf):
                assert sum(node.counts.values()) >= 3


def test_predict_visits_at_most_depth_plus_one():
    rng = random.Random(4)
    X, y = random_dataset(rng, 60)
    model = train_tree(list(zip(X, y)), max_depth=3)
    for x in X:
        visited, node = 1, model.nodes[0]
        while isinstance(node, Split):
            node = model.nodes[node.left if x[node.feature] <= node.threshold else node.right]
            visited += 1
        assert visited <= model.max_depth + 1


def test_tie_break_lowest_feature_then_threshold():
    # identical columns: every split ties, feature 0 must win, lowest threshold first
    X = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]])
    y = np.array([0, 1, 0, 1])
    score, f, thr = best_split(X, y)
    assert f == 0 and thr == 1.5


def test_model_file_roundtrip(tmp_path):
    rng = random.Random(2)
    X, y = random_dataset(rng, 50)
    model = train_tree(list(zip(X, y)), max_depth=4)
    save_model(model, tmp_path / "m.json")
    assert load_model(tmp_path / "m.json") == model


def test_invalid_model_rejected():
    bad = {"feature_names": ["a"], "max_depth": 1,
           "nodes": [{"kind": "split", "feature": 0, "threshold": 0.0, "left": 0, "right": 5}]}
    with pytest.raises(ValueError):
        TreeModel.from_dict(bad)
