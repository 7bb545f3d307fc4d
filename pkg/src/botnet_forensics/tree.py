"""CART-style binary decision tree (Gini impurity) for BOT/NORMAL flow labels."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import EmptyDataset, Unreadable, Unwritable
from .model import FEATURE_NAMES, FeatureVector

# Splits whose impurity differs by less than this are treated as equal.
GINI_TOL = 1e-12


class Label(str, enum.Enum):
    BOT = "BOT"
    NORMAL = "NORMAL"


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: int
    right: int


@dataclass(frozen=True)
class Leaf:
    label: Label
    counts: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TreeModel:
    nodes: tuple
    max_depth: int
    feature_names: tuple = FEATURE_NAMES

    def depth(self) -> int:
        def walk(i):
            node = self.nodes[i]
            if isinstance(node, Leaf):
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(0)

    def to_dict(self) -> dict:
        nodes = []
        for n in self.nodes:
            if isinstance(n, Split):
                nodes.append({"kind": "split", "feature": n.feature, "threshold": n.threshold,
                              "left": n.left, "right": n.right})
            else:
                nodes.append({"kind": "leaf", "label": n.label.value,
                              "counts": {k: n.counts[k] for k in sorted(n.counts)}})
        return {"feature_names": list(self.feature_names), "max_depth": self.max_depth, "nodes": nodes}

    @classmethod
    def from_dict(cls, d: dict) -> "TreeModel":
        nodes = []
        for n in d["nodes"]:
            if n["kind"] == "split":
                nodes.append(Split(int(n["feature"]), float(n["threshold"]), int(n["left"]), int(n["right"])))
            elif n["kind"] == "leaf":
                nodes.append(Leaf(Label(n["label"]), {k: int(v) for k, v in n["counts"].items()}))
            else:
                raise ValueError(f"unknown node kind {n['kind']!r}")
        model = cls(tuple(nodes), int(d["max_depth"]), tuple(d["feature_names"]))
        _validate(model)
        return model


def _validate(model: TreeModel) -> None:
    if not model.nodes:
        raise ValueError("tree has no nodes")
    seen = set()
    stack = [0]
    while stack:
        i = stack.pop()
        if i in seen:
            raise ValueError("tree is not acyclic")
        seen.add(i)
        node = model.nodes[i]
        if isinstance(node, Split):
            for child in (node.left, node.right):
                if not 0 <= child < len(model.nodes):
                    raise ValueError(f"dangling child index {child}")
                stack.append(child)
    if model.depth() > model.max_depth:
        raise ValueError("tree deeper than max_depth")


def gini(n_bot: int, n_total: int) -> float:
    if n_total == 0:
        return 0.0
    p = n_bot / n_total
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def best_split(X: np.ndarray, y: np.ndarray, min_leaf: int = 1):
    """Lowest weighted-Gini split as ``(impurity, feature, threshold)`` or ``None``.

    ``y`` holds 1 for BOT and 0 for NORMAL. Candidate thresholds are midpoints
    between consecutive distinct values. Ties go to the lower feature index,
    then the lower threshold.
    """
    n = len(y)
    best = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        bots_left = np.cumsum(y[order])
        total_bots = int(bots_left[-1])
        for i in range(n - 1):
            if xs[i] == xs[i + 1]:
                continue
            n_left = i + 1
            n_right = n - n_left
            if n_left < min_leaf or n_right < min_leaf:
                continue
            b_left = int(bots_left[i])
            score = (n_left * gini(b_left, n_left) + n_right * gini(total_bots - b_left, n_right)) / n
            if best is None or score < best[0] - GINI_TOL:
                best = (score, f, float((xs[i] + xs[i + 1]) / 2.0))
    return best


def _leaf(y: np.ndarray) -> Leaf:
    n_bot = int(y.sum())
    n_normal = len(y) - n_bot
    label = Label.BOT if n_bot > n_normal else Label.NORMAL
    return Leaf(label, {"BOT": n_bot, "NORMAL": n_normal})


def _as_xy(dataset) -> tuple:
    X = np.array([fv.as_array() if isinstance(fv, FeatureVector) else np.asarray(fv, dtype=float)
                  for fv, _ in dataset], dtype=float)
    y = np.array([1 if Label(label) is Label.BOT else 0 for _, label in dataset], dtype=np.int64)
    return X, y


def train_tree(dataset: Sequence, max_depth: int = 6, min_leaf: int = 1,
               feature_names: Sequence[str] = FEATURE_NAMES) -> TreeModel:
    """Greedy top-down training on ``[(features, label), ...]``."""
    if not dataset:
        raise EmptyDataset("cannot train a tree on an empty dataset")
    if max_depth < 0 or min_leaf < 1:
        raise ValueError("need max_depth >= 0 and min_leaf >= 1")
    X, y = _as_xy(dataset)
    nodes: list = []

    def grow(idx: np.ndarray, depth: int) -> int:
        slot = len(nodes)
        nodes.append(None)
        ys = y[idx]
        n_bot = int(ys.sum())
        pure = n_bot in (0, len(ys))
        split = None
        if not pure and depth < max_depth and len(ys) >= 2 * min_leaf:
            split = best_split(X[idx], ys, min_leaf)
        if split is None:
            nodes[slot] = _leaf(ys)
            return slot
        _, f, thr = split
        go_left = X[idx, f] <= thr
        left = grow(idx[go_left], depth + 1)
        right = grow(idx[~go_left], depth + 1)
        nodes[slot] = Split(f, thr, left, right)
        return slot

    grow(np.arange(len(y)), 0)
    return TreeModel(tuple(nodes), max_depth, tuple(feature_names))


def predict(model: TreeModel, fv: Union[FeatureVector, Sequence[float]]) -> Label:
    x = fv.as_array() if isinstance(fv, FeatureVector) else np.asarray(fv, dtype=float)
    node = model.nodes[0]
    while isinstance(node, Split):
        node = model.nodes[node.left if x[node.feature] <= node.threshold else node.right]
    return node.label


def accuracy(model: TreeModel, dataset: Sequence) -> float:
    if not dataset:
        return float("nan")
    hits = sum(predict(model, fv) is Label(label) for fv, label in dataset)
    return hits / len(dataset)


def save_model(model: TreeModel, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(model.to_dict(), fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise Unwritable(f"cannot write tree model {path}: {exc}") from exc


def load_model(path) -> TreeModel:
    try:
        with open(path, encoding="utf-8") as fh:
            return TreeModel.from_dict(json.load(fh))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise Unreadable(f"cannot read tree model {path}: {exc}") from exc
