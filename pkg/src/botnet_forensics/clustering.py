"""Grouping of similar flows: correlation-graph components or k-means."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import KTooLarge
from .model import FeatureVector


class ClusterMethod(str, enum.Enum):
    GRAPH = "GRAPH"
    KMEANS = "KMEANS"


@dataclass(frozen=True)
class Cluster:
    id: int
    members: tuple
    method: ClusterMethod

    def to_dict(self) -> dict:
        return {"id": self.id, "members": list(self.members), "method": self.method.value}


def graph_clusters(flow_ids: Iterable[int], correlations: Iterable, threshold: float = 0.6,
                   min_cluster_size: int = 2) -> list:
    """Connected components of the graph joining pairs with ``combined >= threshold``."""
    parent = {i: i for i in flow_ids}

    def find(i):
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    for rec in correlations:
        if rec.combined >= threshold:
            ra, rb = find(rec.flow_i), find(rec.flow_j)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    groups: dict = {}
    for i in parent:
        groups.setdefault(find(i), []).append(i)
    comps = sorted((sorted(g) for g in groups.values() if len(g) >= min_cluster_size), key=lambda g: g[0])
    return [Cluster(n, tuple(g), ClusterMethod.GRAPH) for n, g in enumerate(comps)]


def standardize(features: Sequence) -> np.ndarray:
    """Column-wise z-scores; constant columns become 0."""
    if len(features) == 0:
        raise ValueError("standardize needs at least one vector")
    X = np.array([f.as_array() if isinstance(f, FeatureVector) else np.asarray(f, dtype=float) for f in features],
                 dtype=float)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    out = np.zeros_like(X)
    varying = std > 0
    out[:, varying] = (X[:, varying] - mean[varying]) / std[varying]
    return out


@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    n_iter: int
    converged: bool


def _assign(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d, axis=1)  # first minimum wins ties


def kmeans_fit(X, k: int, seed: int = 0, max_iters: int = 100) -> KMeansResult:
    """Lloyd's algorithm from seeded distinct starting points."""
    X = np.asarray(X, dtype=float)
    n = len(X)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise KTooLarge(f"k={k} exceeds the number of points ({n})")
    rng = np.random.default_rng(seed)
    centroids = X[rng.choice(n, size=k, replace=False)].copy()
    labels = _assign(X, centroids)
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iters + 1):
        before = labels.copy()
        taken = set()
        for c in range(k):
            members = labels == c
            if members.any():
                centroids[c] = X[members].mean(axis=0)
            else:
                # reseed from the point worst served by its current centroid
                dist = ((X - centroids[labels]) ** 2).sum(axis=1)
                for idx in np.argsort(-dist, kind="stable"):
                    if idx not in taken:
                        break
                taken.add(int(idx))
                centroids[c] = X[idx]
                labels[idx] = c
        new_labels = _assign(X, centroids)
        # a reseed that ties back into its old cluster leaves the assignment stable
        if np.array_equal(new_labels, labels) or np.array_equal(new_labels, before):
            labels = new_labels
            converged = True
            break
        labels = new_labels
    return KMeansResult(labels, centroids, n_iter, converged)


def kmeans(features: Sequence, k: int, seed: int = 0, max_iters: int = 100,
           ids: Optional[Sequence[int]] = None) -> list:
    """Cluster ``features`` into at most ``k`` groups; members are ``ids`` (default: positions)."""
    X = np.array([f.as_array() if isinstance(f, FeatureVector) else np.asarray(f, dtype=float) for f in features],
                 dtype=float)
    if ids is None:
        ids = range(len(X))
    ids = list(ids)
    result = kmeans_fit(X, k, seed, max_iters)
    groups = [sorted(ids[i] for i in np.flatnonzero(result.labels == c)) for c in range(k)]
    groups = sorted((g for g in groups if g), key=lambda g: g[0])
    return [Cluster(n, tuple(g), ClusterMethod.KMEANS) for n, g in enumerate(groups)]
