"""Pairwise flow correlation over packet timing and packet-size distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import LengthMismatch, TooManyFlows
from .model import FlowSummary

DEFAULT_SIZE_EDGES = (0.0, 100.0, 200.0, 400.0, 800.0, 1600.0)


@dataclass(frozen=True)
class CorrelationConfig:
    bin_width: float = 1.0
    w_temporal: float = 0.5
    w_size: float = 0.5
    min_overlap_bins: int = 5
    size_edges: tuple = DEFAULT_SIZE_EDGES
    max_flows: int = 5000

    def validate(self) -> None:
        if not self.bin_width > 0:
            raise ValueError("bin_width must be positive")
        if self.w_temporal < 0 or self.w_size < 0 or not math.isclose(self.w_temporal + self.w_size, 1.0):
            raise ValueError("weights must be non-negative and sum to 1")
        if self.min_overlap_bins < 1:
            raise ValueError("min_overlap_bins must be >= 1")
        edges = list(self.size_edges)
        if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError("size_edges must be strictly ascending with >= 2 entries")
        if self.max_flows < 0:
            raise ValueError("max_flows must be non-negative")


@dataclass(frozen=True)
class CorrelationRecord:
    flow_i: int
    flow_j: int
    temporal_score: float
    size_similarity: float
    combined: float


def n_bins(t0: float, t1: float, bin_width: float) -> int:
    return max(0, math.ceil((t1 - t0) / bin_width))


def activity_series(flow: FlowSummary, bin_width: float, t0: float, t1: float) -> np.ndarray:
    """Packet counts per bin over ``[t0, t1)``.

    Bin k holds packets with ``t0 + k*w <= ts < t0 + (k+1)*w``; the index
    estimate from division is corrected against those exact bounds.
    """
    length = n_bins(t0, t1, bin_width)
    counts = np.zeros(length, dtype=float)
    if length == 0:
        return counts
    times = np.asarray(flow.packet_times, dtype=float)
    times = times[(times >= t0) & (times < t1)]
    k = np.floor((times - t0) / bin_width).astype(np.int64)
    k = np.clip(k, 0, length - 1)
    # nudge indices whose float estimate landed one bin off
    too_high = times < t0 + k * bin_width
    k[too_high] -= 1
    too_low = times >= t0 + (k + 1) * bin_width
    k[too_low] += 1
    k = k[(k >= 0) & (k < length)]
    np.add.at(counts, k, 1.0)
    return counts


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson coefficient; 0 when either input has zero variance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 1:
        raise LengthMismatch(f"pearson needs equal non-empty vectors, got {x.shape} and {y.shape}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def size_histogram(flow: FlowSummary, edges: Sequence[float] = DEFAULT_SIZE_EDGES) -> np.ndarray:
    """Fraction of packets per size bucket; the last bucket also takes oversize packets."""
    edges = np.asarray(edges, dtype=float)
    nb = len(edges) - 1
    sizes = np.asarray(flow.packet_sizes, dtype=float)
    idx = np.clip(np.searchsorted(edges, sizes, side="right") - 1, 0, nb - 1)
    hist = np.bincount(idx, minlength=nb).astype(float)
    return hist / max(flow.pkt_count, 1)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = math.sqrt(float(u @ u))
    nv = math.sqrt(float(v @ v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return min(1.0, max(0.0, float(u @ v) / (nu * nv)))


def correlate_pair(f1: FlowSummary, f2: FlowSummary, cfg: CorrelationConfig = CorrelationConfig()) -> CorrelationRecord:
    if f1.id == f2.id:
        raise ValueError("cannot correlate a flow with itself")
    if f2.id < f1.id:
        f1, f2 = f2, f1
    t0 = max(f1.start_ts, f2.start_ts)
    t1 = min(f1.end_ts, f2.end_ts)
    temporal = 0.0
    if t1 > t0 and n_bins(t0, t1, cfg.bin_width) >= cfg.min_overlap_bins:
        temporal = pearson(activity_series(f1, cfg.bin_width, t0, t1), activity_series(f2, cfg.bin_width, t0, t1))
    size_sim = cosine(size_histogram(f1, cfg.size_edges), size_histogram(f2, cfg.size_edges))
    combined = cfg.w_temporal * max(temporal, 0.0) + cfg.w_size * size_sim
    return CorrelationRecord(f1.id, f2.id, temporal, size_sim, min(1.0, max(0.0, combined)))


def correlate_all(flows: Sequence[FlowSummary], cfg: CorrelationConfig = CorrelationConfig()) -> list:
    if len(flows) > cfg.max_flows:
        raise TooManyFlows(f"{len(flows)} flows exceeds the correlation cap of {cfg.max_flows}")
    ordered = sorted(flows, key=lambda f: f.id)
    return [correlate_pair(a, b, cfg) for i, a in enumerate(ordered) for b in ordered[i + 1 :]]
