"""End-to-end detection: ingest, scan, filter, classify, correlate, cluster, analyze."""

from __future__ import annotations

import dataclasses
import json
import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .classifier import ChatThresholds, FlowClass, classify_flow
from .clustering import ClusterMethod, graph_clusters, kmeans, standardize
from .correlator import DEFAULT_SIZE_EDGES, CorrelationConfig, correlate_all
from .errors import InvalidConfig, StageError, Unwritable
from .flowfilter import assemble_flows, incomplete_comm_filter, quick_data_reduction
from .ingest import read_trace
from .model import FeatureVector, FlowSummary, Trace, compute_features
from .scanner import ScanLog, log_to_json, scan
from .signatures import default_signatures, load_signatures, sensor_signatures
from .topology import DetectionReport, StageCounts, analyze_cluster, build_report
from .tree import Label, TreeModel, load_model

FORMATS = ("auto", "pcap", "jsonl")


@dataclass(frozen=True)
class RunConfig:
    input: Optional[str] = None
    format: str = "auto"
    signatures: Optional[str] = None
    tree_model: Optional[str] = None
    idle_timeout: float = 300.0
    max_chat_pkt_size: float = 300.0
    min_chat_duration: float = 60.0
    max_chat_bandwidth: float = 1000.0
    bin_width: float = 1.0
    w_temporal: float = 0.5
    w_size: float = 0.5
    min_overlap_bins: int = 5
    size_edges: tuple = DEFAULT_SIZE_EDGES
    threshold: float = 0.6
    max_flows: int = 5000
    cluster_method: str = "GRAPH"
    k: int = 2
    max_iters: int = 100
    min_cluster_size: int = 2
    min_fanout: int = 3
    seed: int = 0
    out: Optional[str] = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "size_edges" in d:
            d["size_edges"] = tuple(float(e) for e in d["size_edges"])
        return cls(**d)

    def merged(self, **overrides) -> "RunConfig":
        """Copy with every non-None override applied."""
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @property
    def chat(self) -> ChatThresholds:
        return ChatThresholds(self.max_chat_pkt_size, self.min_chat_duration, self.max_chat_bandwidth)

    @property
    def correlation(self) -> CorrelationConfig:
        return CorrelationConfig(self.bin_width, self.w_temporal, self.w_size, self.min_overlap_bins,
                                 tuple(self.size_edges), self.max_flows)

    def validate(self) -> None:
        try:
            if self.format not in FORMATS:
                raise ValueError(f"format must be one of {FORMATS}")
            if not self.idle_timeout > 0:
                raise ValueError("idle_timeout must be > 0")
            self.chat.validate()
            self.correlation.validate()
            if not 0 <= self.threshold <= 1:
                raise ValueError("threshold must be in [0, 1]")
            if self.cluster_method.upper() not in ClusterMethod.__members__:
                raise ValueError("cluster_method must be GRAPH or KMEANS")
            if self.k < 1 or self.max_iters < 1 or self.min_cluster_size < 1:
                raise ValueError("k, max_iters and min_cluster_size must be >= 1")
            if self.min_fanout < 1:
                raise ValueError("min_fanout must be >= 1")
        except (ValueError, TypeError) as exc:
            raise InvalidConfig(str(exc)) from exc

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("out")
        d["size_edges"] = list(self.size_edges)
        return d


@dataclass
class DetectionResult:
    report: DetectionReport
    scanlog: ScanLog
    flows: list
    classes: dict
    candidates: list
    correlations: list
    clusters: list = field(default_factory=list)


@contextmanager
def stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def detect(trace: Trace, config: RunConfig = RunConfig(), signatures: Optional[Sequence] = None,
           model: Optional[TreeModel] = None) -> DetectionResult:
    """Run every stage after ingest on an in-memory trace."""
    sigs = tuple(signatures) if signatures is not None else default_signatures()
    with stage("scan"):
        scanlog = scan(trace, sensor_signatures(sigs))
    with stage("filter"):
        flows = assemble_flows(trace, config.idle_timeout)
        tcp = quick_data_reduction(flows)
        complete = incomplete_comm_filter(tcp)
    with stage("classify"):
        classes = {f.id: classify_flow(f, sigs, model, config.chat) for f in complete}
        candidates = [f for f in complete if classes[f.id].chat_like
                      and classes[f.id].tree_label in (None, Label.BOT)]
    with stage("correlate"):
        correlations = correlate_all(candidates, config.correlation)
    with stage("cluster"):
        if config.cluster_method.upper() == ClusterMethod.KMEANS.value and candidates:
            feats = standardize([compute_features(f) for f in candidates])
            clusters = kmeans(feats, min(config.k, len(candidates)), config.seed, config.max_iters,
                              ids=[f.id for f in candidates])
        else:
            clusters = graph_clusters([f.id for f in candidates], correlations, config.threshold,
                                      config.min_cluster_size)
    with stage("analyze"):
        by_id = {f.id: f for f in flows}
        verdicts = [v for c in clusters
                    if (v := analyze_cluster(c, by_id, classes, config.min_fanout)) is not None]
        counts = StageCounts(
            packets_ingested=len(trace),
            flows_assembled=len(flows),
            flows_tcp=len(tcp),
            flows_complete=len(complete),
            flows_chat_like=len(candidates),
            pairs_scored=len(correlations),
            clusters=len(clusters),
        )
        report = build_report(verdicts, scanlog, counts, config.echo(), config.seed)
    return DetectionResult(report, scanlog, flows, classes, candidates, correlations, clusters)


def load_inputs(config: RunConfig) -> tuple:
    """Read trace, signatures and optional tree model named by ``config``."""
    with stage("ingest"):
        if config.input is None:
            raise InvalidConfig("no input trace given")
        trace, _ = read_trace(config.input, config.format)
    with stage("signatures"):
        sigs = load_signatures(config.signatures) if config.signatures else default_signatures()
    with stage("tree-model"):
        model = load_model(config.tree_model) if config.tree_model else None
    return trace, sigs, model


def clusters_document(result: DetectionResult) -> dict:
    by_id = {f.id: f for f in result.flows}

    def flow_entry(fid):
        f: FlowSummary = by_id[fid]
        fc: FlowClass = result.classes[fid]
        return {
            "id": fid,
            "initiator": str(f.initiator),
            "responder": str(f.responder),
            "transport": f.transport.value,
            "start_ts": f.start_ts,
            "end_ts": f.end_ts,
            "pkt_count": f.pkt_count,
            "protocol": fc.protocol.value,
            "chat_like": fc.chat_like,
            "signature_hits": [{"name": h.name, "count": h.count} for h in fc.signature_hits],
            "tree_label": fc.tree_label.value if fc.tree_label else None,
        }

    return {"clusters": [dict(c.to_dict(), flows=[flow_entry(fid) for fid in c.members])
                         for c in result.clusters]}


def write_outputs(result: DetectionResult, out_dir) -> None:
    files = {
        "report.json": result.report.to_json(),
        "report.txt": result.report.render_text(),
        "scanlog.json": log_to_json(result.scanlog),
        "clusters.json": json.dumps(clusters_document(result), indent=2) + "\n",
    }
    try:
        os.makedirs(out_dir, exist_ok=True)
        for name, text in files.items():
            with open(os.path.join(out_dir, name), "w", encoding="utf-8") as fh:
                fh.write(text)
    except OSError as exc:
        raise StageError("output", Unwritable(f"cannot write results to {out_dir}: {exc}")) from exc


def labeled_flows(trace: Trace, truth, idle_timeout: float = 300.0) -> list:
    """``(FeatureVector, label)`` pairs for the complete TCP flows of a synthetic trace."""
    flows = incomplete_comm_filter(quick_data_reduction(assemble_flows(trace, idle_timeout)))
    return [(compute_features(f), Label.BOT if f.key in truth.c2_flow_keys else Label.NORMAL) for f in flows]


def write_dataset(rows: Sequence, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for fv, label in rows:
                fh.write(json.dumps({"features": fv.to_dict(), "label": Label(label).value}) + "\n")
    except OSError as exc:
        raise Unwritable(f"cannot write dataset {path}: {exc}") from exc


def read_dataset(path) -> list:
    """Strict reader for labeled feature JSONL; any bad line raises ``ValueError``."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                rows.append((FeatureVector.from_dict(obj["features"]), Label(obj["label"])))
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed dataset line ({exc})") from exc
    return rows
