"""Communication graphs per cluster, controller identification and the final report."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .clustering import Cluster
from .errors import UnknownFlowId
from .model import FlowSummary, int_to_ip
from .scanner import ScanLog

UNKNOWN_BOT = "unknown"


@dataclass(frozen=True)
class CommGraph:
    nodes: frozenset
    edges: dict  # (initiator ip, responder ip) -> number of flows

    def peers(self, ip: int) -> set:
        out = set()
        for (a, b) in self.edges:
            if a == ip and b != ip:
                out.add(b)
            elif b == ip and a != ip:
                out.add(a)
        return out


@dataclass(frozen=True)
class ControllerVerdict:
    ip: int
    fan_out: int
    cluster_id: int
    bot_name: str
    evidence_flow_ids: tuple

    def to_dict(self) -> dict:
        return {
            "ip": int_to_ip(self.ip),
            "fan_out": self.fan_out,
            "cluster_id": self.cluster_id,
            "bot_name": self.bot_name,
            "evidence_flow_ids": list(self.evidence_flow_ids),
        }


def build_comm_graph(cluster: Cluster, flows: Mapping[int, FlowSummary]) -> CommGraph:
    nodes = set()
    edges: Counter = Counter()
    for fid in cluster.members:
        flow = flows.get(fid)
        if flow is None:
            raise UnknownFlowId(f"cluster {cluster.id} references unknown flow {fid}")
        src, dst = flow.initiator.ip, flow.responder.ip
        nodes.update((src, dst))
        edges[(src, dst)] += 1
    return CommGraph(frozenset(nodes), dict(edges))


def identify_controller(graph: CommGraph, min_fanout: int = 3) -> Optional[tuple]:
    """Host with the most distinct peers, as ``(ip, fan_out)``; smaller ip wins ties."""
    peers: dict = {ip: set() for ip in graph.nodes}
    for (a, b) in graph.edges:
        if a != b:
            peers[a].add(b)
            peers[b].add(a)
    if not peers:
        return None
    ip, fan_out = min(((ip, len(p)) for ip, p in peers.items()), key=lambda t: (-t[1], t[0]))
    if fan_out < min_fanout:
        return None
    return ip, fan_out


def assign_bot_name(evidence_flows: Iterable) -> str:
    """Most frequent signature name over the evidence flows' hits (ties: alphabetical)."""
    tally = Counter(hit.name for fc in evidence_flows for hit in fc.signature_hits)
    if not tally:
        return UNKNOWN_BOT
    return min(tally.items(), key=lambda kv: (-kv[1], kv[0]))[0]


@dataclass(frozen=True)
class StageCounts:
    packets_ingested: int = 0
    flows_assembled: int = 0
    flows_tcp: int = 0
    flows_complete: int = 0
    flows_chat_like: int = 0
    pairs_scored: int = 0
    clusters: int = 0

    def to_dict(self) -> dict:
        return {
            "packets_ingested": self.packets_ingested,
            "flows_assembled": self.flows_assembled,
            "flows_tcp": self.flows_tcp,
            "flows_complete": self.flows_complete,
            "flows_chat_like": self.flows_chat_like,
            "pairs_scored": self.pairs_scored,
            "clusters": self.clusters,
        }


@dataclass(frozen=True)
class DetectionReport:
    controllers: tuple
    suspicious_ips: tuple
    counts: StageCounts
    config_echo: dict = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "controllers": [v.to_dict() for v in self.controllers],
            "suspicious_ips": [int_to_ip(ip) for ip in self.suspicious_ips],
            "counts": self.counts.to_dict(),
            "config_echo": self.config_echo,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def render_text(self) -> str:
        lines = ["Botnet detection report", "======================="]
        if self.controllers:
            lines.append(f"Suspected controllers: {len(self.controllers)}")
            for v in self.controllers:
                lines.append(f"  {int_to_ip(v.ip):<15}  bot={v.bot_name}  fan_out={v.fan_out}  "
                             f"cluster={v.cluster_id}  flows={len(v.evidence_flow_ids)}")
        else:
            lines.append("No botnet controller identified.")
        lines.append("")
        lines.append(f"Suspicious IPs marked by sensors: {len(self.suspicious_ips)}")
        for ip in self.suspicious_ips:
            lines.append(f"  {int_to_ip(ip)}")
        lines.append("")
        lines.append("Stage counts:")
        for name, value in self.counts.to_dict().items():
            lines.append(f"  {name:<18} {value}")
        lines.append(f"Seed: {self.seed}")
        return "\n".join(lines) + "\n"


def build_report(verdicts: Sequence[ControllerVerdict], scanlog: ScanLog, stage_counts: StageCounts,
                 config_echo: Optional[dict] = None, seed: int = 0) -> DetectionReport:
    ordered = sorted(verdicts, key=lambda v: (-v.fan_out, v.ip, v.cluster_id))
    return DetectionReport(tuple(ordered), tuple(scanlog.suspicious_ips), stage_counts,
                           dict(config_echo or {}), seed)


def analyze_cluster(cluster: Cluster, flows: Mapping[int, FlowSummary], classes: Mapping[int, object],
                    min_fanout: int = 3) -> Optional[ControllerVerdict]:
    """Run the graph/controller/bot-name chain for one cluster."""
    graph = build_comm_graph(cluster, flows)
    found = identify_controller(graph, min_fanout)
    if found is None:
        return None
    ip, fan_out = found
    evidence = tuple(fid for fid in cluster.members
                     if ip in (flows[fid].key.a.ip, flows[fid].key.b.ip))
    name = assign_bot_name(classes[fid] for fid in evidence if fid in classes)
    return ControllerVerdict(ip, fan_out, cluster.id, name, evidence)
