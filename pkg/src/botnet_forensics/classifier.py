"""Flow classification: signature hits, IRC/HTTP separation, chat-like test, tree label."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional

from .model import FeatureVector, FlowSummary, compute_features
from .signatures import Signature, matched_patterns, signature_family
from .tree import Label, TreeModel, predict

IRC_PORTS = frozenset({6667, 6668, 6669, 7000})
HTTP_PORTS = frozenset({80, 8080})


class Protocol(str, enum.Enum):
    IRC = "IRC"
    HTTP = "HTTP"
    OTHER = "OTHER"


@dataclass(frozen=True)
class ChatThresholds:
    max_chat_pkt_size: float = 300.0
    min_chat_duration: float = 60.0
    max_chat_bandwidth: float = 1000.0

    def validate(self) -> None:
        if min(self.max_chat_pkt_size, self.min_chat_duration, self.max_chat_bandwidth) < 0:
            raise ValueError("chat thresholds must be non-negative")


@dataclass(frozen=True)
class SignatureHit:
    name: str
    count: int


@dataclass(frozen=True)
class FlowClass:
    flow_id: int
    protocol: Protocol
    chat_like: bool
    signature_hits: tuple = ()
    tree_label: Optional[Label] = None


def match_signatures(flow: FlowSummary, signatures: Iterable[Signature]) -> list:
    hits = []
    for sig in sorted(signatures, key=lambda s: s.name):
        if not sig.hints_match(flow.transport, flow.ports()):
            continue
        count = len(matched_patterns(sig, flow.payload_sample))
        if count >= sig.min_matches:
            hits.append(SignatureHit(sig.name, count))
    return hits


def classify_protocol(flow: FlowSummary, hits: Iterable[SignatureHit]) -> Protocol:
    # payload evidence first (irc outranks http), then well-known ports
    families = {signature_family(h.name) for h in hits}
    if "irc" in families:
        return Protocol.IRC
    if "http" in families:
        return Protocol.HTTP
    ports = set(flow.ports())
    if ports & IRC_PORTS:
        return Protocol.IRC
    if ports & HTTP_PORTS:
        return Protocol.HTTP
    return Protocol.OTHER


def is_chat_like(fv: FeatureVector, thresholds: ChatThresholds = ChatThresholds()) -> bool:
    return (
        fv.mean_pkt_size <= thresholds.max_chat_pkt_size
        and fv.duration_s >= thresholds.min_chat_duration
        and fv.bandwidth_bps <= thresholds.max_chat_bandwidth
    )


def classify_flow(
    flow: FlowSummary,
    signatures: Iterable[Signature],
    model: Optional[TreeModel] = None,
    thresholds: ChatThresholds = ChatThresholds(),
) -> FlowClass:
    hits = match_signatures(flow, signatures)
    fv = compute_features(flow)
    return FlowClass(
        flow_id=flow.id,
        protocol=classify_protocol(flow, hits),
        chat_like=is_chat_like(fv, thresholds),
        signature_hits=tuple(hits),
        tree_label=predict(model, fv) if model is not None else None,
    )
