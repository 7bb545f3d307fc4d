"""Shared domain types: packets, traces, flow summaries and flow features."""

from __future__ import annotations

import enum
import ipaddress
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

PAYLOAD_SAMPLE_CAP = 2048
MIN_DURATION = 1e-6


class Transport(str, enum.Enum):
    TCP = "TCP"
    UDP = "UDP"
    OTHER = "OTHER"


class SourceKind(str, enum.Enum):
    NETWORK_TRAFFIC = "NetworkTrafficInformation"
    SYSTEM_PROCESS = "SystemProcessInformation"
    FILE_SYSTEM = "FileSystemInformation"


class Handshake(str, enum.Enum):
    NONE = "NONE"
    SYN_ONLY = "SYN_ONLY"
    SYN_RST = "SYN_RST"
    ESTABLISHED = "ESTABLISHED"


TCP_FLAGS = ("FIN", "SYN", "RST", "PSH", "ACK", "URG")
TCP_FLAG_BITS = {"FIN": 0x01, "SYN": 0x02, "RST": 0x04, "PSH": 0x08, "ACK": 0x10, "URG": 0x20}


def ip_to_int(text: str) -> int:
    return int(ipaddress.IPv4Address(text))


def int_to_ip(value: int) -> str:
    return str(ipaddress.IPv4Address(value))


@dataclass(frozen=True, order=True)
class Endpoint:
    ip: int
    port: int

    def __post_init__(self):
        if not 0 <= self.ip <= 0xFFFFFFFF:
            raise ValueError(f"ip out of range: {self.ip}")
        if not 0 <= self.port <= 0xFFFF:
            raise ValueError(f"port out of range: {self.port}")

    @classmethod
    def parse(cls, text: str) -> "Endpoint":
        """Parse an ``"a.b.c.d:port"`` string."""
        host, sep, port = text.rpartition(":")
        if not sep:
            raise ValueError(f"endpoint needs ip:port, got {text!r}")
        return cls(ip_to_int(host), int(port))

    @property
    def ip_str(self) -> str:
        return int_to_ip(self.ip)

    def __str__(self) -> str:
        return f"{self.ip_str}:{self.port}"


@dataclass(frozen=True)
class PacketRecord:
    ts: float
    src: Endpoint
    dst: Endpoint
    transport: Transport
    tcp_flags: frozenset = frozenset()
    payload: bytes = b""
    wire_len: int = 0

    def __post_init__(self):
        object.__setattr__(self, "transport", Transport(self.transport))
        object.__setattr__(self, "tcp_flags", frozenset(self.tcp_flags))
        object.__setattr__(self, "payload", bytes(self.payload))
        if not self.ts >= 0:
            raise ValueError(f"negative or NaN timestamp: {self.ts}")
        if self.transport is not Transport.TCP and self.tcp_flags:
            raise ValueError("tcp_flags must be empty for non-TCP packets")
        unknown = self.tcp_flags - set(TCP_FLAGS)
        if unknown:
            raise ValueError(f"unknown TCP flags: {sorted(unknown)}")
        if self.wire_len < len(self.payload):
            raise ValueError("wire_len shorter than payload")


@dataclass(frozen=True)
class Trace:
    packets: tuple
    source_kind: SourceKind = SourceKind.NETWORK_TRAFFIC

    def __len__(self) -> int:
        return len(self.packets)

    def __iter__(self):
        return iter(self.packets)


@dataclass(frozen=True, order=True)
class FlowKey:
    a: Endpoint
    b: Endpoint
    transport: Transport

    @classmethod
    def of(cls, src: Endpoint, dst: Endpoint, transport: Transport) -> "FlowKey":
        """Canonical key: the smaller (ip, port) endpoint goes first."""
        if (src.ip, src.port) <= (dst.ip, dst.port):
            return cls(src, dst, Transport(transport))
        return cls(dst, src, Transport(transport))

    @classmethod
    def of_packet(cls, pkt: PacketRecord) -> "FlowKey":
        return cls.of(pkt.src, pkt.dst, pkt.transport)

    def to_dict(self) -> dict:
        return {"a": str(self.a), "b": str(self.b), "transport": self.transport.value}

    @classmethod
    def from_dict(cls, d: dict) -> "FlowKey":
        return cls.of(Endpoint.parse(d["a"]), Endpoint.parse(d["b"]), Transport(d["transport"]))


@dataclass(frozen=True)
class FlowSummary:
    id: int
    key: FlowKey
    initiator: Endpoint
    start_ts: float
    end_ts: float
    duration: float
    pkt_count: int
    byte_count: int
    payload_bytes: int
    mean_pkt_size: float
    std_pkt_size: float
    mean_iat: float
    std_iat: float
    bandwidth: float
    handshake: Handshake
    bidirectional: bool
    payload_sample: bytes
    packet_times: tuple
    packet_sizes: tuple

    @property
    def responder(self) -> Endpoint:
        return self.key.b if self.initiator == self.key.a else self.key.a

    @property
    def transport(self) -> Transport:
        return self.key.transport

    def ports(self) -> tuple:
        return (self.key.a.port, self.key.b.port)


def handshake_state(packets: Sequence[PacketRecord]) -> Handshake:
    """Run the TCP opening state machine over a flow's packets."""
    state = Handshake.NONE
    client = None
    synack = False
    for p in packets:
        flags = p.tcp_flags
        if state in (Handshake.ESTABLISHED, Handshake.SYN_RST):
            break
        if "SYN" in flags and "ACK" not in flags:
            if state is Handshake.NONE:
                state = Handshake.SYN_ONLY
                client = p.src
        elif state is Handshake.SYN_ONLY:
            if "RST" in flags:
                state = Handshake.SYN_RST
            elif "SYN" in flags and "ACK" in flags and p.src != client:
                synack = True
            elif synack and "ACK" in flags and p.src == client:
                state = Handshake.ESTABLISHED
    return state


def summarize_flow(flow_id: int, packets: Sequence[PacketRecord]) -> FlowSummary:
    """Aggregate the packets of one conversation (already in arrival order)."""
    if not packets:
        raise ValueError("a flow needs at least one packet")
    first = packets[0]
    key = FlowKey.of_packet(first)
    times = np.array([p.ts for p in packets], dtype=float)
    sizes = np.array([p.wire_len for p in packets], dtype=float)
    start, end = float(times[0]), float(times[-1])
    duration = end - start
    byte_count = sum(p.wire_len for p in packets)
    if len(packets) > 1:
        gaps = np.diff(times)
        mean_iat, std_iat = float(gaps.mean()), float(gaps.std())
    else:
        mean_iat = std_iat = 0.0

    sample = bytearray()
    for p in packets:
        if len(sample) >= PAYLOAD_SAMPLE_CAP:
            break
        sample += p.payload[: PAYLOAD_SAMPLE_CAP - len(sample)]

    return FlowSummary(
        id=flow_id,
        key=key,
        initiator=first.src,
        start_ts=start,
        end_ts=end,
        duration=duration,
        pkt_count=len(packets),
        byte_count=byte_count,
        payload_bytes=sum(len(p.payload) for p in packets),
        mean_pkt_size=float(sizes.mean()),
        std_pkt_size=float(sizes.std()),
        mean_iat=mean_iat,
        std_iat=std_iat,
        bandwidth=byte_count / max(duration, MIN_DURATION),
        handshake=handshake_state(packets) if key.transport is Transport.TCP else Handshake.NONE,
        bidirectional=any(p.src != first.src for p in packets),
        payload_sample=bytes(sample),
        packet_times=tuple(float(t) for t in times),
        packet_sizes=tuple(p.wire_len for p in packets),
    )


FEATURE_NAMES = (
    "duration_s",
    "bandwidth_bps",
    "mean_pkt_size",
    "std_pkt_size",
    "mean_iat",
    "std_iat",
    "payload_ratio",
    "pkt_count",
)


@dataclass(frozen=True)
class FeatureVector:
    duration_s: float
    bandwidth_bps: float
    mean_pkt_size: float
    std_pkt_size: float
    mean_iat: float
    std_iat: float
    payload_ratio: float
    pkt_count: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=float)

    def to_dict(self) -> dict:
        return {n: getattr(self, n) for n in FEATURE_NAMES}

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureVector":
        return cls(**{n: float(d[n]) for n in FEATURE_NAMES})

    @classmethod
    def from_array(cls, values: Iterable[float]) -> "FeatureVector":
        values = [float(v) for v in values]
        if len(values) != len(FEATURE_NAMES):
            raise ValueError(f"expected {len(FEATURE_NAMES)} features, got {len(values)}")
        return cls(*values)


def compute_features(flow: FlowSummary) -> FeatureVector:
    return FeatureVector(
        duration_s=flow.duration,
        bandwidth_bps=flow.bandwidth,
        mean_pkt_size=flow.mean_pkt_size,
        std_pkt_size=flow.std_pkt_size,
        mean_iat=flow.mean_iat,
        std_iat=flow.std_iat,
        payload_ratio=flow.payload_bytes / max(flow.byte_count, 1),
        pkt_count=float(flow.pkt_count),
    )
