"""Per-host activity logging, packet marking and DNS query extraction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import Unreadable, Unwritable
from .model import Trace, Transport, int_to_ip, ip_to_int
from .signatures import Signature, matched_patterns

DNS_PORT = 53


@dataclass(frozen=True)
class HostActivity:
    ip: int
    packets_sent: int = 0
    packets_received: int = 0
    bytes_sent: int = 0
    bytes_received: int = 0
    first_seen: float = 0.0
    last_seen: float = 0.0

    def to_dict(self) -> dict:
        return {
            "ip": int_to_ip(self.ip),
            "packets_sent": self.packets_sent,
            "packets_received": self.packets_received,
            "bytes_sent": self.bytes_sent,
            "bytes_received": self.bytes_received,
            "first_seen": self.first_seen,
            "last_seen": self.last_seen,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HostActivity":
        return cls(ip=ip_to_int(d["ip"]), **{k: d[k] for k in list(d) if k != "ip"})


@dataclass(frozen=True)
class Marking:
    packet_index: int
    ip: int
    signature_name: str
    matched_pattern: bytes

    def to_dict(self) -> dict:
        return {
            "packet_index": self.packet_index,
            "ip": int_to_ip(self.ip),
            "signature_name": self.signature_name,
            "matched_pattern": self.matched_pattern.hex(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Marking":
        return cls(d["packet_index"], ip_to_int(d["ip"]), d["signature_name"], bytes.fromhex(d["matched_pattern"]))


@dataclass(frozen=True)
class DnsQuery:
    ts: float
    client: int
    name: str


@dataclass(frozen=True)
class ScanLog:
    hosts: dict = field(default_factory=dict)
    dns_queries: tuple = ()
    markings: tuple = ()
    suspicious_ips: tuple = ()

    def to_dict(self) -> dict:
        return {
            "hosts": [self.hosts[ip].to_dict() for ip in sorted(self.hosts)],
            "dns_queries": [{"ts": q.ts, "client": int_to_ip(q.client), "name": q.name} for q in self.dns_queries],
            "markings": [m.to_dict() for m in self.markings],
            "suspicious_ips": [int_to_ip(ip) for ip in self.suspicious_ips],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScanLog":
        hosts = {}
        for h in d["hosts"]:
            activity = HostActivity.from_dict(h)
            hosts[activity.ip] = activity
        return cls(
            hosts=hosts,
            dns_queries=tuple(DnsQuery(q["ts"], ip_to_int(q["client"]), q["name"]) for q in d["dns_queries"]),
            markings=tuple(Marking.from_dict(m) for m in d["markings"]),
            suspicious_ips=tuple(ip_to_int(ip) for ip in d["suspicious_ips"]),
        )


def parse_dns_query(payload: bytes) -> Optional[str]:
    """QNAME of the first question in a standard DNS query, else ``None``."""
    if len(payload) < 12:
        return None
    flags = payload[2]
    if flags & 0x80 or (flags >> 3) & 0x0F:  # response, or opcode other than QUERY
        return None
    qdcount = int.from_bytes(payload[4:6], "big")
    if qdcount < 1:
        return None
    labels = []
    pos = 12
    while True:
        if pos >= len(payload):
            return None
        length = payload[pos]
        if length & 0xC0:
            return None
        pos += 1
        if length == 0:
            break
        label = payload[pos : pos + length]
        if len(label) < length:
            return None
        try:
            labels.append(label.decode("ascii"))
        except UnicodeDecodeError:
            return None
        pos += length
    if not labels or len(payload) < pos + 4:  # QTYPE + QCLASS
        return None
    return ".".join(labels)


def scan(trace: Trace, signatures: Iterable[Signature]) -> ScanLog:
    """One passive pass over the trace.

    A packet is marked once per signature that has at least one pattern in
    its payload (transport/port hints permitting). ``min_matches`` is a
    flow-level threshold and is applied by the classifier, not here.
    """
    sigs = sorted(signatures, key=lambda s: s.name)
    counters: dict = {}
    dns = []
    markings = []
    suspicious: dict = {}

    def bump(ip, ts, sent, nbytes):
        c = counters.get(ip)
        if c is None:
            c = counters[ip] = [0, 0, 0, 0, ts, ts]
        if sent:
            c[0] += 1
            c[2] += nbytes
        else:
            c[1] += 1
            c[3] += nbytes
        c[4] = min(c[4], ts)
        c[5] = max(c[5], ts)

    for idx, pkt in enumerate(trace.packets):
        bump(pkt.src.ip, pkt.ts, True, pkt.wire_len)
        bump(pkt.dst.ip, pkt.ts, False, pkt.wire_len)

        if pkt.transport is Transport.UDP and pkt.dst.port == DNS_PORT:
            name = parse_dns_query(pkt.payload)
            if name is not None:
                dns.append(DnsQuery(pkt.ts, pkt.src.ip, name))

        if not pkt.payload:
            continue
        ports = (pkt.src.port, pkt.dst.port)
        for sig in sigs:
            if not sig.hints_match(pkt.transport, ports):
                continue
            hits = matched_patterns(sig, pkt.payload)
            if hits:
                markings.append(Marking(idx, pkt.src.ip, sig.name, hits[0]))
                suspicious.setdefault(pkt.src.ip, None)

    hosts = {ip: HostActivity(ip, *c) for ip, c in sorted(counters.items())}
    return ScanLog(hosts, tuple(dns), tuple(markings), tuple(suspicious))


def log_to_json(log: ScanLog) -> str:
    return json.dumps(log.to_dict(), indent=2) + "\n"


def write_log(log: ScanLog, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(log_to_json(log))
    except OSError as exc:
        raise Unwritable(f"cannot write scan log {path}: {exc}") from exc


def read_log(path) -> ScanLog:
    try:
        with open(path, encoding="utf-8") as fh:
            return ScanLog.from_dict(json.load(fh))
    except (OSError, ValueError, KeyError) as exc:
        raise Unreadable(f"cannot read scan log {path}: {exc}") from exc
