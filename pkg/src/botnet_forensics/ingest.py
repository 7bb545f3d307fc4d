"""Readers for classic PCAP captures and the JSON-lines packet format."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import BadMagic, TruncatedCapture, Unreadable
from .model import (
    TCP_FLAG_BITS,
    Endpoint,
    PacketRecord,
    SourceKind,
    Trace,
    Transport,
)

PCAP_MAGIC = 0xA1B2C3D4
PCAP_MAGIC_NS = 0xA1B23C4D
GLOBAL_HEADER_LEN = 24
RECORD_HEADER_LEN = 16
LINKTYPE_ETHERNET = 1
ETHERTYPE_IPV4 = 0x0800
ETH_HEADER_LEN = 14
IPPROTO_TCP = 6
IPPROTO_UDP = 17


@dataclass
class IngestStats:
    packets_read: int = 0
    packets_dropped_malformed: int = 0
    packets_dropped_unsupported: int = 0

    @property
    def emitted(self) -> int:
        return self.packets_read - self.packets_dropped_malformed - self.packets_dropped_unsupported


def ts_from_micros(micros: int) -> float:
    """Canonical float timestamp for an integer microsecond count.

    Readers and writers both go through this so timestamps survive a
    PCAP round trip bit-for-bit.
    """
    sec, usec = divmod(int(micros), 1_000_000)
    return sec + usec / 1e6


def ts_to_micros(ts: float) -> int:
    return int(round(ts * 1e6))


def quantize_ts(ts: float) -> float:
    return ts_from_micros(ts_to_micros(ts))


def normalize_trace(packets: Iterable[PacketRecord]) -> Trace:
    # sorted() is stable, so equal timestamps keep their input order
    return Trace(tuple(sorted(packets, key=lambda p: p.ts)), SourceKind.NETWORK_TRAFFIC)


class _Unsupported(Exception):
    pass


class _Malformed(Exception):
    pass


def _decode_frame(ts: float, frame: bytes, wire_len: int) -> PacketRecord:
    if len(frame) < ETH_HEADER_LEN:
        raise _Malformed("short ethernet header")
    (ethertype,) = struct.unpack_from("!H", frame, 12)
    if ethertype != ETHERTYPE_IPV4:
        raise _Unsupported(f"ethertype 0x{ethertype:04x}")
    ip = frame[ETH_HEADER_LEN:]
    if len(ip) < 20:
        raise _Malformed("short IPv4 header")
    version, ihl = ip[0] >> 4, (ip[0] & 0x0F) * 4
    if version != 4:
        raise _Unsupported(f"IP version {version}")
    total_len, frag = struct.unpack_from("!H2xH", ip, 2)
    proto = ip[9]
    if ihl < 20 or len(ip) < ihl or total_len < ihl:
        raise _Malformed("bad IPv4 header length")
    if frag & 0x1FFF:
        raise _Unsupported("non-first IP fragment")
    src_ip, dst_ip = struct.unpack_from("!II", ip, 12)
    # drop link-layer padding past the IP datagram
    body = ip[ihl:total_len]

    if proto == IPPROTO_TCP:
        if len(body) < 20:
            raise _Malformed("short TCP header")
        sport, dport = struct.unpack_from("!HH", body, 0)
        offset = (body[12] >> 4) * 4
        if offset < 20 or len(body) < offset:
            raise _Malformed("bad TCP data offset")
        flags = frozenset(name for name, bit in TCP_FLAG_BITS.items() if body[13] & bit)
        transport, payload = Transport.TCP, body[offset:]
    elif proto == IPPROTO_UDP:
        if len(body) < 8:
            raise _Malformed("short UDP header")
        sport, dport = struct.unpack_from("!HH", body, 0)
        flags = frozenset()
        transport, payload = Transport.UDP, body[8:]
    else:
        sport = dport = 0
        flags = frozenset()
        transport, payload = Transport.OTHER, body

    return PacketRecord(
        ts=ts,
        src=Endpoint(src_ip, sport),
        dst=Endpoint(dst_ip, dport),
        transport=transport,
        tcp_flags=flags,
        payload=bytes(payload),
        wire_len=wire_len,
    )


def read_pcap(path) -> tuple[Trace, IngestStats]:
    """Read an Ethernet/IPv4 classic PCAP file (microsecond timestamps)."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise Unreadable(f"cannot read {path}: {exc}") from exc

    if len(data) < 4:
        raise BadMagic("file too short for a PCAP magic number")
    if struct.unpack_from("<I", data)[0] == PCAP_MAGIC:
        endian = "<"
    elif struct.unpack_from(">I", data)[0] == PCAP_MAGIC:
        endian = ">"
    else:
        raise BadMagic(f"unrecognized magic {data[:4].hex()}")
    if len(data) < GLOBAL_HEADER_LEN:
        raise TruncatedCapture("global header shorter than 24 bytes")
    linktype = struct.unpack_from(endian + "I", data, 20)[0]

    stats = IngestStats()
    packets = []
    pos = GLOBAL_HEADER_LEN
    rec_fmt = endian + "IIII"
    while pos < len(data):
        if len(data) - pos < RECORD_HEADER_LEN:
            raise TruncatedCapture(f"record header cut at offset {pos}")
        ts_sec, ts_usec, incl_len, orig_len = struct.unpack_from(rec_fmt, data, pos)
        pos += RECORD_HEADER_LEN
        if len(data) - pos < incl_len:
            raise TruncatedCapture(f"record body cut at offset {pos}")
        frame = data[pos : pos + incl_len]
        pos += incl_len
        stats.packets_read += 1

        if linktype != LINKTYPE_ETHERNET:
            stats.packets_dropped_unsupported += 1
            continue
        if ts_usec >= 1_000_000 or orig_len < incl_len:
            stats.packets_dropped_malformed += 1
            continue
        try:
            packets.append(_decode_frame(ts_from_micros(ts_sec * 1_000_000 + ts_usec), frame, orig_len))
        except _Unsupported:
            stats.packets_dropped_unsupported += 1
        except (_Malformed, ValueError):
            stats.packets_dropped_malformed += 1

    return normalize_trace(packets), stats


def _parse_jsonl_record(obj) -> PacketRecord:
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    ts = obj["ts"]
    wire_len = obj["wire_len"]
    if isinstance(ts, bool) or not isinstance(ts, (int, float)):
        raise ValueError("ts must be a number")
    if isinstance(wire_len, bool) or not isinstance(wire_len, int):
        raise ValueError("wire_len must be an integer")
    flags = obj.get("flags", [])
    if not isinstance(flags, list) or not all(isinstance(f, str) for f in flags):
        raise ValueError("flags must be a list of names")
    return PacketRecord(
        ts=float(ts),
        src=Endpoint.parse(obj["src"]),
        dst=Endpoint.parse(obj["dst"]),
        transport=Transport(obj["transport"]),
        tcp_flags=frozenset(f.upper() for f in flags),
        payload=bytes.fromhex(obj.get("payload", "")),
        wire_len=wire_len,
    )


def parse_jsonl_line(line: str) -> Optional[PacketRecord]:
    """Decode one JSONL record; ``None`` if the line is not a valid record."""
    try:
        return _parse_jsonl_record(json.loads(line))
    except (ValueError, KeyError, TypeError, AttributeError):
        return None


def read_jsonl(path) -> tuple[Trace, IngestStats]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise Unreadable(f"cannot read {path}: {exc}") from exc

    stats = IngestStats()
    packets = []
    for line in lines:
        if not line.strip():
            continue
        stats.packets_read += 1
        pkt = parse_jsonl_line(line)
        if pkt is None:
            stats.packets_dropped_malformed += 1
        else:
            packets.append(pkt)
    return normalize_trace(packets), stats


def read_trace(path, fmt: str = "auto") -> tuple[Trace, IngestStats]:
    """Dispatch on ``fmt`` ("pcap", "jsonl" or "auto" by file extension)."""
    if fmt == "auto":
        fmt = "jsonl" if str(path).endswith((".jsonl", ".json")) else "pcap"
    if fmt == "pcap":
        return read_pcap(path)
    if fmt == "jsonl":
        return read_jsonl(path)
    raise ValueError(f"unknown trace format {fmt!r}")
