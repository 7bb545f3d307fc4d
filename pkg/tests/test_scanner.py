import random
import struct
from collections import Counter

import pytest

from botnet_forensics.errors import Unwritable
from botnet_forensics.ingest import normalize_trace
from botnet_forensics.model import Trace, ip_to_int
from botnet_forensics.scanner import ScanLog, parse_dns_query, read_log, scan, write_log
from botnet_forensics.signatures import Signature, default_signatures
from botnet_forensics.synth import ScenarioConfig, generate_scenario

from helpers import pkt

IRC = Signature("irc", ("NICK", "JOIN", "PRIVMSG", "PING"), min_matches=2)


def test_empty_trace():
    log = scan(Trace(()), default_signatures())
    assert log == ScanLog()


def test_privmsg_packet_is_marked():
    p = pkt(1.0, "10.0.1.4:5000", "10.0.0.1:6667", payload=b"PRIVMSG #c :hello\r\n")
    log = scan(normalize_trace([p]), [IRC])
    assert len(log.markings) == 1
    m = log.markings[0]
    assert m.signature_name == "irc" and m.matched_pattern == b"PRIVMSG" and m.packet_index == 0
    assert log.suspicious_ips == (ip_to_int("10.0.1.4"),)


def test_one_marking_per_matching_signature():
    p = pkt(1.0, payload=b"PRIVMSG #c :.advscan now", wire_len=100)
    sigs = default_signatures()
    log = scan(normalize_trace([p]), sigs)
    assert sorted(m.signature_name for m in log.markings) == ["botcmd", "irc"]
    assert len(log.suspicious_ips) == 1


def test_hints_restrict_scanner_matches():
    sig = Signature("irc-alt", ("JOIN",), port_hint=7000)
    p = pkt(1.0, "10.0.0.1:4000", "10.0.0.2:6667", payload=b"JOIN #x")
    assert scan(normalize_trace([p]), [sig]).markings == ()
    q = pkt(1.0, "10.0.0.1:4000", "10.0.0.2:7000", payload=b"join #x")
    assert len(scan(normalize_trace([q]), [sig]).markings) == 1


def test_host_counts_match_brute_force_tally():
    trace, _ = generate_scenario(ScenarioConfig(n_bots=4, n_background_hosts=10, duration_s=200, seed=11))
    packets = trace.packets[:500]
    log = scan(Trace(packets), default_signatures())
    sent = Counter(p.src.ip for p in packets)
    received = Counter(p.dst.ip for p in packets)
    bytes_sent = Counter()
    for p in packets:
        bytes_sent[p.src.ip] += p.wire_len
    for ip, h in log.hosts.items():
        assert h.packets_sent == sent[ip]
        assert h.packets_received == received[ip]
        assert h.bytes_sent == bytes_sent[ip]
        assert h.first_seen <= h.last_seen
    assert set(log.hosts) == set(sent) | set(received)
    assert sum(h.packets_sent for h in log.hosts.values()) == len(packets)


def test_suspicious_ips_follow_first_marking_order():
    rng = random.Random(5)
    packets = []
    for i in range(60):
        src = f"10.0.0.{rng.randint(1, 6)}:{1000 + i}"
        payload = rng.choice([b"nothing here", b".advscan x", b"NICK a JOIN b", b"GET / HTTP/1.1"])
        packets.append(pkt(float(i), src, "10.9.9.9:80", payload=payload))
    log = scan(normalize_trace(packets), default_signatures())
    expected = list(dict.fromkeys(m.ip for m in log.markings))
    assert list(log.suspicious_ips) == expected
    assert scan(normalize_trace(packets), default_signatures()) == log


def encode_query(name, flags=0x0100, qdcount=1):
    header = struct.pack("!HHHHHH", 0x1234, flags, qdcount, 0, 0, 0)
    labels = b"".join(bytes([len(l)]) + l.encode() for l in name.split("."))
    return header + labels + b"\x00" + struct.pack("!HH", 1, 1)


def test_dns_query_name():
    payload = (b"\x12\x34\x01\x00\x00\x01\x00\x00\x00\x00\x00\x00"
               b"\x04evil\x07example\x00\x00\x01\x00\x01")
    assert payload == encode_query("evil.example")
    assert parse_dns_query(payload) == "evil.example"


@pytest.mark.parametrize("payload", [
    b"\x00\x01\x02\x03",
    encode_query("evil.example", flags=0x8180),  # response
    encode_query("evil.example", qdcount=0),
    encode_query("evil.example", flags=0x2800),  # UPDATE opcode
    b"\x12\x34\x01\x00\x00\x01\x00\x00\x00\x00\x00\x00\xc0\x0c\x00\x01\x00\x01",  # compression pointer
    encode_query("evil.example")[:-3],  # missing qtype/qclass
    b"\x12\x34\x01\x00\x00\x01\x00\x00\x00\x00\x00\x00\x09short",
])
def test_dns_rejects(payload):
    assert parse_dns_query(payload) is None


def test_scan_collects_dns_queries():
    p = pkt(4.0, "10.0.2.1:5353", "93.184.216.53:53", transport="UDP", payload=encode_query("a.b.example"))
    r = pkt(4.1, "93.184.216.53:53", "10.0.2.1:5353", transport="UDP", payload=encode_query("a.b.example", 0x8180))
    log = scan(normalize_trace([p, r]), [])
    assert [(q.ts, q.client, q.name) for q in log.dns_queries] == [(4.0, ip_to_int("10.0.2.1"), "a.b.example")]


def test_write_empty_log(tmp_path):
    write_log(ScanLog(), tmp_path / "log.json")
    import json
    assert json.loads((tmp_path / "log.json").read_text()) == {
        "hosts": [], "dns_queries": [], "markings": [], "suspicious_ips": []}


def test_log_roundtrip(tmp_path):
    p = pkt(1.25, "10.0.1.4:5000", "10.0.0.1:6667", payload=b"PRIVMSG #c :.update now\r\n")
    q = pkt(2.5, "10.0.2.1:5353", "93.184.216.53:53", transport="UDP", payload=encode_query("x.example"))
    log = scan(normalize_trace([p, q]), default_signatures())
    assert len(log.markings) == 2
    write_log(log, tmp_path / "log.json")
    assert read_log(tmp_path / "log.json") == log


def test_hosts_sorted_numerically(tmp_path):
    packets = [pkt(0.0, "10.0.0.10:1", "10.0.0.9:2"), pkt(1.0, "9.0.0.1:1", "10.0.0.2:2")]
    log = scan(normalize_trace(packets), [])
    ips = [h["ip"] for h in log.to_dict()["hosts"]]
    assert ips == ["9.0.0.1", "10.0.0.2", "10.0.0.9", "10.0.0.10"]


def test_unwritable_log(tmp_path):
    with pytest.raises(Unwritable):
        write_log(ScanLog(), tmp_path / "missing-dir" / "log.json")
