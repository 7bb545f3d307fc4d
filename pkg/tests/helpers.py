"""Builders for packets, flows and random flow lists used across the tests."""

import random

from botnet_forensics.model import Endpoint, PacketRecord, Transport, summarize_flow


def ep(text):
    return Endpoint.parse(text)


def pkt(ts, src="10.0.0.1:4000", dst="10.0.0.2:6667", transport="TCP", flags=(), payload=b"", wire_len=None):
    if wire_len is None:
        wire_len = 54 + len(payload)
    return PacketRecord(ts, ep(src), ep(dst), Transport(transport), frozenset(flags), payload, wire_len)


def flow(fid, times, sizes=None, src="10.0.0.1:4000", dst="10.0.0.2:6667", transport="TCP", payloads=None):
    """A flow whose packets alternate direction, starting with ``src``."""
    sizes = sizes or [100] * len(times)
    payloads = payloads or [b""] * len(times)
    packets = []
    for i, (t, s, p) in enumerate(zip(times, sizes, payloads)):
        a, b = (src, dst) if i % 2 == 0 else (dst, src)
        packets.append(pkt(t, a, b, transport, (), p, max(s, len(p))))
    return summarize_flow(fid, packets)


HANDSHAKE_SCRIPTS = {
    "syn_rst": [("c", {"SYN"}), ("s", {"RST", "ACK"})],
    "syn_only": [("c", {"SYN"}), ("c", {"SYN"})],
    "established": [("c", {"SYN"}), ("s", {"SYN", "ACK"}), ("c", {"ACK"})],
    "none": [("c", {"ACK"})],
}


def random_flow(rng: random.Random, fid: int):
    """A random small flow: transport, handshake shape and payloads all drawn from ``rng``."""
    transport = rng.choice(["TCP", "TCP", "UDP", "OTHER"])
    c = f"10.0.{rng.randint(0, 3)}.{rng.randint(1, 20)}:{rng.randint(1024, 65535)}"
    s = f"93.184.216.{rng.randint(1, 20)}:{rng.choice([80, 6667, 443])}"
    if transport == "OTHER":
        c, s = c.split(":")[0] + ":0", s.split(":")[0] + ":0"
    t = rng.uniform(0, 1000)
    packets = []
    if transport == "TCP":
        for who, flags in HANDSHAKE_SCRIPTS[rng.choice(list(HANDSHAKE_SCRIPTS))]:
            a, b = (c, s) if who == "c" else (s, c)
            packets.append(pkt(t, a, b, "TCP", flags))
            t += rng.uniform(0.001, 1)
    for _ in range(rng.choice([0, 0, 1, 3])):
        a, b = (c, s) if rng.random() < 0.5 else (s, c)
        payload = bytes(rng.getrandbits(8) for _ in range(rng.randint(1, 40)))
        flags = {"PSH", "ACK"} if transport == "TCP" else ()
        packets.append(pkt(t, a, b, transport, flags, payload))
        t += rng.uniform(0.001, 1)
    if not packets:
        packets.append(pkt(t, c, s, transport, {"ACK"} if transport == "TCP" else ()))
    return summarize_flow(fid, packets)


def random_flow_list(rng: random.Random, max_len: int = 15):
    return [random_flow(rng, i) for i in range(rng.randint(0, max_len))]


def random_timed_flow(rng: random.Random, fid: int, t0: float = 0.0, span: float = 60.0, n=None):
    n = n or rng.randint(1, 60)
    times = sorted(t0 + rng.uniform(0, span) for _ in range(n))
    sizes = [rng.randint(40, 2000) for _ in range(n)]
    return flow(fid, times, sizes)
