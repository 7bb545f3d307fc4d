"""Packet-to-flow conversion and the two data-reduction filters."""

from __future__ import annotations

from typing import Sequence

from .model import FlowKey, FlowSummary, Handshake, Trace, Transport, summarize_flow

DEFAULT_IDLE_TIMEOUT = 300.0


def assemble_flows(trace: Trace, idle_timeout: float = DEFAULT_IDLE_TIMEOUT) -> list:
    """Group packets into bidirectional flows.

    A gap larger than ``idle_timeout`` between consecutive packets of the
    same key closes the current flow and opens a new one. Flows come back
    ordered by start time with dense ids from 0.
    """
    if not idle_timeout > 0:
        raise ValueError("idle_timeout must be positive")
    open_flows: dict = {}
    finished = []  # (first packet index, packets)
    for idx, pkt in enumerate(trace.packets):
        key = FlowKey.of_packet(pkt)
        current = open_flows.get(key)
        if current is not None and pkt.ts - current[1][-1].ts > idle_timeout:
            finished.append(current)
            current = None
        if current is None:
            current = open_flows[key] = (idx, [])
        current[1].append(pkt)
    finished.extend(open_flows.values())
    finished.sort(key=lambda f: f[0])
    return [summarize_flow(i, pkts) for i, (_, pkts) in enumerate(finished)]


def quick_data_reduction(flows: Sequence[FlowSummary]) -> list:
    """Keep TCP flows only."""
    return [f for f in flows if f.transport is Transport.TCP]


def is_incomplete(flow: FlowSummary) -> bool:
    return flow.payload_bytes == 0 and flow.handshake in (Handshake.SYN_RST, Handshake.SYN_ONLY)


def incomplete_comm_filter(flows: Sequence[FlowSummary]) -> list:
    """Drop connection attempts that never carried data (SYN-RST, bare SYN)."""
    return [f for f in flows if not is_incomplete(f)]
