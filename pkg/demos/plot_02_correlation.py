"""
Scoring flow pairs
==================

Two flows driven by the same command schedule line up in time, and their
packet-size profiles look alike. A web download does neither.
"""

import numpy as np

from botnet_forensics.correlator import activity_series, correlate_pair, size_histogram
from botnet_forensics.model import Endpoint, PacketRecord, Transport, summarize_flow

rng = np.random.default_rng(0)
schedule = np.arange(0, 300, 20.0)


def chat_flow(fid, host):
    times = np.sort(np.concatenate([schedule + rng.normal(0, 0.2, len(schedule)),
                                    schedule + 0.5 + rng.uniform(0, 0.4, len(schedule))]))
    times = np.clip(times, 0, None)
    bot, c2 = Endpoint.parse(f"10.0.1.{host}:40000"), Endpoint.parse("10.0.0.1:6667")
    pkts = [PacketRecord(float(t), bot, c2, Transport.TCP, frozenset({"PSH", "ACK"}), b"x" * 60, 114)
            for t in times]
    return summarize_flow(fid, pkts)


a, b = chat_flow(0, 2), chat_flow(1, 3)

##############################################################################
# Activity series over the shared window, in one-second bins
t0, t1 = max(a.start_ts, b.start_ts), min(a.end_ts, b.end_ts)
sa, sb = activity_series(a, 1.0, t0, t1), activity_series(b, 1.0, t0, t1)
print("bins:", len(sa), "busy bins:", int((sa > 0).sum()), int((sb > 0).sum()))
print("size histograms:", size_histogram(a), size_histogram(b))
print(correlate_pair(a, b))

##############################################################################
# A bulk transfer for contrast
web = Endpoint.parse("93.184.216.9:80")
client = Endpoint.parse("10.0.2.4:50000")
bulk = summarize_flow(2, [PacketRecord(100 + i * 0.01, web, client, Transport.TCP, frozenset({"ACK"}),
                                       b"y" * 1400, 1454) for i in range(200)])
print(correlate_pair(a, bulk))
