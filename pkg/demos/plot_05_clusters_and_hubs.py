"""
Clusters and hubs
=================

Group correlated flows, then look for one host that talks to many peers
inside a group.
"""

import numpy as np

from botnet_forensics.clustering import graph_clusters, kmeans, standardize
from botnet_forensics.correlator import CorrelationRecord
from botnet_forensics.model import Endpoint, PacketRecord, Transport, int_to_ip, summarize_flow
from botnet_forensics.topology import analyze_cluster

##############################################################################
# Graph clustering on hand-made scores: 0-1-2 form a chain above 0.6.
records = [CorrelationRecord(0, 1, 0, 0, 0.9), CorrelationRecord(1, 2, 0, 0, 0.7),
           CorrelationRecord(3, 4, 0, 0, 0.2)]
print(graph_clusters(range(5), records))

##############################################################################
# k-means on two obvious blobs, after z-scoring
rng = np.random.default_rng(1)
X = np.vstack([rng.normal(0, 1, (10, 3)), rng.normal(8, 1, (10, 3))])
print([c.members for c in kmeans(standardize(X), 2, seed=0)])

##############################################################################
# A star: five bots each hold one flow to the same server
c2 = Endpoint.parse("10.0.0.1:6667")
flows = {}
for i in range(5):
    bot = Endpoint.parse(f"10.0.1.{i + 2}:4000")
    flows[i] = summarize_flow(i, [PacketRecord(1.0, bot, c2, Transport.TCP, frozenset({"SYN"}), b"", 54)])
cluster = graph_clusters(flows, [CorrelationRecord(i, i + 1, 0, 0, 1.0) for i in range(4)])[0]
verdict = analyze_cluster(cluster, flows, {})
print(int_to_ip(verdict.ip), "fan-out", verdict.fan_out, "bot name", verdict.bot_name)
