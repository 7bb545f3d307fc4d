"""Offline botnet controller detection from packet traces.

Stages: ingest -> scan -> flow assembly and filtering -> classification ->
pairwise correlation -> clustering -> topology analysis -> report.
"""

from .classifier import ChatThresholds, FlowClass, Protocol, classify_flow, classify_protocol, is_chat_like, match_signatures
from .clustering import Cluster, ClusterMethod, graph_clusters, kmeans, standardize
from .correlator import CorrelationConfig, CorrelationRecord, activity_series, correlate_all, correlate_pair, pearson, size_histogram
from .flowfilter import assemble_flows, incomplete_comm_filter, quick_data_reduction
from .ingest import IngestStats, normalize_trace, read_jsonl, read_pcap
from .model import Endpoint, FeatureVector, FlowKey, FlowSummary, Handshake, PacketRecord, Trace, Transport, compute_features
from .pipeline import RunConfig, detect
from .scanner import ScanLog, parse_dns_query, scan, write_log
from .signatures import Signature, default_signatures
from .synth import GroundTruth, ScenarioConfig, generate_scenario, write_jsonl, write_pcap
from .topology import DetectionReport, assign_bot_name, build_comm_graph, build_report, identify_controller
from .tree import Label, TreeModel, predict, train_tree

__version__ = "0.1.0"
