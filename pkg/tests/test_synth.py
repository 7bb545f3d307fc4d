import json

import pytest

from botnet_forensics.classifier import is_chat_like
from botnet_forensics.errors import InvalidConfig, Unwritable
from botnet_forensics.flowfilter import assemble_flows
from botnet_forensics.ingest import read_jsonl, read_pcap
from botnet_forensics.model import Endpoint, PacketRecord, Trace, Transport, compute_features, ip_to_int
from botnet_forensics.synth import (
    GroundTruth,
    ScenarioConfig,
    encode_frame,
    generate_scenario,
    write_ground_truth,
    write_jsonl,
    write_pcap,
)

SMALL = ScenarioConfig(n_bots=4, n_background_hosts=8, duration_s=300, seed=5)


def test_same_seed_same_trace():
    assert generate_scenario(SMALL) == generate_scenario(SMALL)
    other, _ = generate_scenario(ScenarioConfig(n_bots=4, n_background_hosts=8, duration_s=300, seed=6))
    assert other != generate_scenario(SMALL)[0]


def test_empty_scenario():
    trace, truth = generate_scenario(ScenarioConfig(n_bots=0, n_background_hosts=0))
    assert len(trace) == 0
    assert truth == GroundTruth(None)


def test_default_scenario_has_one_c2_flow_per_bot():
    trace, truth = generate_scenario(ScenarioConfig(seed=1))
    assert truth.controller_ip == ip_to_int("10.0.0.1")
    assert len(truth.bot_ips) == 8 and len(truth.c2_flow_keys) == 8
    flows = {f.key: f for f in assemble_flows(trace)}
    for key in truth.c2_flow_keys:
        assert is_chat_like(compute_features(flows[key]))
        assert flows[key].responder.ip == truth.controller_ip


def test_trace_is_time_sorted():
    trace, _ = generate_scenario(SMALL)
    times = [p.ts for p in trace.packets]
    assert times == sorted(times)


def test_background_only_has_no_controller():
    trace, truth = generate_scenario(ScenarioConfig(n_bots=0, n_background_hosts=5, seed=2))
    assert len(trace) > 0 and truth.controller_ip is None and not truth.c2_flow_keys


@pytest.mark.parametrize("field,value", [
    ("n_bots", -1), ("n_background_hosts", 251), ("duration_s", 0), ("c2_msg_period_s", 0),
    ("c2_jitter_s", -0.1), ("background_flows_per_host", -1), ("scan_prob", 1.5),
])
def test_invalid_config(field, value):
    cfg = ScenarioConfig(**{field: value})
    with pytest.raises(InvalidConfig):
        cfg.validate()
    with pytest.raises(InvalidConfig):
        generate_scenario(cfg)


def test_writers_roundtrip(tmp_path):
    trace, truth = generate_scenario(SMALL)
    write_pcap(trace, tmp_path / "t.pcap")
    write_jsonl(trace, tmp_path / "t.jsonl")
    write_ground_truth(truth, tmp_path / "gt.json")
    assert read_pcap(tmp_path / "t.pcap")[0] == trace
    assert read_jsonl(tmp_path / "t.jsonl")[0].packets == trace.packets
    assert GroundTruth.from_dict(json.loads((tmp_path / "gt.json").read_text())) == truth


def test_unwritable(tmp_path):
    trace, truth = generate_scenario(SMALL)
    for writer, obj in ((write_pcap, trace), (write_jsonl, trace), (write_ground_truth, truth)):
        with pytest.raises(Unwritable):
            writer(obj, tmp_path / "nope" / "x")


def test_other_transport_frame():
    p = PacketRecord(1.0, Endpoint.parse("10.0.0.1:0"), Endpoint.parse("10.0.0.2:0"), Transport.OTHER,
                     frozenset(), b"abc", 37)
    assert len(encode_frame(p)) == 37
    with pytest.raises(ValueError):
        encode_frame(PacketRecord(1.0, Endpoint.parse("10.0.0.1:5"), Endpoint.parse("10.0.0.2:0"),
                                  Transport.OTHER, frozenset(), b"", 34))


def test_wire_len_below_frame_rejected(tmp_path):
    p = PacketRecord(1.0, Endpoint.parse("10.0.0.1:1"), Endpoint.parse("10.0.0.2:2"), Transport.TCP,
                     frozenset(), b"hello", 20)
    with pytest.raises(ValueError):
        write_pcap(Trace((p,)), tmp_path / "x.pcap")


def test_empty_writers(tmp_path):
    write_pcap(Trace(()), tmp_path / "e.pcap")
    write_jsonl(Trace(()), tmp_path / "e.jsonl")
    assert (tmp_path / "e.pcap").stat().st_size == 24
    assert (tmp_path / "e.jsonl").read_bytes() == b""


def test_empty_payload_is_empty_string(tmp_path):
    p = PacketRecord(1.0, Endpoint.parse("10.0.0.1:1"), Endpoint.parse("10.0.0.2:2"), Transport.TCP,
                     frozenset({"SYN"}), b"", 54)
    write_jsonl(Trace((p,)), tmp_path / "x.jsonl")
    assert json.loads((tmp_path / "x.jsonl").read_text())["payload"] == ""
