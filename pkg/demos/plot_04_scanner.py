"""
Sensor view of a trace
======================

The scanner does not assemble flows. It marks single packets that carry a
command string and tallies per-host activity and DNS lookups.
"""

from botnet_forensics.model import int_to_ip
from botnet_forensics.scanner import scan
from botnet_forensics.signatures import default_signatures, sensor_signatures
from botnet_forensics.synth import ScenarioConfig, generate_scenario

trace, truth = generate_scenario(ScenarioConfig(n_bots=3, n_background_hosts=10, duration_s=300, seed=2))
log = scan(trace, sensor_signatures(default_signatures()))

print("hosts seen:", len(log.hosts), " dns queries:", len(log.dns_queries), " markings:", len(log.markings))
for m in log.markings[:5]:
    print(f"  packet {m.packet_index:>5}  {int_to_ip(m.ip):<12} {m.signature_name}: {m.matched_pattern!r}")

##############################################################################
# Every bot that received a command shows up as suspicious, the controller too
print(sorted(int_to_ip(ip) for ip in log.suspicious_ips))
print(sorted(int_to_ip(ip) for ip in truth.bot_ips))
