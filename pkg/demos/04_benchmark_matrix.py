"""
Scoring the deployment matrix on measured device profiles
=========================================================

Every deployment option (24 local-compute trios, 6 shared-encoder
variants, 10 multitask variants) is planned and evaluated on one
mobile/server/channel triple, and the CSV that the figures package
consumes is written out.
"""

import pathlib

from splitcomp.bench import (
    KIND_LC,
    KIND_OURS,
    KIND_SC,
    enumerate_configs,
    evaluate,
    plan,
    report,
)
from splitcomp.cost import ChannelProfile, load_device_profile

fixtures = pathlib.Path(__file__).resolve().parent.parent / "fixtures"
mobile = load_device_profile(fixtures / "jetson_nano.json")
server = load_device_profile(fixtures / "laptop.json")

configs = enumerate_configs()
print(f"{len(configs)} configurations: "
      f"{sum(c.kind == KIND_LC for c in configs)} local, "
      f"{sum(c.kind == KIND_SC for c in configs)} shared-encoder, "
      f"{sum(c.kind == KIND_OURS for c in configs)} multitask")

# evaluate everything at 100 kbps uplink
channel = ChannelProfile(rate_bps=100_000.0)
records = [evaluate(plan(c), mobile, server, channel) for c in configs]

print(f"\n{'scenario':<10} {'latency':>9} {'tx':>7} {'energy':>8} {'tx bytes':>9}")
for r in records[::8]:
    print(f"{r.scenario_id:<10} {r.latency_s:8.2f}s {r.latency_tx_s:6.2f}s "
          f"{r.energy_j:7.2f}J {r.tx_bytes:>9}")

# the multitask split beats the shared-encoder split, and its edge
# grows as the uplink slows because it sends one payload, not three
slow = ChannelProfile(rate_bps=37_500.0)
for rate_name, ch in (("100kbps", channel), ("37.5kbps", slow)):
    sc = min(evaluate(plan(c), mobile, server, ch).latency_s
             for c in configs if c.kind == KIND_SC)
    ours = min(evaluate(plan(c), mobile, server, ch).latency_s
               for c in configs if c.kind == KIND_OURS)
    print(f"\nat {rate_name}: best shared-encoder {sc:.2f}s, "
          f"best multitask {ours:.2f}s ({100 * (1 - ours / sc):.1f}% faster)")

out = pathlib.Path(__file__).resolve().parent / "bench_100kbps.csv"
report(records, out)
print(f"\nwrote {out.name} ({len(records)} rows) for the figures package")
