"""Per-node and network metrics with a stable CSV schema.

Definitions: PRR = decoded transmissions / transmissions (receiver side),
PDR = acknowledged transmissions / transmissions (sender side), throughput =
delivered frame bits / transmit airtime, end-to-end delay = first transmission
attempt to ACK reception, energy per bit = node energy / delivered payload
bits. CSV units: kbps, ms, uJ/bit, fractions.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CSV_HEADER = ("scenario,case,node_id,subcarrier,distance_m,sent,decoded,acked,"
              "generated,delivered,prr,pdr,throughput_kbps,mean_delay_ms,"
              "energy_j,energy_per_bit_uj")


@dataclass
class NodeMetrics:
    node_id: int
    subcarrier: int = 0
    distance_m: float = 0.0
    sent: int = 0                 # transmission attempts
    decoded: int = 0              # attempts decoded at the BS
    acked: int = 0                # attempts acknowledged at the node
    generated: int = 0            # application packets
    delivered: int = 0            # application packets acknowledged
    frame_bits: int = 0           # bits per frame for this node's payload
    payload_bits: int = 0
    airtime_s: float = 0.0
    energy_j: float = 0.0
    delays_ms: list = field(default_factory=list)

    @property
    def prr(self) -> float:
        return self.decoded / self.sent if self.sent else 0.0

    @property
    def pdr(self) -> float:
        return self.acked / self.sent if self.sent else 0.0

    @property
    def throughput_bps(self) -> float:
        return self.decoded * self.frame_bits / self.airtime_s if self.airtime_s > 0 else 0.0

    @property
    def mean_delay_ms(self) -> float:
        return float(np.mean(self.delays_ms)) if self.delays_ms else 0.0

    @property
    def energy_per_bit_j(self) -> float:
        bits = self.delivered * self.payload_bits
        return self.energy_j / bits if bits else 0.0


@dataclass
class Metrics:
    nodes: dict = field(default_factory=dict)     # node_id -> NodeMetrics

    def node(self, node_id: int) -> NodeMetrics:
        if node_id not in self.nodes:
            self.nodes[node_id] = NodeMetrics(node_id=node_id)
        return self.nodes[node_id]

    @property
    def aggregate_throughput_bps(self) -> float:
        return sum(n.throughput_bps for n in self.nodes.values())

    @property
    def mean_prr(self) -> float:
        sent = sum(n.sent for n in self.nodes.values())
        dec = sum(n.decoded for n in self.nodes.values())
        return dec / sent if sent else 0.0

    @property
    def mean_pdr(self) -> float:
        sent = sum(n.sent for n in self.nodes.values())
        ack = sum(n.acked for n in self.nodes.values())
        return ack / sent if sent else 0.0

    @property
    def mean_delay_ms(self) -> float:
        all_delays = [d for n in self.nodes.values() for d in n.delays_ms]
        return float(np.mean(all_delays)) if all_delays else 0.0

    @property
    def mean_energy_per_bit_j(self) -> float:
        vals = [n.energy_per_bit_j for n in self.nodes.values() if n.delivered]
        return float(np.mean(vals)) if vals else 0.0

    def conservation_ok(self) -> bool:
        return all(n.acked <= n.decoded <= n.sent for n in self.nodes.values())


def fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def csv_rows(metrics: Metrics, scenario: str, case: str):
    rows = []
    for nid in sorted(metrics.nodes):
        n = metrics.nodes[nid]
        rows.append(",".join(fmt(v) for v in (
            scenario, case, n.node_id, n.subcarrier, n.distance_m, n.sent, n.decoded,
            n.acked, n.generated, n.delivered, n.prr, n.pdr,
            n.throughput_bps / 1e3, n.mean_delay_ms, n.energy_j,
            n.energy_per_bit_j * 1e6)))
    agg_energy = metrics.mean_energy_per_bit_j * 1e6
    rows.append(",".join(fmt(v) for v in (
        scenario, case, "all", 0, 0.0,
        sum(n.sent for n in metrics.nodes.values()),
        sum(n.decoded for n in metrics.nodes.values()),
        sum(n.acked for n in metrics.nodes.values()),
        sum(n.generated for n in metrics.nodes.values()),
        sum(n.delivered for n in metrics.nodes.values()),
        metrics.mean_prr, metrics.mean_pdr,
        metrics.aggregate_throughput_bps / 1e3, metrics.mean_delay_ms,
        sum(n.energy_j for n in metrics.nodes.values()), agg_energy)))
    return rows


def write_csv(path, rows, header=CSV_HEADER):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")
