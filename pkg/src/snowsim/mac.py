"""CSMA/CA node state machine, BS dual-radio bookkeeping, ACK bit-vector, join.

The node machine is a pure transition function: (state, event) -> (state,
action). The engine owns time; it feeds events (wake, timer expiry, CCA
outcome, ACK bit, ACK timeout) and interprets actions (start a CCA, begin a
transmission, listen on the downlink subcarrier, sleep).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .spectrum import SpectrumPlan


class ProtocolError(Exception):
    """Event not valid for the node's current MAC mode."""


MODES = ("sleep", "initial_backoff", "cca", "transmit", "await_ack", "receive")
ACTIONS = ("none", "start_cca", "transmit", "listen_downlink", "sleep")


@dataclass(frozen=True)
class MacParams:
    initial_backoff_us: int = 32_000
    congestion_backoff_us: int = 64_000
    max_retries: int = 8
    ack_timeout_us: int = 65_000
    cca_margin_db: float = 6.0        # CCA busy above rx_sensitivity + margin


@dataclass
class NodeMacState:
    mode: str = "sleep"
    assigned_subcarrier: int = 0
    backoff_deadline: int = 0         # absolute microseconds
    retry_count: int = 0
    cfo_feedback: tuple = (0.0, 0.0)  # (subcarrier offset, doppler) in Hz
    in_congestion: bool = False


@dataclass(frozen=True)
class MacEvent:
    kind: str                         # wake | timer | cca_result | ack_bit | ack_timeout
    time_us: int
    busy: bool | None = None          # cca_result payload
    acked: bool | None = None         # ack_bit payload


def _backoff(state: NodeMacState, ev: MacEvent, rng, params: MacParams, congestion: bool):
    window = params.congestion_backoff_us if congestion else params.initial_backoff_us
    deadline = ev.time_us + int(rng.integers(0, window + 1))
    return replace(state, mode="initial_backoff", in_congestion=congestion,
                   backoff_deadline=deadline)


def node_step(state: NodeMacState, event: MacEvent, rng, params: MacParams = MacParams()):
    """Advance the node machine by one event; returns (new_state, action)."""
    mode, kind = state.mode, event.kind
    if mode == "sleep" and kind == "wake":
        return _backoff(replace(state, retry_count=0), event, rng, params, congestion=False), "none"
    if mode == "initial_backoff" and kind == "timer":
        return replace(state, mode="cca"), "start_cca"
    if mode == "cca" and kind == "cca_result":
        if event.busy:
            return _backoff(state, event, rng, params, congestion=True), "none"
        return replace(state, mode="transmit"), "transmit"
    if mode == "transmit" and kind == "timer":
        return replace(state, mode="await_ack"), "listen_downlink"
    if mode == "await_ack" and kind == "ack_bit":
        if event.acked:
            return replace(state, mode="sleep", retry_count=0), "sleep"
        return state, "none"          # epoch did not carry our bit; keep waiting
    if mode == "await_ack" and kind == "ack_timeout":
        if state.retry_count + 1 > params.max_retries:
            return replace(state, mode="sleep", retry_count=0), "sleep"
        bumped = replace(state, retry_count=state.retry_count + 1)
        return _backoff(bumped, event, rng, params, congestion=True), "none"
    raise ProtocolError(f"event {kind!r} invalid in mode {mode!r}")


# ------------------------------------------------------------------ ACK vector

def node_id_hash(node_id: int) -> int:
    """16-bit tag distinguishing sharers of one subcarrier inside an ACK epoch."""
    return (node_id * 2654435761) & 0xFFFF


@dataclass
class AckBitVector:
    bits: np.ndarray                       # one bit per subcarrier, index id-1
    shared_tags: list = field(default_factory=list)   # (subcarrier, node_id_hash)

    def is_set(self, subcarrier: int) -> bool:
        return bool(self.bits[subcarrier - 1])

    def acknowledges(self, subcarrier: int, node_id: int) -> bool:
        if not self.is_set(subcarrier):
            return False
        tags = [t for s, t in self.shared_tags if s == subcarrier]
        return not tags or node_id_hash(node_id) in tags

    def to_payload(self) -> bytes:
        vec = np.packbits(self.bits).tobytes()
        out = bytearray(vec)
        out.append(len(self.shared_tags))
        for sub, tag in self.shared_tags:
            out += bytes([sub]) + tag.to_bytes(2, "big")
        return bytes(out)


def ack_vector_from_payload(payload: bytes, n_subcarriers: int) -> AckBitVector:
    nbytes = (n_subcarriers + 7) // 8
    bits = np.unpackbits(np.frombuffer(payload[:nbytes], dtype=np.uint8))[:n_subcarriers]
    tags = []
    count = payload[nbytes]
    pos = nbytes + 1
    for _ in range(count):
        tags.append((payload[pos], int.from_bytes(payload[pos + 1 : pos + 3], "big")))
        pos += 3
    return AckBitVector(bits=bits.astype(np.uint8), shared_tags=tags)


def bs_ack_epoch(decoded, plan: SpectrumPlan, shared_tags=None) -> AckBitVector:
    """Bit i acknowledges the packet decoded on subcarrier i this epoch."""
    data = set(plan.data_subcarriers())
    bits = np.zeros(plan.num_subcarriers, dtype=np.uint8)
    for sub in decoded:
        if sub not in data:
            raise ValueError(f"subcarrier {sub} is not a data subcarrier")
        bits[sub - 1] = 1
    return AckBitVector(bits=bits, shared_tags=list(shared_tags or []))


# ------------------------------------------------------------------- BS state

@dataclass
class BsState:
    plan: SpectrumPlan
    downlink_index: int = 0
    downlink_backups: list = field(default_factory=list)
    retired_downlinks: list = field(default_factory=list)
    subcarrier_assignments: dict = field(default_factory=dict)   # node_id -> subcarrier
    pending_acks: list = field(default_factory=list)             # (subcarrier, node_id)
    tx_busy_until: int = 0

    def __post_init__(self):
        if self.downlink_index == 0:
            self.downlink_index = self.plan.downlink_index

    def assign_subcarrier(self, node_id: int) -> int:
        """Least-loaded data subcarrier, lowest id on ties; sharing over capacity."""
        counts = {sub: 0 for sub in self.plan.data_subcarriers()}
        for sub in self.subcarrier_assignments.values():
            if sub in counts:
                counts[sub] += 1
        sub = min(counts, key=lambda s: (counts[s], s))
        self.subcarrier_assignments[node_id] = sub
        return sub

    def sharers(self, subcarrier: int):
        return [n for n, s in self.subcarrier_assignments.items() if s == subcarrier]


def downlink_failover(bs: BsState, noise_report=None) -> BsState:
    """Promote the first backup to downlink; the old index retires for the session."""
    if not bs.downlink_backups:
        raise ValueError("no backup downlink subcarriers left")
    old = bs.downlink_index
    bs.retired_downlinks.append(old)
    bs.downlink_index = bs.downlink_backups.pop(0)
    return bs


def join_feedback(plan: SpectrumPlan, fine_cfo_hz: float, assigned_subcarrier: int) -> float:
    """Per-subcarrier offset handed to a joining node, extrapolated by crystal ppm."""
    join_hz = plan.center_hz(plan.join_index)
    return plan.center_hz(assigned_subcarrier) * fine_cfo_hz / join_hz
