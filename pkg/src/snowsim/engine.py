"""Discrete-event engine binding PHY, channel, estimation, ATPC, and MAC.

Time is integer microseconds. Packets are signal-accurate (synthesized,
impaired, mixed with concurrent neighbors, and decoded at the BS); the gaps
between packets are event-driven. Downlink ACK delivery inside uplink
scenarios is event-level from the closed-form error model.

Sequence of a node's packet: wake -> random initial backoff -> CCA ->
(clear: transmit | busy: congestion backoff -> CCA ...) -> await ACK ->
sleep/next packet, retrying through the congestion backoff on ACK timeout.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from . import atpc as atpc_mod
from .channel import path_loss_db, rayleigh_fading_gain
from .linklevel import AirPacket, UplinkReceiver, packet_error_prob
from .mac import MacEvent, NodeMacState, bs_ack_epoch, node_id_hash, node_step
from .metrics import Metrics
from .modem import ModulationScheme
from .packets import SnowPacket, frame_bit_count
from .simconfig import NodeSpec, SimConfig
from .trace import Trace

SPEED_OF_LIGHT = 299792458.0


@dataclass
class PacketJob:
    seq: int
    payload: bytes
    bits: np.ndarray
    first_tx_start_us: int = -1
    attempt: int = 0


@dataclass
class NodeRuntime:
    spec: NodeSpec
    rng: np.random.Generator
    mac: NodeMacState
    ppm: float
    tx_power_dbm: float
    position: np.ndarray
    heading: float = 0.0
    last_move_us: int = 0
    cfo_feedback: float = 0.0          # per-subcarrier offset handed back at join
    doppler_true_hz: float = 0.0
    doppler_est_hz: float = 0.0
    job: PacketJob | None = None
    generated: int = 0
    done: bool = False
    # energy accounting
    radio_state: str = "sleep"
    state_since_us: int = 0
    energy_j: float = 0.0
    _tx_power_active: float | None = None
    # ATPC
    atpc_model: atpc_mod.AtpcModel | None = None
    atpc_outcomes: list = field(default_factory=list)      # rolling (acked) window
    probe: dict | None = None
    attempt_log: list = field(default_factory=list)        # (t_us, acked, power_dbm)

    @property
    def node_id(self) -> int:
        return self.spec.node_id

    @property
    def distance_m(self) -> float:
        return float(np.hypot(*self.position))


class Engine:
    def __init__(self, config: SimConfig, trace: Trace | None = None):
        self.cfg = config
        self.plan = config.plan()
        self.trace = trace if trace is not None else Trace()
        self.metrics = Metrics()
        self.receiver = UplinkReceiver(config, self.plan)
        self.scheme = ModulationScheme("ook", config.uplink_symbol_rate)
        self.dl_scheme = ModulationScheme("ook", config.downlink_symbol_rate)

        root = np.random.SeedSequence(config.seed)
        seeds = root.spawn(4 + len(config.nodes))
        self.noise_rng = np.random.default_rng(seeds[0])
        self.downlink_rng = np.random.default_rng(seeds[1])
        self.interferer_rng = np.random.default_rng(seeds[2])
        self.ppm_rng = np.random.default_rng(seeds[3])

        self.nodes: dict[int, NodeRuntime] = {}
        for spec, seed in zip(config.nodes, seeds[4:]):
            rng = np.random.default_rng(seed)
            ppm = spec.ppm
            if ppm is None:
                mag = self.ppm_rng.uniform(*config.ppm_range)
                ppm = float(mag if self.ppm_rng.integers(0, 2) else -mag)
            pos = np.array(spec.position(), dtype=np.float64)
            self.nodes[spec.node_id] = NodeRuntime(
                spec=spec, rng=rng, mac=NodeMacState(), ppm=ppm,
                tx_power_dbm=spec.tx_power_dbm, position=pos,
                heading=float(rng.uniform(0, 2 * np.pi)))

        self.assignments: dict[int, int] = {}       # node_id -> subcarrier
        self.now_us = 0
        self._heap: list = []
        self._seq = 0
        self.on_air: dict[int, AirPacket] = {}
        self._air_id = 0
        self._owner: dict[int, int] = {}            # air id -> node id (0 = interferer)
        self._tx_of_node: dict[int, int] = {}       # node id -> live air id
        self.pending_acks: list = []                # (subcarrier, node_id, seq, decode_us)
        self.bs_tx_busy_until = 0
        self.active_nodes = 0
        self._flush_scheduled = False

        base_ack_payload = (self.plan.num_subcarriers + 7) // 8 + 1
        self.ack_duration_us = int(round(
            frame_bit_count(base_ack_payload) / config.downlink_symbol_rate * 1e6))

    # ------------------------------------------------------------- utilities

    def log(self, entity, event, subcarrier=0, **detail):
        self.trace.log(self.now_us, entity, event, subcarrier, **detail)

    def push(self, time_us: int, kind: str, data=None):
        heapq.heappush(self._heap, (int(time_us), self._seq, kind, data))
        self._seq += 1

    def node_entity(self, node_id: int) -> str:
        return f"node{node_id}"

    def set_radio(self, node: NodeRuntime, state: str, power_dbm: float | None = None):
        """Close the previous radio-state interval and charge its energy."""
        dt = (self.now_us - node.state_since_us) * 1e-6
        prof = self.cfg.energy
        if dt > 0:
            if node.radio_state == "tx":
                current = prof.tx_current(node.tx_power_dbm if node._tx_power_active is None
                                          else node._tx_power_active)
            elif node.radio_state == "rx":
                current = prof.rx_current_a
            else:
                current = prof.idle_current_a
            node.energy_j += prof.supply_v * current * dt
        node.radio_state = state
        node.state_since_us = self.now_us
        node._tx_power_active = power_dbm

    def node_pathloss_db(self, node: NodeRuntime) -> float:
        return path_loss_db(self.cfg.pathloss, max(node.distance_m, 1.0),
                            self.plan.center_hz(self.assignments.get(node.node_id,
                                                                     self.plan.join_index)))

    def node_node_rx_dbm(self, sender: NodeRuntime, listener: NodeRuntime) -> float:
        d = float(np.hypot(*(sender.position - listener.position)))
        loss = path_loss_db(self.cfg.pathloss, max(d, 1.0), self.plan.band_center)
        return sender.tx_power_dbm - loss

    def fading(self, node: NodeRuntime) -> complex:
        if self.cfg.fading == "rayleigh":
            return rayleigh_fading_gain(node.rng)
        return 1.0 + 0.0j

    def subcarrier_of(self, node: NodeRuntime) -> int:
        return self.assignments[node.node_id]

    # ----------------------------------------------------------------- joins

    def run_joins(self):
        """Sequential join handshakes on the join subcarrier with CFO feedback."""
        join_sub = self.plan.join_index
        f_join = self.plan.center_hz(join_sub)
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            self.now_us += self.cfg.join_slot_us
            payload = node_id.to_bytes(2, "big") + (0).to_bytes(2, "big") + b"\x00" * 4
            pkt = SnowPacket(payload=payload)
            bits = pkt.to_bits()
            duration = int(round(bits.size / self.cfg.uplink_symbol_rate * 1e6))
            raw_offset = (node.ppm - self.cfg.bs_ppm) * 1e-6 * f_join
            loss = path_loss_db(self.cfg.pathloss, max(node.distance_m, 1.0), f_join)
            fine_est = None
            for attempt in range(5):
                air = AirPacket(
                    node_id=node_id, seq=0, subcarrier=join_sub,
                    center_offset_hz=self.plan.center_offset_hz(join_sub),
                    bits=bits, start_us=self.now_us, duration_us=duration,
                    amplitude=10.0 ** ((node.tx_power_dbm - loss) / 20.0),
                    fading=self.fading(node), residual_cfo_hz=raw_offset,
                    symbol_rate=self.cfg.uplink_symbol_rate)
                self.log(self.node_entity(node_id), "join_tx", join_sub, attempt=attempt)
                result = self.receiver.decode(air, [], self.noise_rng, join_mode=True)
                self.now_us += duration + self.cfg.decode_latency_us
                if (node_id, 0) in result.decoded:
                    fine_est = result.fine_cfo_hz
                    break
            sub = self.assign_subcarrier(node_id)
            if fine_est is None:
                fine_est = 0.0
            feedback = self.plan.center_hz(sub) * fine_est / f_join
            node.cfo_feedback = feedback if self.cfg.compensation.cfo else 0.0
            self.log("bs", "join_assign", sub, node=node_id,
                     feedback_hz=f"{feedback:.3f}", ppm_est=f"{1e6 * fine_est / f_join:.3f}")
        self.now_us += self.cfg.join_slot_us

    def assign_subcarrier(self, node_id: int) -> int:
        counts = {sub: 0 for sub in self.plan.data_subcarriers()}
        for sub in self.assignments.values():
            if sub in counts:
                counts[sub] += 1
        sub = min(counts, key=lambda s: (counts[s], s))
        self.assignments[node_id] = sub
        return sub

    # ------------------------------------------------------------- main loop

    def run(self) -> Metrics:
        self.run_joins()
        start = self.now_us
        for node_id, node in self.nodes.items():
            node.state_since_us = self.now_us
            m = self.metrics.node(node_id)
            m.subcarrier = self.subcarrier_of(node)
            m.distance_m = node.spec.distance_m
            m.frame_bits = frame_bit_count(node.spec.payload_bytes)
            m.payload_bits = 8 * node.spec.payload_bytes
            self.active_nodes += 1
            first = start + int(node.rng.uniform(*self._interval_us()))
            self.push(first, "node_wake", node_id)
        if self.cfg.interferer is not None:
            self.push(start, "interferer_burst", None)
        self._schedule_flush()

        while self._heap:
            t, _, kind, data = heapq.heappop(self._heap)
            self.now_us = max(self.now_us, t)
            getattr(self, f"_on_{kind}")(data)
            if self.active_nodes == 0:
                if all(k in ("interferer_burst", "ack_flush") for _, _, k, _ in self._heap):
                    break
        for node in self.nodes.values():
            self.set_radio(node, "sleep")
            self.metrics.node(node.node_id).energy_j = node.energy_j
        return self.metrics

    def _interval_us(self):
        lo, hi = self.cfg.packet_interval_ms
        return (lo * 1e3, hi * 1e3 + 1)

    # ------------------------------------------------------------- node flow

    def _on_node_wake(self, node_id):
        node = self.nodes[node_id]
        if node.done:
            return
        self._update_mobility(node)
        node.generated += 1
        self.metrics.node(node_id).generated += 1
        seq = node.generated
        payload = (node_id.to_bytes(2, "big") + seq.to_bytes(2, "big")
                   + node.rng.bytes(max(0, node.spec.payload_bytes - 4)))
        pkt = SnowPacket(payload=payload)
        node.job = PacketJob(seq=seq, payload=payload, bits=pkt.to_bits())
        node.mac, _ = node_step(node.mac, MacEvent("wake", self.now_us), node.rng, self.cfg.mac)
        self.log(self.node_entity(node_id), "wake", self.subcarrier_of(node), seq=seq)
        self.push(node.mac.backoff_deadline, "backoff_timer",
                  (node_id, node.mac.backoff_deadline))

    def _on_backoff_timer(self, data):
        node_id, deadline = data
        node = self.nodes[node_id]
        if node.mac.mode != "initial_backoff" or node.mac.backoff_deadline != deadline:
            return
        node.mac, action = node_step(node.mac, MacEvent("timer", self.now_us),
                                     node.rng, self.cfg.mac)
        if action == "start_cca":
            self.set_radio(node, "rx")
            self.push(self.now_us + self.cfg.cca_duration_us, "cca_done",
                      (node_id, self.now_us))

    def _on_cca_done(self, data):
        node_id, cca_start = data
        node = self.nodes[node_id]
        if node.mac.mode != "cca":
            return
        busy = self._cca_busy(node, cca_start, self.now_us)
        ev = MacEvent("cca_result", self.now_us, busy=busy)
        node.mac, action = node_step(node.mac, ev, node.rng, self.cfg.mac)
        sub = self.subcarrier_of(node)
        if busy:
            self.log(self.node_entity(node_id), "cca_busy", sub)
            self.set_radio(node, "sleep")
            self.push(node.mac.backoff_deadline, "backoff_timer",
                      (node_id, node.mac.backoff_deadline))
            return
        self.log(self.node_entity(node_id), "cca_clear", sub)
        self._start_transmission(node)

    def _cca_busy(self, node: NodeRuntime, t0: int, t1: int) -> bool:
        """Energy detection on the node's own subcarrier over the CCA window."""
        threshold = self.cfg.rx_sensitivity_dbm + self.cfg.mac.cca_margin_db
        sub = self.subcarrier_of(node)
        center = self.plan.center_hz(sub)
        for air_id, air in self.on_air.items():
            if air.end_us <= t0 or air.start_us >= t1:
                continue
            owner = self._owner[air_id]
            if owner == node.node_id:
                continue
            if owner == 0:
                in_band = abs(air.center_offset_hz + self.plan.band_center
                              - center) <= self.cfg.node_bandwidth_hz
                if not in_band:
                    continue
                d = float(np.hypot(*(self._interferer_position() - node.position)))
                loss = path_loss_db(self.cfg.pathloss, max(d, 1.0), center)
                if self.cfg.interferer.power_dbm - loss >= threshold:
                    return True
                continue
            if air.subcarrier != sub:
                continue
            if self.node_node_rx_dbm(self.nodes[owner], node) >= threshold:
                return True
        return False

    def _start_transmission(self, node: NodeRuntime):
        cfg = self.cfg
        job = node.job
        job.attempt += 1
        sub = self.subcarrier_of(node)
        f_sub = self.plan.center_hz(sub)
        duration = int(round(job.bits.size / cfg.uplink_symbol_rate * 1e6))
        if job.first_tx_start_us < 0:
            job.first_tx_start_us = self.now_us

        self._update_doppler(node, f_sub)
        true_offset = (node.ppm - cfg.bs_ppm) * 1e-6 * f_sub + node.doppler_true_hz
        correction = (node.cfo_feedback + node.doppler_est_hz) if cfg.compensation.cfo else 0.0
        residual = true_offset - correction

        loss = path_loss_db(cfg.pathloss, max(node.distance_m, 1.0), f_sub)
        air = AirPacket(
            node_id=node.node_id, seq=job.seq, subcarrier=sub,
            center_offset_hz=self.plan.center_offset_hz(sub), bits=job.bits,
            start_us=self.now_us, duration_us=duration,
            amplitude=10.0 ** ((node.tx_power_dbm - loss) / 20.0),
            fading=self.fading(node), residual_cfo_hz=residual,
            symbol_rate=cfg.uplink_symbol_rate)
        self._air_id += 1
        self.on_air[self._air_id] = air
        self._owner[self._air_id] = node.node_id
        self._tx_of_node[node.node_id] = self._air_id

        m = self.metrics.node(node.node_id)
        m.sent += 1
        m.airtime_s += duration * 1e-6
        self.set_radio(node, "tx", node.tx_power_dbm)
        self.log(self.node_entity(node.node_id), "tx_start", sub,
                 seq=job.seq, attempt=job.attempt, power=f"{node.tx_power_dbm:g}")
        self.push(self.now_us + duration, "tx_end", (node.node_id, self._air_id))

    def _on_tx_end(self, data):
        node_id, air_id = data
        node = self.nodes[node_id]
        air = self.on_air[air_id]
        node.mac, action = node_step(node.mac, MacEvent("timer", self.now_us),
                                     node.rng, self.cfg.mac)
        self.set_radio(node, "rx")     # listen on the downlink for the ACK
        self.log(self.node_entity(node_id), "tx_end", air.subcarrier, seq=air.seq)
        self.push(self.now_us + self.cfg.decode_latency_us, "decode", air_id)
        timeout = (self.cfg.decode_latency_us
                   + self.cfg.energy.turnaround_us(node.spec.payload_bytes)
                   + int(2.5 * self.ack_duration_us) + 5000)
        self.push(self.now_us + timeout, "ack_timeout", (node_id, air.seq, node.job.attempt))

    def _on_decode(self, air_id):
        air = self.on_air.get(air_id)
        if air is None:
            return
        owner = self._owner[air_id]
        concurrent = self.receiver.neighborhood(air, list(self.on_air.values()))
        result = self.receiver.decode(air, concurrent, self.noise_rng)
        ok = (air.node_id, air.seq) in result.decoded
        if owner != 0:
            node = self.nodes[owner]
            m = self.metrics.node(owner)
            if ok:
                m.decoded += 1
                self.log("bs", "decode_ok", air.subcarrier, node=air.node_id, seq=air.seq)
                sharers = [n for n, s in self.assignments.items() if s == air.subcarrier]
                tag = node_id_hash(air.node_id) if len(sharers) > 1 else None
                self.pending_acks.append((air.subcarrier, air.node_id, air.seq, self.now_us, tag))
                self._maybe_start_ack_epoch()
            else:
                self.log("bs", "decode_fail", air.subcarrier, node=air.node_id,
                         seq=air.seq, reason=result.reason)
        self._prune_air()

    def _prune_air(self):
        horizon = self.now_us - 500_000
        stale = [aid for aid, a in self.on_air.items() if a.end_us < horizon]
        for aid in stale:
            del self.on_air[aid]
            del self._owner[aid]

    # ------------------------------------------------------------- ACK epoch

    def _schedule_flush(self):
        if not self._flush_scheduled:
            self._flush_scheduled = True
            self.push(self.now_us + self.cfg.ack_flush_us, "ack_flush", None)

    def _on_ack_flush(self, _):
        self._flush_scheduled = False
        self._maybe_start_ack_epoch()
        if self.active_nodes > 0:
            self._schedule_flush()

    def _maybe_start_ack_epoch(self):
        if not self.pending_acks or self.now_us < self.bs_tx_busy_until:
            return
        epoch = list(self.pending_acks)
        self.pending_acks = []
        subs = sorted({sub for sub, *_ in epoch})
        tags = [(sub, tag) for sub, _, _, _, tag in epoch if tag is not None]
        vector = bs_ack_epoch(subs, self.plan, tags)
        payload_len = len(vector.to_payload())
        duration = int(round(frame_bit_count(payload_len)
                             / self.cfg.downlink_symbol_rate * 1e6))
        self.bs_tx_busy_until = self.now_us + duration
        self.log("bs", "ack_tx_start", self.plan.downlink_index,
                 bits="|".join(str(s) for s in subs))
        self.push(self.bs_tx_busy_until, "ack_tx_end",
                  [(sub, nid, seq, t, tag) for sub, nid, seq, t, tag in epoch])

    def _on_ack_tx_end(self, epoch):
        subs = sorted({sub for sub, *_ in epoch})
        self.log("bs", "ack_tx_end", self.plan.downlink_index,
                 bits="|".join(str(s) for s in subs))
        acked_nodes = {nid: seq for _, nid, seq, _, _ in epoch}
        for node_id, node in self.nodes.items():
            if node.mac.mode != "await_ack" or node.job is None:
                continue
            delivered = self._downlink_delivery_ok(node)
            seq = acked_nodes.get(node_id)
            got_bit = delivered and seq == node.job.seq
            usable = max(self.now_us, self._ack_usable_time(node))
            self.push(usable, "ack_deliver", (node_id, node.job.seq, got_bit))
        self._maybe_start_ack_epoch()

    def _ack_usable_time(self, node: NodeRuntime) -> int:
        air_id = self._tx_of_node.get(node.node_id)
        if air_id is None or air_id not in self.on_air:
            return self.now_us
        end = self.on_air[air_id].end_us
        return end + self.cfg.energy.turnaround_us(node.spec.payload_bytes)

    def _downlink_delivery_ok(self, node: NodeRuntime) -> bool:
        cfg = self.cfg
        if cfg.noise_psd <= 0.0:
            return True
        f_dl = self.plan.center_hz(self.plan.downlink_index)
        loss = path_loss_db(cfg.pathloss, max(node.distance_m, 1.0), f_dl)
        h = self.fading(node) if cfg.fading == "rayleigh" else 1.0
        amp = 10.0 ** ((cfg.bs_tx_power_dbm - loss) / 20.0) * abs(h)
        t_sym = 1.0 / cfg.downlink_symbol_rate
        snr = amp * amp * t_sym / cfg.noise_psd
        resid = 0.0 if cfg.compensation.cfo else (node.ppm - cfg.bs_ppm) * 1e-6 * f_dl
        per = packet_error_prob(snr, frame_bit_count(5), coherent=cfg.compensation.csi,
                                cfo_hz=resid, symbol_period_s=t_sym)
        return bool(self.downlink_rng.random() >= per)

    def _on_ack_deliver(self, data):
        node_id, seq, got_bit = data
        node = self.nodes[node_id]
        if node.mac.mode != "await_ack" or node.job is None or node.job.seq != seq:
            return
        ev = MacEvent("ack_bit", self.now_us, acked=got_bit)
        node.mac, action = node_step(node.mac, ev, node.rng, self.cfg.mac)
        if not got_bit:
            return
        m = self.metrics.node(node_id)
        m.acked += 1
        m.delivered += 1
        delay_ms = (self.now_us - node.job.first_tx_start_us) * 1e-3
        m.delays_ms.append(delay_ms)
        node.attempt_log.append((self.now_us, True, node.tx_power_dbm))
        self.log(self.node_entity(node_id), "ack_rx", self.subcarrier_of(node),
                 seq=seq, delay_ms=f"{delay_ms:.3f}")
        self._atpc_feedback(node, acked=True)
        self._finish_packet(node)

    def _on_ack_timeout(self, data):
        node_id, seq, attempt = data
        node = self.nodes[node_id]
        if (node.mac.mode != "await_ack" or node.job is None
                or node.job.seq != seq or node.job.attempt != attempt):
            return
        node.attempt_log.append((self.now_us, False, node.tx_power_dbm))
        self.log(self.node_entity(node_id), "ack_timeout", self.subcarrier_of(node),
                 seq=seq, attempt=attempt)
        self._atpc_feedback(node, acked=False)
        node.mac, action = node_step(node.mac, MacEvent("ack_timeout", self.now_us),
                                     node.rng, self.cfg.mac)
        if action == "sleep":
            self.log(self.node_entity(node_id), "drop", self.subcarrier_of(node), seq=seq)
            self._finish_packet(node)
            return
        self.set_radio(node, "sleep")
        self.push(node.mac.backoff_deadline, "backoff_timer",
                  (node_id, node.mac.backoff_deadline))

    def _finish_packet(self, node: NodeRuntime):
        self.set_radio(node, "sleep")
        node.job = None
        if node.generated >= self.cfg.packets_per_node:
            node.done = True
            self.active_nodes -= 1
            self.log(self.node_entity(node.node_id), "sleep", self.subcarrier_of(node))
            return
        nxt = self.now_us + int(node.rng.uniform(*self._interval_us()))
        self.push(nxt, "node_wake", node.node_id)

    # ------------------------------------------------------------- mobility

    def _update_mobility(self, node: NodeRuntime):
        if not node.spec.mobile or node.spec.speed_mps <= 0:
            return
        dt = (self.now_us - node.last_move_us) * 1e-6
        node.position = node.position + node.spec.speed_mps * dt * np.array(
            [np.cos(node.heading), np.sin(node.heading)])
        dist = float(np.hypot(*node.position))
        if dist > 1500.0 or dist < 50.0:
            node.position = node.position * (node.spec.distance_m / max(dist, 1.0))
        node.heading = float(node.rng.uniform(0, 2 * np.pi))
        node.last_move_us = self.now_us

    def _update_doppler(self, node: NodeRuntime, f_sub: float):
        if not node.spec.mobile or node.spec.speed_mps <= 0:
            node.doppler_true_hz = 0.0
            node.doppler_est_hz = 0.0
            return
        to_bs = -node.position
        norm = float(np.hypot(*to_bs))
        if norm < 1.0:
            cos_theta = 0.0
        else:
            v = np.array([np.cos(node.heading), np.sin(node.heading)])
            cos_theta = float(np.dot(v, to_bs / norm))
        node.doppler_true_hz = f_sub * node.spec.speed_mps / SPEED_OF_LIGHT * cos_theta
        node.doppler_est_hz = node.doppler_true_hz if self.cfg.compensation.cfo else 0.0

    # ------------------------------------------------------------ interferer

    def _interferer_position(self):
        return np.array([self.cfg.interferer.distance_m, 0.0])

    def _on_interferer_burst(self, _):
        if self.active_nodes == 0:
            return
        cfg = self.cfg.interferer
        data_subs = self.plan.data_subcarriers()
        sub = int(self.interferer_rng.choice(np.array(data_subs)))
        offset_hz = (1.0 - cfg.overlap_fraction) * self.cfg.node_bandwidth_hz
        center = self.plan.center_offset_hz(sub) + offset_hz
        bits = self.interferer_rng.integers(0, 2, 8 * cfg.burst_bytes).astype(np.uint8)
        duration = int(round(bits.size / self.cfg.uplink_symbol_rate * 1e6))
        loss = path_loss_db(self.cfg.pathloss, max(cfg.distance_m, 1.0), self.plan.band_center)
        air = AirPacket(
            node_id=0, seq=0, subcarrier=sub, center_offset_hz=center, bits=bits,
            start_us=self.now_us, duration_us=duration,
            amplitude=10.0 ** ((cfg.power_dbm - loss) / 20.0),
            fading=rayleigh_fading_gain(self.interferer_rng)
            if self.cfg.fading == "rayleigh" else 1.0,
            residual_cfo_hz=0.0, symbol_rate=self.cfg.uplink_symbol_rate)
        self._air_id += 1
        self.on_air[self._air_id] = air
        self._owner[self._air_id] = 0
        self.log("interferer", "tx_start", sub, overlap=f"{cfg.overlap_fraction:g}")
        self.push(self.now_us + int(cfg.period_ms * 1e3), "interferer_burst", None)

    # ------------------------------------------------------------------ ATPC

    def _atpc_feedback(self, node: NodeRuntime, acked: bool):
        cfg = self.cfg
        if not cfg.compensation.atpc:
            return
        if node.probe is not None:
            self._atpc_probe_step(node, acked)
            return
        node.atpc_outcomes.append(1.0 if acked else 0.0)
        if len(node.atpc_outcomes) < cfg.atpc_window:
            return
        pdr = float(np.mean(node.atpc_outcomes))
        node.atpc_outcomes = []
        if node.atpc_model is None:
            if pdr < cfg.pdr_threshold:
                node.probe = {"level": 0, "count": 0, "acks": 0, "samples": []}
                node.tx_power_dbm = cfg.atpc_probe_levels[0]
                self.log(self.node_entity(node.node_id), "atpc_probe_start",
                         self.subcarrier_of(node))
            return
        reading = atpc_mod.PdrSamples(pairs=[(node.tx_power_dbm, pdr)],
                                      k_window=cfg.atpc_window)
        node.atpc_model = atpc_mod.update_intercept(node.atpc_model, reading)
        self._atpc_set_power(node)

    def _atpc_probe_step(self, node: NodeRuntime, acked: bool):
        cfg = self.cfg
        probe = node.probe
        probe["count"] += 1
        probe["acks"] += 1 if acked else 0
        if probe["count"] < cfg.atpc_probe_packets:
            return
        level = cfg.atpc_probe_levels[probe["level"]]
        probe["samples"].append((level, probe["acks"] / probe["count"]))
        probe["level"] += 1
        probe["count"] = 0
        probe["acks"] = 0
        if probe["level"] < len(cfg.atpc_probe_levels):
            node.tx_power_dbm = cfg.atpc_probe_levels[probe["level"]]
            return
        samples = atpc_mod.PdrSamples(pairs=probe["samples"], k_window=cfg.atpc_window)
        node.probe = None
        try:
            node.atpc_model = atpc_mod.fit_initial(samples, cfg.pdr_threshold)
            self.log(self.node_entity(node.node_id), "atpc_fit", self.subcarrier_of(node),
                     slope=f"{node.atpc_model.slope:.5f}",
                     intercept=f"{node.atpc_model.intercept:.5f}")
            self._atpc_set_power(node)
        except ValueError:
            node.tx_power_dbm = node.spec.tx_power_dbm

    def _atpc_set_power(self, node: NodeRuntime):
        try:
            power = atpc_mod.select_power(node.atpc_model, atpc_mod.PowerVector())
        except ValueError:
            return
        if power != node.tx_power_dbm:
            self.log(self.node_entity(node.node_id), "atpc_power",
                     self.subcarrier_of(node), dbm=f"{power:g}")
        node.tx_power_dbm = power


def run(config: SimConfig):
    """Run one simulation; returns (Metrics, Trace)."""
    engine = Engine(config)
    metrics = engine.run()
    if not metrics.conservation_ok():
        raise AssertionError("metrics conservation violated: acked <= decoded <= sent")
    return metrics, engine.trace
