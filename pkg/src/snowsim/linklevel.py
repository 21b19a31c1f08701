"""Per-packet physical layer used by the event engine.

Uplink packets are decoded at signal level: every transmission overlapping the
victim packet and sitting within a few subcarrier spacings is synthesized at a
common processing rate, mixed at its true frequency offset and arrival time,
band-extracted around the victim subcarrier, and run through detection,
estimation, and demodulation. Downlink delivery in uplink-centric scenarios is
event-level, drawn from the closed-form OOK error model at the node's SNR.

Amplitude convention: a transmit power of p dBm puts the OOK on-state power at
10^(p/10) calibrated units after path loss and fading are applied.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.optimize
import scipy.stats

from . import kernels
from .channel import apply_cfo
from .dofdm import extract_band, lowpass_brickwall
from .estimation import (estimate_cfo_coarse, estimate_cfo_fine, estimate_csi,
                         split_preamble)
from .modem import ModulationScheme, demodulate, detect_preamble, modulate
from .packets import (HEADER_BITS, CRC_BITS, PREAMBLE_BITS, SYNC_BITS, SYNC_WORD,
                      bits_to_int, parse_bits, preamble_bits)
from .signals import BasebandSignal

PAYLOAD_SEQ_BYTES = 4      # payload prefix: node_id (2 bytes) + sequence (2 bytes)


# ------------------------------------------------------------- analytic model

def ook_ber_coherent(snr_symbol: float) -> float:
    """BER of coherent OOK with known channel: Q(sqrt(snr/2)) at threshold A/2.

    snr_symbol is the post-integration on-symbol SNR Es/N0.
    """
    if snr_symbol <= 0:
        return 0.5
    return float(scipy.stats.norm.sf(np.sqrt(snr_symbol / 2.0)))


@lru_cache(maxsize=4096)
def _ook_ber_noncoherent_cached(snr_db_tenths: int) -> float:
    snr = 10.0 ** (snr_db_tenths / 100.0)
    a = np.sqrt(2.0 * snr)        # Rician parameter A/sigma_q with sigma_q^2 = 1/2 * noise

    def pe(lam):
        p_fa = np.exp(-lam * lam / 2.0)
        p_miss = scipy.stats.ncx2.cdf(lam * lam, 2, a * a)
        return 0.5 * (p_fa + p_miss)

    res = scipy.optimize.minimize_scalar(pe, bounds=(1e-3, a), method="bounded")
    return float(res.fun)


def ook_ber_noncoherent(snr_symbol: float) -> float:
    """BER of noncoherent OOK with the optimal magnitude threshold."""
    if snr_symbol <= 0:
        return 0.5
    snr_db = 10.0 * np.log10(snr_symbol)
    snr_db = min(max(snr_db, -20.0), 30.0)
    if snr_db >= 30.0:
        return 0.0
    return _ook_ber_noncoherent_cached(int(round(snr_db * 10)))


def cfo_integration_loss(delta_f_hz: float, symbol_period_s: float) -> float:
    """Amplitude factor |sinc(delta_f * T)| left after integrating a rotated symbol."""
    x = delta_f_hz * symbol_period_s
    if x == 0.0:
        return 1.0
    return float(abs(np.sinc(x)))


def packet_error_prob(snr_symbol: float, n_bits: int, coherent: bool = True,
                      cfo_hz: float = 0.0, symbol_period_s: float = 0.0) -> float:
    """Closed-form packet error probability for an OOK frame.

    The receiver decides on symbol magnitudes (noncoherent matched filter);
    `coherent` marks a channel-aided threshold, which at packet-relevant SNRs
    performs as the optimal-threshold noncoherent detector, so both routes use
    that closed form. Residual CFO attenuates the integrated symbol by
    sinc(delta_f * T).
    """
    loss = cfo_integration_loss(cfo_hz, symbol_period_s) if symbol_period_s else 1.0
    eff = snr_symbol * loss * loss
    ber = ook_ber_noncoherent(eff)
    return 1.0 - (1.0 - ber) ** n_bits


# --------------------------------------------------------------- transmission

@dataclass
class AirPacket:
    """One transmission on the air, as seen by the BS front end."""

    node_id: int
    seq: int
    subcarrier: int
    center_offset_hz: float        # relative to the wideband center
    bits: np.ndarray
    start_us: int
    duration_us: int
    amplitude: float               # on-state amplitude at the BS after path loss
    fading: complex
    residual_cfo_hz: float         # true offset minus node pre-correction
    symbol_rate: float
    _waveform: np.ndarray | None = None

    @property
    def end_us(self) -> int:
        return self.start_us + self.duration_us

    def waveform(self, scheme_kind: str, sample_rate: float) -> np.ndarray:
        """Node waveform at the BS, cached: modulated, rotated, scaled."""
        if self._waveform is None:
            scheme = ModulationScheme(scheme_kind, self.symbol_rate)
            base = modulate(self.bits, scheme, 0.0, 2.0 * self.symbol_rate, sample_rate)
            samples = base.samples
            if self.residual_cfo_hz != 0.0:
                samples = kernels.mix(samples, self.residual_cfo_hz, sample_rate, 0.0)
            self._waveform = samples * (self.amplitude * complex(self.fading))
        return self._waveform


@dataclass
class DecodeResult:
    decoded: list                   # (node_id, seq) pairs parsed with a valid CRC
    detected: bool
    reason: str = ""
    fine_cfo_hz: float | None = None   # join-mode estimate from the parsed frame


class UplinkReceiver:
    """BS-side decode of one uplink packet with its concurrent neighborhood."""

    def __init__(self, config, plan):
        self.cfg = config
        self.plan = plan
        self.scheme = ModulationScheme("ook", config.uplink_symbol_rate)
        self.preamble = preamble_bits()
        pad_symbols = 4
        self.pad_us = int(pad_symbols / config.uplink_symbol_rate * 1e6)

    def neighborhood(self, victim: AirPacket, all_active) -> list:
        """Concurrent transmissions close enough in frequency to matter."""
        radius = self.cfg.neighborhood_radius * self.plan.spacing + self.plan.subcarrier_bandwidth
        out = []
        for tx in all_active:
            if tx is victim:
                continue
            if tx.end_us <= victim.start_us or tx.start_us >= victim.end_us:
                continue
            if abs(tx.center_offset_hz - victim.center_offset_hz) <= radius:
                out.append(tx)
        return out

    def decode(self, victim: AirPacket, concurrent, noise_rng,
               join_mode: bool = False) -> DecodeResult:
        cfg = self.cfg
        fs = cfg.uplink_process_rate
        window_start = victim.start_us - self.pad_us
        window_us = victim.duration_us + 2 * self.pad_us
        n = int(round(window_us * 1e-6 * fs))
        acc = np.zeros(n, dtype=np.complex128)

        for tx in [victim] + list(concurrent):
            wave = tx.waveform(self.scheme.kind, fs)
            delta_c = tx.center_offset_hz - victim.center_offset_hz
            if delta_c != 0.0:
                wave = kernels.mix(wave, delta_c, fs, 0.0)
            offset = int(round((tx.start_us - window_start) * 1e-6 * fs))
            kernels.add_at_offset(acc, wave, offset)

        mixture = BasebandSignal(acc, fs, window_start * 1e-6)
        stream = extract_band(mixture, 0.0, 0.5 * self.plan.spacing)

        if cfg.noise_psd > 0.0:
            sigma = np.sqrt(cfg.noise_psd * stream.sample_rate / 2.0)
            noise = noise_rng.standard_normal(stream.n_samples) + 1j * noise_rng.standard_normal(
                stream.n_samples)
            stream = BasebandSignal(stream.samples + sigma * noise, stream.sample_rate, stream.t0)

        worst_osc = cfg.ppm_range[1] * 1e-6 * self.plan.band_end
        if join_mode or not cfg.compensation.cfo:
            # offsets unknown: the receiver must provision for the worst crystal
            rx_half_width = 0.5 * cfg.node_bandwidth_hz + worst_osc + 2e3
        else:
            rx_half_width = 0.5 * cfg.node_bandwidth_hz + 2e3
        stream = lowpass_brickwall(stream, rx_half_width)

        hits = detect_preamble(stream, self.preamble, self.scheme, threshold=0.6)
        if not hits:
            return DecodeResult(decoded=[], detected=False, reason="no_preamble")

        decoded = []
        fine_est = None
        sps = stream.sample_rate / self.scheme.symbol_rate
        for start, _score in hits:
            parsed = self._try_frame(stream, start, sps, join_mode)
            if parsed is not None:
                pkt, fine = parsed
                if pkt not in decoded:
                    decoded.append(pkt)
                    if fine is not None and fine_est is None:
                        fine_est = fine
        if decoded:
            return DecodeResult(decoded=decoded, detected=True, fine_cfo_hz=fine_est)
        return DecodeResult(decoded=[], detected=True, reason="frame_error")

    def _try_frame(self, stream: BasebandSignal, start: int, sps: float,
                   join_mode: bool = False):
        cfg = self.cfg
        pre_len = int(round(PREAMBLE_BITS * sps))
        if start + pre_len > stream.n_samples:
            return None
        fine = None
        if join_mode:
            # joins arrive with the full oscillator offset: estimate, then correct
            pre = stream.slice_samples(start, start + pre_len)
            try:
                split = split_preamble(pre, self.preamble, self.scheme)
                coarse = estimate_cfo_coarse(split)
                fine = estimate_cfo_fine(split, coarse)
            except ValueError:
                return None
            tail = stream.slice_samples(start, stream.n_samples)
            corrected = apply_cfo(tail, -fine)
            stream = BasebandSignal(
                np.concatenate([stream.samples[:start], corrected.samples]),
                stream.sample_rate, stream.t0)

        csi = None
        if cfg.compensation.csi or join_mode:
            pre = stream.slice_samples(start, start + pre_len)
            est = estimate_csi(pre, self.preamble, 4, scheme=self.scheme)
            # use the estimate only when it stands above the estimation noise
            if abs(est.gain) ** 2 > 4.0 * est.noise_var / pre_len:
                csi = est
        head_len = int(round(HEADER_BITS * sps))
        if start + head_len > stream.n_samples:
            return None
        head_sig = stream.slice_samples(start, start + head_len)
        try:
            head_bits, _ = demodulate(head_sig, self.scheme, csi, n_symbols=HEADER_BITS)
        except ValueError:
            return None
        sync = bits_to_int(head_bits[PREAMBLE_BITS : PREAMBLE_BITS + SYNC_BITS])
        if sync != SYNC_WORD:
            return None
        length = bits_to_int(head_bits[PREAMBLE_BITS + SYNC_BITS : HEADER_BITS])
        total_bits = HEADER_BITS + 8 * length + CRC_BITS
        total_len = int(round(total_bits * sps))
        if start + total_len > stream.n_samples + 1:
            return None
        frame_sig = stream.slice_samples(start, min(start + total_len, stream.n_samples))
        try:
            frame_bits, _ = demodulate(frame_sig, self.scheme, csi, n_symbols=total_bits)
            packet = parse_bits(frame_bits)
        except ValueError:
            return None
        if len(packet.payload) < PAYLOAD_SEQ_BYTES:
            return None
        node_id = int.from_bytes(packet.payload[0:2], "big")
        seq = int.from_bytes(packet.payload[2:4], "big")
        return (node_id, seq), fine
