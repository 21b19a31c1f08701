"""Link impairments: path loss, slow flat fading, AWGN, CFO, Doppler, superposition.

Power calibration: 0 dBm corresponds to unit mean baseband power. apply_link
treats its input as the 0 dBm reference waveform and scales the amplitude by
the Tx power and path loss before applying the complex fading gain and noise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from . import kernels
from .signals import BasebandSignal, require_nonempty

FREE_SPACE_CONST_DB = 147.55  # 20*log10(4*pi/c), 1 m / 1 Hz reference


@dataclass(frozen=True)
class PathLossModel:
    kind: str = "log_distance"          # "free_space" or "log_distance"
    exponent: float = 3.5               # log-distance slope
    reference_m: float = 100.0          # anchored at free-space loss here

    def __post_init__(self):
        if self.kind not in ("free_space", "log_distance"):
            raise ValueError(f"unknown path loss model {self.kind!r}")


@dataclass
class LinkModel:
    distance_m: float
    carrier_hz: float = 503e6
    pathloss: PathLossModel = field(default_factory=PathLossModel)
    fading_gain: complex = 1.0 + 0.0j   # frozen over a packet (slow flat fading)
    noise_psd: float = 0.0              # calibrated units per Hz
    tx_power_dbm: float = 15.0
    rx_sensitivity_dbm: float = -114.0

    def __post_init__(self):
        if self.distance_m <= 0:
            raise ValueError("distance must be positive")


@dataclass
class OscillatorModel:
    ppm_error: float
    drift_per_packet: float = 0.0

    def __post_init__(self):
        if abs(self.ppm_error) > 40.0:
            raise ValueError("ppm error beyond the +/-40 crystal bound")

    def offset_hz(self, carrier_hz: float) -> float:
        return self.ppm_error * 1e-6 * carrier_hz


@dataclass
class MobilityState:
    velocity_mps: float
    angle_theta_rad: float | None = None
    delta_s_m: float = 0.0     # anticipated position change over one packet
    range_r_m: float = 0.0     # line-of-sight distance to the BS

    def theta(self) -> float:
        if self.angle_theta_rad is not None:
            return self.angle_theta_rad
        if self.range_r_m <= 0:
            raise ValueError("range must be positive for the delta_s/r approximation")
        return self.delta_s_m / self.range_r_m


def free_space_path_loss_db(distance_m: float, carrier_hz: float) -> float:
    return 20.0 * np.log10(distance_m) + 20.0 * np.log10(carrier_hz) - FREE_SPACE_CONST_DB


def path_loss_db(model: PathLossModel, distance_m: float, carrier_hz: float) -> float:
    """Free-space or log-distance loss anchored at the free-space reference."""
    if distance_m <= 0 or carrier_hz <= 0:
        raise ValueError("distance and carrier must be positive")
    if model.kind == "free_space":
        return free_space_path_loss_db(distance_m, carrier_hz)
    anchor = free_space_path_loss_db(model.reference_m, carrier_hz)
    if distance_m <= model.reference_m:
        return free_space_path_loss_db(distance_m, carrier_hz)
    return anchor + 10.0 * model.exponent * np.log10(distance_m / model.reference_m)


def apply_link(signal: BasebandSignal, link: LinkModel, rng_seed=None) -> BasebandSignal:
    """y = H * (amplitude-scaled x) + w with circular symmetric complex Gaussian w.

    Deterministic for a fixed seed. The noise variance per sample equals
    noise_psd * sample_rate (white over the represented band).
    """
    require_nonempty(signal)
    loss_db = path_loss_db(link.pathloss, link.distance_m, link.carrier_hz)
    amp = 10.0 ** ((link.tx_power_dbm - loss_db) / 20.0)
    out = signal.samples * (amp * complex(link.fading_gain))
    if link.noise_psd > 0.0:
        rng = np.random.default_rng(rng_seed)
        sigma = np.sqrt(link.noise_psd * signal.sample_rate / 2.0)
        noise = rng.standard_normal(out.shape[0]) + 1j * rng.standard_normal(out.shape[0])
        out = out + sigma * noise
    return BasebandSignal(out, signal.sample_rate, signal.t0)


def apply_cfo(signal: BasebandSignal, delta_f_hz: float) -> BasebandSignal:
    """Rotate by exp(j*2*pi*delta_f*t) against absolute time (shifts compose)."""
    require_nonempty(signal)
    if delta_f_hz == 0.0:
        return BasebandSignal(signal.samples.copy(), signal.sample_rate, signal.t0)
    out = kernels.mix(signal.samples, float(delta_f_hz), float(signal.sample_rate), float(signal.t0))
    return BasebandSignal(out, signal.sample_rate, signal.t0)


def doppler_shift_hz(mob: MobilityState, subcarrier_hz: float) -> float:
    """f_d = f_i * (v/c) * cos(theta)."""
    if subcarrier_hz <= 0:
        raise ValueError("subcarrier frequency must be positive")
    return subcarrier_hz * (mob.velocity_mps / SPEED_OF_LIGHT) * np.cos(mob.theta())


def mix_concurrent(signals) -> BasebandSignal:
    """Sample-wise sum of (BasebandSignal, arrival_offset_s) pairs.

    Offsets are relative to the earliest signal start; the result covers the
    union of all spans. All inputs must share one sample rate.
    """
    items = list(signals)
    if not items:
        raise ValueError("nothing to mix")
    rate = items[0][0].sample_rate
    for sig, _ in items:
        if sig.sample_rate != rate:
            raise ValueError("mixed signals must share a sample rate")
    starts = [int(round(off * rate)) for _, off in items]
    base = min(starts)
    length = max(s - base + sig.n_samples for (sig, _), s in zip(items, starts))
    acc = np.zeros(length, dtype=np.complex128)
    for (sig, _), s in zip(items, starts):
        kernels.add_at_offset(acc, sig.samples, s - base)
    t0 = items[0][0].t0 + base / rate
    return BasebandSignal(acc, rate, t0)


def rssi_dbm(signal: BasebandSignal) -> float:
    """Mean power in dBm against the unit-power = 0 dBm calibration."""
    require_nonempty(signal)
    p = signal.mean_power()
    if p <= 0.0:
        raise ValueError("all-zero signal has no defined RSSI")
    return 10.0 * np.log10(p)


def rayleigh_fading_gain(rng: np.random.Generator) -> complex:
    """Unit-mean-power Rayleigh amplitude with uniform phase, drawn per packet."""
    return (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2.0)
