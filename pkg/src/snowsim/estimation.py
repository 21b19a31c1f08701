"""Preamble-based channel-gain and carrier-offset estimators.

CFO is estimated from delay-and-multiply products of the received preamble
against itself, data-aided by the known transmitted pattern:

    delta_f = -angle( sum_t y(t - tau) y*(t) p*(t - tau) p(t) ) / (2 pi tau)

The alternating preamble repeats at every even-bit lag, so any lag whose
template product is nonzero yields the same closed form. The coarse stage
uses a short sub-symbol lag sized to the worst-case oscillator offset (a
half-preamble lag would alias beyond ~1.4 kHz); the fine stage applies the
coarse correction, tightens once at a two-bit lag, and finishes at the
half-long-preamble lag for the final resolution.

CSI follows the training-sequence least-squares form: the preamble is split
into n equal parts and the per-part estimates are combined, which equals the
stacked pseudo-inverse solution for the scalar flat-fading model y = H x + w.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .channel import apply_cfo
from .modem import ModulationScheme, modulate, symbol_boundaries
from .signals import BasebandSignal, require_nonempty


@dataclass
class PreambleSplit:
    """Received preamble split into the short (n/4 bits) and long (3n/4) parts."""

    short_part: BasebandSignal
    long_part: BasebandSignal
    short_bits: np.ndarray
    long_bits: np.ndarray
    scheme: ModulationScheme

    @property
    def short_duration(self) -> float:
        return self.short_part.duration

    @property
    def long_duration(self) -> float:
        return self.long_part.duration


@dataclass
class CfoEstimate:
    coarse_hz: float
    fine_hz: float
    ppm: float = 0.0
    per_subcarrier_hz: dict = field(default_factory=dict)
    doppler_hz: float = 0.0


@dataclass
class CsiEstimate:
    gain: complex
    noise_var: float
    n_parts: int


def split_preamble(received: BasebandSignal, preamble_bits, scheme: ModulationScheme) -> PreambleSplit:
    """First quarter of the preamble bits to the short part, rest to the long part."""
    bits = np.asarray(preamble_bits, dtype=np.uint8)
    if bits.size % 4:
        raise ValueError("preamble length must be divisible by 4")
    sps = received.sample_rate / scheme.symbol_rate
    cut = int(round(bits.size // 4 * sps))
    return PreambleSplit(
        short_part=received.slice_samples(0, cut),
        long_part=received.slice_samples(cut, int(round(bits.size * sps))),
        short_bits=bits[: bits.size // 4],
        long_bits=bits[bits.size // 4 :],
        scheme=scheme,
    )


def _reference(bits, scheme: ModulationScheme, sample_rate: float) -> np.ndarray:
    return modulate(bits, scheme, 0.0, 2.0 * scheme.symbol_rate, sample_rate).samples


def _delay_estimate(samples, reference, lag: int, sample_rate: float) -> float:
    z = kernels.delay_product(samples, reference, lag)
    if abs(z) == 0.0:
        raise ValueError("zero-energy preamble segment; cannot estimate offset")
    tau = lag / sample_rate
    return -float(np.angle(z)) / (2.0 * np.pi * tau)


def estimate_cfo_coarse(split: PreambleSplit, max_offset_hz: float = 25e3) -> float:
    """Coarse offset from the short preamble; unambiguous within +/-max_offset_hz."""
    require_nonempty(split.short_part, "short preamble")
    fs = split.short_part.sample_rate
    lag = int(fs / (2.0 * max_offset_hz))
    lag = max(1, min(lag, split.short_part.n_samples - 1))
    ref = _reference(split.short_bits, split.scheme, fs)
    n = min(ref.shape[0], split.short_part.n_samples)
    return _delay_estimate(split.short_part.samples[:n], ref[:n], lag, fs)


def estimate_cfo_fine(split: PreambleSplit, coarse_hz: float,
                      max_offset_hz: float = 25e3) -> float:
    """Total offset after refining the coarse estimate on the long preamble.

    The long-preamble samples are first counter-rotated by the coarse estimate;
    the residual is then measured through a ladder of growing lags (sub-symbol,
    two bits, half the long preamble), each stage correcting before the next so
    low-SNR coarse errors cannot alias the final high-resolution stage. Returns
    the coarse estimate plus all refinements.
    """
    require_nonempty(split.long_part, "long preamble")
    fs = split.long_part.sample_rate
    sps = fs / split.scheme.symbol_rate
    ref = _reference(split.long_bits, split.scheme, fs)
    n = min(ref.shape[0], split.long_part.n_samples)
    ref = ref[:n]

    coarse_lag = max(1, int(fs / (2.0 * max_offset_hz)))
    ladder = [2 * coarse_lag,
              int(round(2 * sps)),
              int(round(split.long_bits.size // 2 * sps))]
    total = float(coarse_hz)
    corrected = apply_cfo(split.long_part, -total).samples[:n]
    for i, lag in enumerate(ladder):
        if not 0 < lag < n:
            raise ValueError("long preamble too short for the refinement lag")
        resid = _delay_estimate(corrected, ref, lag, fs)
        total += resid
        if i < len(ladder) - 1:
            corrected = kernels.mix(corrected, -resid, fs, 0.0)
    return total


def estimate_cfo(split: PreambleSplit, max_offset_hz: float = 25e3) -> CfoEstimate:
    coarse = estimate_cfo_coarse(split, max_offset_hz)
    fine = estimate_cfo_fine(split, coarse)
    return CfoEstimate(coarse_hz=coarse, fine_hz=fine)


def ppm_and_subcarrier_cfo(fine_hz: float, join_hz: float, plan) -> CfoEstimate:
    """Extrapolate the join-subcarrier offset to every subcarrier via crystal ppm."""
    if join_hz <= 0:
        raise ValueError("join frequency must be positive")
    ppm = 1e6 * fine_hz / join_hz
    per = {i: plan.center_hz(i) * fine_hz / join_hz for i in plan.subcarrier_ids()}
    return CfoEstimate(coarse_hz=fine_hz, fine_hz=fine_hz, ppm=ppm, per_subcarrier_hz=per)


def proactive_correction(node_tx: BasebandSignal, delta_f_i: float, delta_f_d: float) -> BasebandSignal:
    """Pre-rotate an uplink waveform so the BS sees no residual offset."""
    return apply_cfo(node_tx, -(delta_f_i + delta_f_d))


def snr_loss_factor(delta_f_hz: float, symbol_period_s: float, es_over_n0: float) -> float:
    """Closed-form SNR degradation factor under a residual offset."""
    if symbol_period_s <= 0:
        raise ValueError("symbol period must be positive")
    x = np.pi * delta_f_hz * symbol_period_s
    return 1.0 + (x * x / 3.0) * es_over_n0


def estimate_csi(received_preamble: BasebandSignal, known_preamble_bits,
                 n_parts: int = 4, scheme: ModulationScheme | None = None,
                 noise_covariance: float | None = None) -> CsiEstimate:
    """Least-squares scalar channel gain from the known training preamble.

    Splits the preamble into n_parts equal segments and combines the per-segment
    estimates; the combination equals the stacked pseudo-inverse solution.
    """
    require_nonempty(received_preamble, "preamble")
    bits = np.asarray(known_preamble_bits, dtype=np.uint8)
    if scheme is None:
        raise ValueError("modulation scheme required to rebuild the reference")
    if bits.size % n_parts:
        raise ValueError("preamble length must divide evenly into n_parts")
    ref = _reference(bits, scheme, received_preamble.sample_rate)
    n = min(ref.shape[0], received_preamble.n_samples)
    ref = ref[:n]
    y = received_preamble.samples[:n]
    energy_total = float(np.sum(np.abs(ref) ** 2))
    if energy_total == 0.0:
        raise ValueError("known preamble has zero energy; LS is singular")

    seg = symbol_boundaries(n_parts, n / n_parts)
    num = 0.0 + 0.0j
    den = 0.0
    for k in range(n_parts):
        p = ref[seg[k] : seg[k + 1]]
        yy = y[seg[k] : seg[k + 1]]
        num += np.sum(np.conj(p) * yy)
        den += float(np.sum(np.abs(p) ** 2))
    gain = num / den
    resid = y - gain * ref
    noise_var = float(np.mean(np.abs(resid) ** 2)) if noise_covariance is None else float(noise_covariance)
    return CsiEstimate(gain=complex(gain), noise_var=noise_var, n_parts=n_parts)
