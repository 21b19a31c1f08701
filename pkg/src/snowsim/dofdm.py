"""Distributed-OFDM composite synthesis and wideband decoding.

Encoding sums per-subcarrier rect-pulse symbol streams mixed to their center
offsets, scaled by 1/sqrt(N). Decoding offers two views of the same math:

- "grid": per-symbol correlation against each subcarrier's exponential
  (windowed DFT). Exactly orthogonal when spacing * symbol_duration = 1 and
  the streams are frame-aligned, which is how the BS composes downlink frames.
- "stream": per-subcarrier band extraction from one wideband FFT (the G-FFT
  view), brick-walled at half the subcarrier spacing and decimated, for
  asynchronous narrowband uplinks. Packet boundaries are recovered afterwards
  by preamble correlation on each extracted stream.
"""
from __future__ import annotations

import numpy as np
import scipy.fft as sfft

from . import kernels
from .modem import symbol_boundaries
from .signals import BasebandSignal
from .spectrum import SpectrumPlan


def dofdm_encode(symbols: dict, plan: SpectrumPlan, sample_rate: float,
                 symbol_rate: float, t0: float = 0.0) -> BasebandSignal:
    """Composite x(t) = (1/sqrt(N)) * sum_k s_k(t) exp(j 2 pi f_k t)."""
    if not symbols:
        raise ValueError("empty symbol map")
    n_samples = 0
    sps = sample_rate / symbol_rate
    streams = {}
    for sub, sym in symbols.items():
        if sub not in plan.subcarrier_ids():
            raise ValueError(f"unknown subcarrier id {sub}")
        sym = np.asarray(sym, dtype=np.complex128)
        edges = symbol_boundaries(sym.shape[0], sps)
        streams[sub] = (sym, edges)
        n_samples = max(n_samples, int(edges[-1]))

    acc = np.zeros(n_samples, dtype=np.complex128)
    for sub, (sym, edges) in streams.items():
        wave = kernels.expand_symbols(sym, edges, int(edges[-1]))
        wave = kernels.mix(wave, plan.center_offset_hz(sub), sample_rate, t0)
        kernels.add_at_offset(acc, wave, 0)
    acc /= np.sqrt(plan.num_subcarriers)
    return BasebandSignal(acc, sample_rate, t0)


def dofdm_decode_grid(signal: BasebandSignal, plan: SpectrumPlan,
                      symbol_rate: float, subcarriers=None) -> dict:
    """Per-symbol DFT decode of a frame-aligned composite; returns symbol arrays."""
    sps = signal.sample_rate / symbol_rate
    n_symbols = int(round(signal.n_samples / sps))
    edges = np.minimum(symbol_boundaries(n_symbols, sps), signal.n_samples)
    scale = np.sqrt(plan.num_subcarriers)
    out = {}
    for sub in subcarriers if subcarriers is not None else plan.subcarrier_ids():
        mixed = kernels.mix(signal.samples, -plan.center_offset_hz(sub),
                            signal.sample_rate, signal.t0)
        out[sub] = kernels.segment_means(mixed, edges) * scale
    return out


def extract_band(signal: BasebandSignal, center_hz: float, half_width_hz: float,
                 spectrum=None) -> BasebandSignal:
    """Brick-wall band extraction, down-mixed to center_hz and decimated.

    The output rate is ~2x half_width (exact bin count times the FFT bin
    width). `spectrum` optionally carries a precomputed (fft, n_pad) pair so
    one wideband FFT serves several extractions.
    """
    fs = signal.sample_rate
    if spectrum is None:
        spectrum = wideband_spectrum(signal)
    spec, n_pad = spectrum
    df = fs / n_pad
    b0 = int(round(center_hz / df))
    k = int(half_width_hz / df)
    if k < 1:
        raise ValueError("extraction band narrower than one FFT bin")
    idx = (np.arange(-k, k + 1) + b0) % n_pad
    m = idx.shape[0]
    sel = np.empty(m, dtype=np.complex128)
    sel[: k + 1] = spec[idx[k:]]          # q = 0..k
    sel[k + 1 :] = spec[idx[:k]]          # q = -k..-1
    sub = sfft.ifft(sel) * (m / n_pad)
    out = BasebandSignal(sub, m * df, signal.t0)
    resid = center_hz - b0 * df
    if resid != 0.0:
        out = BasebandSignal(kernels.mix(out.samples, -resid, out.sample_rate, 0.0),
                             out.sample_rate, out.t0)
    return out


def extract_subcarrier(signal: BasebandSignal, plan: SpectrumPlan, subcarrier: int,
                       spectrum=None, half_width_hz: float | None = None) -> BasebandSignal:
    """Band extraction of one subcarrier from a wideband capture."""
    if half_width_hz is None:
        half_width_hz = 0.5 * plan.spacing if plan.num_subcarriers > 1 else plan.subcarrier_bandwidth
    return extract_band(signal, plan.center_offset_hz(subcarrier), half_width_hz, spectrum)


def wideband_spectrum(signal: BasebandSignal):
    """Forward FFT of a wideband capture, zero-padded to a fast length."""
    n_pad = sfft.next_fast_len(signal.n_samples)
    return sfft.fft(signal.samples, n_pad), n_pad


def lowpass_brickwall(signal: BasebandSignal, half_width_hz: float) -> BasebandSignal:
    """Zero all spectral content beyond +/-half_width without decimating."""
    n = signal.n_samples
    n_pad = sfft.next_fast_len(n)
    spec = sfft.fft(signal.samples, n_pad)
    freqs = sfft.fftfreq(n_pad, 1.0 / signal.sample_rate)
    spec[np.abs(freqs) > half_width_hz] = 0.0
    out = sfft.ifft(spec)[:n]
    return BasebandSignal(out, signal.sample_rate, signal.t0)


def dofdm_decode(signal: BasebandSignal, plan: SpectrumPlan, symbol_rate: float | None = None,
                 mode: str = "auto", subcarriers=None) -> dict:
    """Split a wideband capture into per-subcarrier streams.

    mode="grid" returns symbol arrays (aligned frames); mode="stream" returns
    decimated BasebandSignals per subcarrier. "auto" picks grid only when the
    plan spacing matches the symbol rate exactly.
    """
    if signal.n_samples == 0:
        raise ValueError("cannot decode an empty capture")
    if mode == "auto":
        grid = symbol_rate is not None and abs(plan.spacing / symbol_rate - 1.0) < 1e-9
        mode = "grid" if grid else "stream"
    if mode == "grid":
        if symbol_rate is None:
            raise ValueError("grid decode needs the frame symbol rate")
        return dofdm_decode_grid(signal, plan, symbol_rate, subcarriers)
    spectrum = wideband_spectrum(signal)
    subs = subcarriers if subcarriers is not None else plan.subcarrier_ids()
    return {sub: extract_subcarrier(signal, plan, sub, spectrum) for sub in subs}
