"""Narrowband modulation, demodulation, and preamble detection.

OOK/ASK/BPSK with rectangular pulses. A transmitter occupies one subcarrier;
its waveform is synthesized at an arbitrary sample rate and mixed to the
subcarrier offset. Demodulation integrates each symbol (the receive-side
oversampling stands in for a spreading factor) and decides coherently when a
channel estimate is supplied, noncoherently otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal

from . import kernels
from .signals import BasebandSignal, require_nonempty

SUPPORTED_KINDS = ("ook", "bpsk", "ask")


@dataclass(frozen=True)
class ModulationScheme:
    kind: str
    symbol_rate: float
    ask_low: float = 0.25  # low amplitude for binary ASK; OOK uses 0

    def __post_init__(self):
        if self.kind not in SUPPORTED_KINDS:
            raise ValueError(f"unsupported modulation kind: {self.kind!r}")
        if self.symbol_rate <= 0:
            raise ValueError("symbol_rate must be positive")

    @property
    def levels(self):
        if self.kind == "ook":
            return (0.0, 1.0)
        if self.kind == "ask":
            return (self.ask_low, 1.0)
        return (-1.0, 1.0)


def symbol_boundaries(n_symbols: int, samples_per_symbol: float) -> np.ndarray:
    """Sample index of each symbol edge; handles non-integer samples/symbol."""
    edges = np.round(np.arange(n_symbols + 1) * samples_per_symbol).astype(np.int64)
    return edges


def modulate(bits, scheme: ModulationScheme, subcarrier_center_hz: float,
             bandwidth_hz: float, sample_rate: float, t0: float = 0.0) -> BasebandSignal:
    """Synthesize the unit-amplitude baseband waveform of a bit sequence.

    subcarrier_center_hz is relative to the wideband channel center. Rejects
    sample rates below 2x the occupied bandwidth (aliasing).
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size == 0:
        raise ValueError("bits must be non-empty")
    if sample_rate < 2.0 * bandwidth_hz:
        raise ValueError("sample_rate below 2x bandwidth would alias")
    if abs(subcarrier_center_hz) + bandwidth_hz / 2.0 > sample_rate / 2.0:
        raise ValueError("subcarrier center outside representable band")
    lo, hi = scheme.levels
    levels = np.where(bits > 0, hi, lo).astype(np.complex128)
    sps = sample_rate / scheme.symbol_rate
    edges = symbol_boundaries(bits.size, sps)
    samples = kernels.expand_symbols(levels, edges, int(edges[-1]))
    if subcarrier_center_hz != 0.0:
        samples = kernels.mix(samples, float(subcarrier_center_hz), float(sample_rate), float(t0))
    return BasebandSignal(samples, sample_rate, t0)


def _decision_threshold(metrics: np.ndarray, levels) -> float:
    """Blind threshold from the bimodal metric distribution (quartile midpoints)."""
    srt = np.sort(metrics)
    q = max(1, srt.size // 4)
    low = float(np.mean(srt[:q]))
    high = float(np.mean(srt[-q:]))
    return 0.5 * (low + high)


def demodulate(signal: BasebandSignal, scheme: ModulationScheme, csi=None,
               n_symbols: int | None = None):
    """Recover bits and per-bit soft metrics from a symbol-aligned waveform.

    With a CsiEstimate the samples are equalized by the estimated gain before
    the decision; without it OOK/ASK decide on noncoherent magnitudes against
    a blind threshold and BPSK assumes a unit channel.
    """
    require_nonempty(signal)
    sps = signal.sample_rate / scheme.symbol_rate
    if signal.n_samples < sps - 1:
        raise ValueError("signal shorter than one symbol")
    if n_symbols is None:
        n_symbols = int(round(signal.n_samples / sps))
    edges = symbol_boundaries(n_symbols, sps)
    if abs(int(edges[-1]) - signal.n_samples) > 1:
        raise ValueError("signal duration is not an integer number of symbols")
    edges = np.minimum(edges, signal.n_samples)
    z = kernels.segment_means(signal.samples, edges)

    gain = None if csi is None else complex(csi.gain)
    if gain is not None:
        if gain == 0:
            raise ValueError("cannot equalize with a zero channel gain")
        z = z / gain

    lo, hi = scheme.levels
    if scheme.kind == "bpsk":
        soft = z.real
        bits = (soft > 0).astype(np.uint8)
        return bits, soft

    # OOK/ASK decide on magnitudes: immune to residual phase drift across the
    # packet; the channel estimate pins the threshold between the two levels
    metrics = np.abs(z)
    if gain is not None:
        threshold = 0.5 * (abs(lo) + abs(hi))
    else:
        if float(np.max(metrics)) < 1e-12:
            return np.zeros(n_symbols, dtype=np.uint8), metrics
        threshold = _decision_threshold(metrics, (lo, hi))
    bits = (metrics > threshold).astype(np.uint8)
    soft = metrics - threshold
    return bits, soft


def envelope_template(preamble_bits, scheme: ModulationScheme, sample_rate: float) -> np.ndarray:
    """Zero-mean, unit-norm envelope of the known preamble at a given rate."""
    lo, hi = scheme.levels
    levels = np.where(np.asarray(preamble_bits) > 0, abs(hi), abs(lo)).astype(np.complex128)
    edges = symbol_boundaries(len(preamble_bits), sample_rate / scheme.symbol_rate)
    env = kernels.expand_symbols(levels, edges, int(edges[-1])).real
    env = env - env.mean()
    norm = np.sqrt(np.sum(env * env))
    if norm == 0:
        raise ValueError("preamble envelope is flat; cannot correlate")
    return env / norm


def detect_preamble(signal: BasebandSignal, preamble_bits, scheme: ModulationScheme,
                    threshold: float = 0.6, search=None):
    """Locate preamble starts by normalized envelope correlation.

    Returns a list of (start_sample, score). `search` optionally restricts the
    scan to (start, stop) offset windows. Scores are in [-1, 1]; the ideal
    aligned autocorrelation scores 1.
    """
    require_nonempty(signal)
    template = envelope_template(preamble_bits, scheme, signal.sample_rate)
    m = template.shape[0]
    env = np.abs(signal.samples)
    n = env.shape[0] - m + 1
    if n <= 0:
        return []
    if search is None:
        windows = [(0, n)]
    else:
        windows = [(max(0, a), min(n, b)) for a, b in search]

    hits = []
    for start, stop in windows:
        if stop <= start:
            continue
        if kernels.use_numba() or (stop - start) < 4096:
            scores = kernels.envelope_corr(env, template, int(start), int(stop))
        else:
            scores = _envelope_corr_fft(env, template, int(start), int(stop))
        hits.extend(_pick_peaks(scores, start, threshold, m))
    hits.sort()
    return hits


def _envelope_corr_fft(env, template, start, stop):
    m = template.shape[0]
    seg = env[start : stop + m - 1]
    dot = scipy.signal.fftconvolve(seg, template[::-1], mode="valid")
    csum = np.cumsum(np.concatenate(([0.0], seg)))
    csum2 = np.cumsum(np.concatenate(([0.0], seg * seg)))
    s1 = csum[m:] - csum[:-m]
    s2 = csum2[m:] - csum2[:-m]
    var = np.maximum(s2 - s1 * s1 / m, 0.0)
    norm = np.sqrt(var)
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = np.where(norm > 0, dot / norm, 0.0)
    return scores[: stop - start]


def _pick_peaks(scores, offset, threshold, window, max_per_group: int = 4):
    """Candidate alignments above threshold, a few local maxima per cluster.

    The alternating preamble autocorrelates strongly at even-bit shifts, so a
    cluster's global maximum can be a shifted sidepeak under noise; several
    near-tied maxima are returned and the sync word arbitrates downstream.
    """
    hits = []
    above = np.flatnonzero(scores >= threshold)
    if above.size == 0:
        return hits
    gap = np.flatnonzero(np.diff(above) > window // 2)
    groups = np.split(above, gap + 1)
    for g in groups:
        s = scores[g]
        local = [i for i in range(g.size)
                 if (i == 0 or s[i] >= s[i - 1]) and (i == g.size - 1 or s[i] > s[i + 1])]
        local.sort(key=lambda i: -s[i])
        for i in local[:max_per_group]:
            hits.append((int(g[i] + offset), float(s[i])))
    return hits
