"""Hot numeric kernels with numba-jitted and pure-numpy implementations.

The active path is chosen once at import from the SNOWSIM_NUMBA environment
variable: "1"/"auto" (default) uses numba when importable, "0" forces the
numpy fallback. Both paths compute identical quantities; tests assert their
agreement. Keep fastmath off so results do not depend on SIMD reassociation.
"""
from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("SNOWSIM_NUMBA", "auto").strip().lower()
NUMBA_ENABLED = False
if _flag not in ("0", "false", "off"):
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:
        if _flag in ("1", "true", "on"):
            raise


def use_numba() -> bool:
    """True when the jitted kernel path is active."""
    return NUMBA_ENABLED


# ---------------------------------------------------------------- numpy path

def _expand_symbols_np(levels, boundaries, n_samples):
    """Rect-pulse expansion: sample i of symbol s for boundaries[s] <= i < boundaries[s+1]."""
    out = np.zeros(n_samples, dtype=np.complex128)
    counts = np.diff(boundaries)
    out[: boundaries[-1]] = np.repeat(levels, counts)
    return out


def _mix_np(samples, freq_hz, sample_rate, t0):
    """Multiply by exp(j*2*pi*freq*(t0 + n/fs)); freq may be negative."""
    n = np.arange(samples.shape[0])
    return samples * np.exp(2j * np.pi * freq_hz * (t0 + n / sample_rate))


def _segment_means_np(samples, boundaries):
    """Mean of samples over [boundaries[s], boundaries[s+1]) for each segment s."""
    sums = np.add.reduceat(samples, boundaries[:-1])
    # reduceat wraps on an empty trailing segment; guard via counts
    counts = np.diff(boundaries)
    empty = counts == 0
    if np.any(empty):
        sums = sums.copy()
        sums[empty] = 0.0
        counts = np.where(empty, 1, counts)
    return sums / counts


def _delay_product_np(samples, reference, lag):
    """Sum over t of y[t-lag]*conj(y[t]) * conj(p[t-lag]*conj(p[t])) (data-aided)."""
    y0 = samples[:-lag] if lag else samples
    y1 = samples[lag:] if lag else samples
    p0 = reference[:-lag] if lag else reference
    p1 = reference[lag:] if lag else reference
    return np.sum(y0 * np.conj(y1) * np.conj(p0 * np.conj(p1)))


def _envelope_corr_np(env, template, start, stop):
    """Normalized correlation of mean-removed envelope against a zero-mean unit template.

    Returns scores for candidate offsets in [start, stop).
    """
    m = template.shape[0]
    scores = np.empty(stop - start)
    for k in range(start, stop):
        seg = env[k : k + m]
        seg = seg - seg.mean()
        norm = np.sqrt(np.sum(seg * seg))
        scores[k - start] = 0.0 if norm == 0.0 else float(np.dot(seg, template)) / norm
    return scores


def _add_at_offset_np(acc, samples, offset):
    """acc[offset:offset+len(samples)] += samples, clipped to acc bounds."""
    n = acc.shape[0]
    lo = max(offset, 0)
    hi = min(offset + samples.shape[0], n)
    if hi > lo:
        acc[lo:hi] += samples[lo - offset : hi - offset]
    return acc


# ---------------------------------------------------------------- numba path

if NUMBA_ENABLED:

    @njit(cache=True)
    def _expand_symbols_nb(levels, boundaries, n_samples):
        out = np.zeros(n_samples, dtype=np.complex128)
        for s in range(levels.shape[0]):
            for i in range(boundaries[s], boundaries[s + 1]):
                out[i] = levels[s]
        return out

    @njit(cache=True)
    def _mix_nb(samples, freq_hz, sample_rate, t0):
        out = np.empty_like(samples)
        w = 2.0 * np.pi * freq_hz
        for i in range(samples.shape[0]):
            ph = w * (t0 + i / sample_rate)
            out[i] = samples[i] * complex(np.cos(ph), np.sin(ph))
        return out

    @njit(cache=True)
    def _segment_means_nb(samples, boundaries):
        n_seg = boundaries.shape[0] - 1
        out = np.zeros(n_seg, dtype=np.complex128)
        for s in range(n_seg):
            lo, hi = boundaries[s], boundaries[s + 1]
            if hi > lo:
                acc = 0.0 + 0.0j
                for i in range(lo, hi):
                    acc += samples[i]
                out[s] = acc / (hi - lo)
        return out

    @njit(cache=True)
    def _delay_product_nb(samples, reference, lag):
        acc = 0.0 + 0.0j
        for t in range(lag, samples.shape[0]):
            acc += (samples[t - lag] * np.conj(samples[t])) * np.conj(
                reference[t - lag] * np.conj(reference[t])
            )
        return acc

    @njit(cache=True)
    def _envelope_corr_nb(env, template, start, stop):
        m = template.shape[0]
        scores = np.empty(stop - start)
        for k in range(start, stop):
            mean = 0.0
            for i in range(m):
                mean += env[k + i]
            mean /= m
            dot = 0.0
            norm = 0.0
            for i in range(m):
                d = env[k + i] - mean
                dot += d * template[i]
                norm += d * d
            scores[k - start] = 0.0 if norm == 0.0 else dot / np.sqrt(norm)
        return scores

    @njit(cache=True)
    def _add_at_offset_nb(acc, samples, offset):
        n = acc.shape[0]
        lo = offset if offset > 0 else 0
        hi = offset + samples.shape[0]
        if hi > n:
            hi = n
        for i in range(lo, hi):
            acc[i] += samples[i - offset]
        return acc

    expand_symbols = _expand_symbols_nb
    mix = _mix_nb
    segment_means = _segment_means_nb
    delay_product = _delay_product_nb
    envelope_corr = _envelope_corr_nb
    add_at_offset = _add_at_offset_nb
else:
    expand_symbols = _expand_symbols_np
    mix = _mix_np
    segment_means = _segment_means_np
    delay_product = _delay_product_np
    envelope_corr = _envelope_corr_np
    add_at_offset = _add_at_offset_np

# numpy reference implementations, importable regardless of the active path
numpy_impls = {
    "expand_symbols": _expand_symbols_np,
    "mix": _mix_np,
    "segment_means": _segment_means_np,
    "delay_product": _delay_product_np,
    "envelope_corr": _envelope_corr_np,
    "add_at_offset": _add_at_offset_np,
}

active_impls = {
    "expand_symbols": expand_symbols,
    "mix": mix,
    "segment_means": segment_means,
    "delay_product": delay_product,
    "envelope_corr": envelope_corr,
    "add_at_offset": add_at_offset,
}
