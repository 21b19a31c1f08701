"""Adaptive transmission power control: linear PDR-vs-power model with feedback.

A node probes a few power levels, least-squares fits PDR = slope*tp + intercept
(closed form below), then picks the lowest power meeting its PDR threshold.
The slope is treated as time-invariant; the intercept tracks drift through a
feedback update from the latest PDR readings.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PowerVector:
    levels: tuple = tuple(float(p) for p in range(16))  # 0..15 dBm

    def __post_init__(self):
        if len(self.levels) < 2:
            raise ValueError("need at least two power levels")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError("power levels must be strictly increasing")

    def nearest(self, value_dbm: float) -> float:
        """Round to the nearest level; out-of-range values clamp to the ends."""
        if value_dbm <= self.levels[0]:
            return self.levels[0]
        if value_dbm >= self.levels[-1]:
            return self.levels[-1]
        arr = np.asarray(self.levels)
        return float(arr[np.argmin(np.abs(arr - value_dbm))])


@dataclass
class PdrSamples:
    pairs: list                      # (tp_dbm, pdr in [0, 1])
    k_window: int = 10               # feedback readings per update period

    def __post_init__(self):
        for tp, pdr in self.pairs:
            if not 0.0 <= pdr <= 1.0:
                raise ValueError(f"pdr {pdr} outside [0, 1]")


@dataclass
class AtpcModel:
    slope: float                     # PDR per dBm, held fixed after the fit
    intercept: float                 # tracked over time by feedback
    pdr_threshold: float

    def __post_init__(self):
        if not 0.0 < self.pdr_threshold <= 1.0:
            raise ValueError("pdr_threshold must be in (0, 1]")


def fit_initial(samples: PdrSamples, pdr_threshold: float = 0.9) -> AtpcModel:
    """Closed-form least squares over (tp, pdr) pairs.

    slope = (m*S_lt - S_l*S_t) / (m*S_tt - S_t^2), intercept analogous; errors
    out when every sample sits at one power level (singular denominator).
    """
    tp = np.array([p for p, _ in samples.pairs], dtype=np.float64)
    l = np.array([v for _, v in samples.pairs], dtype=np.float64)
    m = tp.shape[0]
    if m < 2:
        raise ValueError("need at least two samples")
    s_t = tp.sum()
    s_tt = (tp * tp).sum()
    s_l = l.sum()
    s_lt = (l * tp).sum()
    den = m * s_tt - s_t * s_t
    if abs(den) < 1e-12 * max(1.0, s_tt):
        raise ValueError("all samples at one power level; fit is singular")
    slope = (m * s_lt - s_l * s_t) / den
    intercept = (s_l * s_tt - s_lt * s_t) / den
    return AtpcModel(slope=slope, intercept=intercept, pdr_threshold=pdr_threshold)


def select_power(model: AtpcModel, tp_vector: PowerVector) -> float:
    """Solve threshold = slope*tp + intercept, rounded into the power vector."""
    if model.slope == 0.0:
        raise ValueError("zero slope; power has no effect on PDR in this model")
    raw = (model.pdr_threshold - model.intercept) / model.slope
    return tp_vector.nearest(raw)


def update_intercept(model: AtpcModel, readings: PdrSamples) -> AtpcModel:
    """Feedback step: b <- b - (threshold - mean of the last K readings)."""
    if not readings.pairs:
        raise ValueError("empty feedback window")
    mean_pdr = float(np.mean([v for _, v in readings.pairs]))
    delta = model.pdr_threshold - mean_pdr
    return AtpcModel(
        slope=model.slope,
        intercept=model.intercept - delta,
        pdr_threshold=model.pdr_threshold,
    )


def predict_pdr(model: AtpcModel, tp_dbm: float) -> float:
    """Model PDR at a power level, clamped into [0, 1]."""
    return float(np.clip(model.slope * tp_dbm + model.intercept, 0.0, 1.0))
