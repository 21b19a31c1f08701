"""Complex-baseband sample container used across the PHY."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class BasebandSignal:
    """Time-domain complex baseband samples at a fixed sample rate.

    t0 is the absolute start time in seconds; frequency rotations are applied
    against absolute time so that shifts compose across signal segments.
    """

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def n_samples(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    def mean_power(self) -> float:
        if self.n_samples == 0:
            raise ValueError("empty signal has no power")
        return float(np.mean(np.abs(self.samples) ** 2))

    def peak_power(self) -> float:
        if self.n_samples == 0:
            raise ValueError("empty signal has no power")
        return float(np.max(np.abs(self.samples) ** 2))

    def slice_samples(self, start: int, stop: int) -> "BasebandSignal":
        return BasebandSignal(
            self.samples[start:stop],
            self.sample_rate,
            self.t0 + start / self.sample_rate,
        )

    def scaled(self, gain: complex) -> "BasebandSignal":
        return BasebandSignal(self.samples * gain, self.sample_rate, self.t0)


def require_nonempty(signal: BasebandSignal, what: str = "signal"):
    if signal.n_samples == 0:
        raise ValueError(f"{what} must be non-empty")
