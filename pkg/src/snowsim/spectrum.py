"""Wideband channel layout: overlapping orthogonal subcarriers with reserved roles.

The default plan mirrors the deployed configuration: 500-506 MHz split into 29
subcarriers of 400 kHz at 50% overlap (200 kHz spacing), subcarrier 28 reserved
for joining, 26 for the downlink, 27 and 29 kept silent so the join subcarrier
stays ICI-free. Subcarrier ids are 1-based.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SpectrumPlan:
    band_start: float
    band_end: float
    num_subcarriers: int
    subcarrier_bandwidth: float
    overlap_fraction: float
    join_index: int
    downlink_index: int
    backup_indices: frozenset = frozenset()
    guard_indices: frozenset = frozenset()

    def __post_init__(self):
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise ValueError("overlap_fraction must be in [0, 1)")
        if self.num_subcarriers < 1:
            raise ValueError("need at least one subcarrier")
        centers = [self.center_hz(i) for i in self.subcarrier_ids()]
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise ValueError("subcarrier centers must be strictly increasing")
        if centers[0] < self.band_start or centers[-1] > self.band_end:
            raise ValueError("subcarrier centers must lie within the band")
        reserved = {self.downlink_index} | set(self.backup_indices)
        if self.join_index in reserved or self.join_index in self.data_subcarriers():
            raise ValueError("join subcarrier must not be shared with any other role")

    @property
    def spacing(self) -> float:
        return self.subcarrier_bandwidth * (1.0 - self.overlap_fraction)

    @property
    def band_center(self) -> float:
        return 0.5 * (self.band_start + self.band_end)

    def subcarrier_ids(self):
        return range(1, self.num_subcarriers + 1)

    def center_hz(self, subcarrier: int) -> float:
        """Absolute center frequency of a subcarrier."""
        if not 1 <= subcarrier <= self.num_subcarriers:
            raise ValueError(f"unknown subcarrier id {subcarrier}")
        return self.band_start + 0.5 * self.subcarrier_bandwidth + (subcarrier - 1) * self.spacing

    def center_offset_hz(self, subcarrier: int) -> float:
        """Center frequency relative to the wideband channel center."""
        return self.center_hz(subcarrier) - self.band_center

    def data_subcarriers(self) -> tuple:
        reserved = {self.join_index, self.downlink_index}
        reserved |= set(self.backup_indices) | set(self.guard_indices)
        return tuple(i for i in self.subcarrier_ids() if i not in reserved)


def default_plan(backup_indices=()) -> SpectrumPlan:
    """The deployed 29-subcarrier plan over 500-506 MHz."""
    return SpectrumPlan(
        band_start=500e6,
        band_end=506e6,
        num_subcarriers=29,
        subcarrier_bandwidth=400e3,
        overlap_fraction=0.5,
        join_index=28,
        downlink_index=26,
        backup_indices=frozenset(backup_indices),
        guard_indices=frozenset({27, 29}),
    )


def ofdm_grid_plan(n_subcarriers: int, spacing_hz: float) -> SpectrumPlan:
    """Aligned orthogonal grid (f_k = k*spacing) used for composite-frame analysis.

    With symbol duration 1/spacing, block-DFT decoding is exactly orthogonal.
    """
    band = n_subcarriers * spacing_hz
    return SpectrumPlan(
        band_start=-0.5 * spacing_hz,
        band_end=band - 0.5 * spacing_hz,
        num_subcarriers=n_subcarriers,
        subcarrier_bandwidth=spacing_hz,
        overlap_fraction=0.0,
        join_index=n_subcarriers,
        downlink_index=1,
    )
